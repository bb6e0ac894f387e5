#include <pdfrac/reference.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace pdfrac;

namespace
{
WaveConfig mode_wave( double h, double T = 0.5 )
{
    WaveConfig w;
    w.mu = 0.5;
    w.spacing = h;
    w.T = T;
    w.u0 = FieldPreset::mode( 1.0 );
    return w;
}

// Largest nodal deviation from a separable closed form over all samples.
template <class Exact>
double sup_nodal_error( const WaveTrajectory& tr, Exact exact )
{
    double e = 0.0;
    for ( const auto& f : tr.samples )
        for ( long i = 0; i <= f.nx; ++i )
            for ( long j = 0; j <= f.ny; ++j )
            {
                const Vec2 x{ i * f.spacing, j * f.spacing };
                e = std::max( e, std::abs( f.at( i, j ) - exact( x, f.t ) ) );
            }
    return e;
}

ModelSpec sweep_base( double T )
{
    ModelSpec m;
    m.domain = { Rect{}, 0.0625, 0.25, 0.0 };
    m.T = T;
    return m;
}
} // namespace

TEST( Wave, StandingModeClosedForm )
{
    const auto w = mode_wave( 1.0 / 32 );
    const double omega = w.wave_speed() * pi * std::sqrt( 2.0 );
    const auto tr = wave_solve( w );
    ASSERT_EQ( tr.samples.size(), 11u );
    EXPECT_EQ( tr.steps % 10, 0u );
    EXPECT_LE( tr.dt, w.cfl_limit() );
    const double e = sup_nodal_error( tr, [&]( Vec2 x, double t ) {
        return std::sin( pi * x.x ) * std::sin( pi * x.y ) * std::cos( omega * t );
    } );
    EXPECT_LT( e, 5e-3 );
    for ( std::size_t k = 0; k < tr.samples.size(); ++k )
        EXPECT_NEAR( tr.samples[k].t, 0.05 * double( k ), 1e-12 );
}

TEST( Wave, SecondOrderInSpacing )
{
    std::vector<double> errs;
    for ( double h : { 1.0 / 16, 1.0 / 32, 1.0 / 64 } )
    {
        const auto w = mode_wave( h );
        const double omega = w.wave_speed() * pi * std::sqrt( 2.0 );
        errs.push_back( sup_nodal_error( wave_solve( w ), [&]( Vec2 x, double t ) {
            return std::sin( pi * x.x ) * std::sin( pi * x.y ) * std::cos( omega * t );
        } ) );
    }
    for ( std::size_t i = 1; i < errs.size(); ++i )
    {
        EXPECT_GE( errs[i - 1] / errs[i], 3.5 );
        const double rate = std::log2( errs[i - 1] / errs[i] );
        EXPECT_GE( rate, 1.8 );
        EXPECT_LE( rate, 2.2 );
    }
}

TEST( Wave, ForcedModeResponse )
{
    // rho u'' = -2 mu lambda u + A phi with u(0) = 0 gives
    // u = A / (rho omega^2) (1 - cos omega t) phi
    auto w = mode_wave( 1.0 / 64 );
    w.u0 = FieldPreset::zero();
    w.body = { PresetKind::mode, 3.0, 0.0, 1, 1 };
    const double omega = w.wave_speed() * pi * std::sqrt( 2.0 );
    const double e = sup_nodal_error( wave_solve( w ), [&]( Vec2 x, double t ) {
        return 3.0 / ( omega * omega ) * ( 1 - std::cos( omega * t ) ) *
               std::sin( pi * x.x ) * std::sin( pi * x.y );
    } );
    EXPECT_LT( e, 2e-3 );
}

TEST( Wave, ZeroDataStaysZero )
{
    auto w = mode_wave( 0.125 );
    w.u0 = FieldPreset::zero();
    for ( const auto& f : wave_solve( w ).samples )
        for ( double v : f.values )
            EXPECT_EQ( v, 0.0 );
}

TEST( Wave, Validation )
{
    auto w = mode_wave( 0.1 );
    w.dt = 1.01 * w.cfl_limit();
    EXPECT_THROW( wave_solve( w ), ConfigError );
    w = mode_wave( 0.3 );
    EXPECT_THROW( wave_solve( w ), ConfigError );
    w = mode_wave( 0.125 );
    w.mu = 0.0;
    EXPECT_THROW( wave_solve( w ), ConfigError );
}

TEST( Wave, ZeroDurationHasOneSample )
{
    const auto tr = wave_solve( mode_wave( 0.125, 0.0 ) );
    EXPECT_EQ( tr.steps, 0u );
    ASSERT_EQ( tr.samples.size(), 1u );
}

TEST( Wave, BilinearSampleReproducesLinearData )
{
    WaveField f{ 0.0, Rect{}, 0.25, 4, 4, {} };
    for ( long i = 0; i <= 4; ++i )
        for ( long j = 0; j <= 4; ++j )
            f.values.push_back( 2.0 * i * 0.25 - 3.0 * j * 0.25 + 1.0 );
    for ( Vec2 x : { Vec2{ 0.1, 0.7 }, Vec2{ 0.5, 0.5 }, Vec2{ 0.99, 0.01 } } )
        EXPECT_NEAR( f.sample( x ), 2 * x.x - 3 * x.y + 1, 1e-14 );
    EXPECT_EQ( f.sample( { 1.5, 0.5 } ), 0.0 );
}

TEST( FieldError, IdenticalAndConstantOffset )
{
    const auto g = build_grid( { Rect{}, 0.05, 0.15, 0.0 } );
    const auto w = mode_wave( 0.05 );
    const auto ref = wave_solve( w ).samples.front();
    State s = make_initial_data( g, {}, {}, {} );
    for ( auto p : g.interior )
        s.u[p] = ref.sample( g.positions[p] );
    EXPECT_EQ( field_error( s, ref, g, 0.01 ), 0.0 );

    WaveField c{ 0.0, Rect{}, 0.05, 20, 20,
                 std::vector<double>( 21 * 21, 0.75 ) };
    State z = make_initial_data( g, {}, {}, {} );
    EXPECT_NEAR( field_error( z, c, g, 0.01 ), 0.75, 1e-12 );
    EXPECT_NEAR( field_norm( c, g ), 0.75, 1e-12 );
}

TEST( FieldError, TimeMismatch )
{
    const auto g = build_grid( { Rect{}, 0.05, 0.15, 0.0 } );
    WaveField c{ 0.5, Rect{}, 0.05, 20, 20, std::vector<double>( 21 * 21, 0.0 ) };
    State z = make_initial_data( g, {}, {}, {} );
    z.t = 0.4;
    EXPECT_THROW( field_error( z, c, g, 0.1 ), ConfigError );
    z.t = 0.46;
    EXPECT_NO_THROW( field_error( z, c, g, 0.1 ) );
}

TEST( Sweep, Validation )
{
    SweepConfig c;
    c.base = sweep_base( 0.1 );
    c.horizons = { 0.25, 0.125 };
    EXPECT_THROW( convergence_sweep( c ), ConfigError );
    c.horizons = { 0.25, 0.125, 0.125 };
    EXPECT_THROW( convergence_sweep( c ), ConfigError );
}

TEST( Sweep, ZeroDataHasZeroErrors )
{
    SweepConfig c;
    c.base = sweep_base( 0.2 );
    c.horizons = { 0.25, 0.125, 0.0625 };
    const auto r = convergence_sweep( c );
    ASSERT_TRUE( r.complete );
    ASSERT_EQ( r.runs.size(), 3u );
    for ( const auto& run : r.runs )
    {
        EXPECT_EQ( run.times.size(), 11u );
        for ( double e : run.errors )
            EXPECT_EQ( e, 0.0 );
        EXPECT_EQ( run.max_abs_u, 0.0 );
    }
}

TEST( Sweep, SmoothDataStaysBoundedAndConverges )
{
    SweepConfig c;
    c.base = sweep_base( 0.25 );
    c.base.potential.f_infinity = 10.0;
    c.horizon_ratio = 4.0;
    c.horizons = { 0.25, 0.125, 0.0625 };
    c.u0 = FieldPreset::mode( 0.05 );
    const auto r = convergence_sweep( c );
    ASSERT_TRUE( r.complete ) << r.failure;
    EXPECT_NEAR( r.reference_spacing, 0.0625 / 8, 1e-15 );
    EXPECT_NEAR( r.initial_sup, 0.05, 1e-3 );
    for ( std::size_t i = 0; i < r.runs.size(); ++i )
    {
        const auto& run = r.runs[i];
        EXPECT_NEAR( run.spacing, run.horizon / 4, 1e-15 );
        EXPECT_EQ( run.steps % 10, 0u );
        EXPECT_LT( run.max_abs_u, 10 * r.initial_sup );
        EXPECT_LE( run.max_energy_ratio, 2.0 );
        if ( i > 0 )
        {
            EXPECT_LT( run.sup_error, r.runs[i - 1].sup_error );
        }
    }
}

TEST( Gamma, ZeroField )
{
    const double eps[] = { 0.25, 0.125 };
    for ( const auto& row : gamma_limit_check( {}, eps, sweep_base( 1 ), 4 ) )
    {
        EXPECT_EQ( row.pd, 0.0 );
        EXPECT_EQ( row.target, 0.0 );
    }
}

TEST( Gamma, SmoothModeApproachesBulkEnergy )
{
    auto base = sweep_base( 1 );
    base.potential.f_infinity = 10.0;
    const double eps[] = { 1.0 / 8, 1.0 / 16, 1.0 / 32 };
    const auto rows =
        gamma_limit_check( { FieldPreset::mode( 1.0 ), {} }, eps, base, 6 );
    for ( std::size_t i = 0; i < rows.size(); ++i )
    {
        EXPECT_NEAR( rows[i].target, pi / 3 * pi * pi / 2, 1e-2 );
        EXPECT_LE( rows[i].pd, rows[i].target );
        if ( i > 0 )
        {
            EXPECT_LT( std::abs( rows[i].relative_error ),
                       std::abs( rows[i - 1].relative_error ) );
        }
    }
}

TEST( Gamma, CrackBandTargetUsesFullJumpSet )
{
    const CrackSegment c{ { 0.3, 0.5 }, { 0.7, 0.5 }, 1.0, 0.1 };
    const double eps[] = { 1.0 / 16 };
    const auto rows = gamma_limit_check( { {}, { c } }, eps, sweep_base( 1 ), 4 );
    EXPECT_NEAR( rows[0].target, 2 * pi / 3 * 1.6, 1e-12 );
    EXPECT_LT( rows[0].pd, rows[0].target );
}
