#include <pdfrac/diagnostics.hpp>
#include <pdfrac/dynamics.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace pdfrac;

namespace
{
ModelSpec model_for( double eps, double ratio, double T = 1.0 )
{
    ModelSpec m;
    m.domain = { Rect{}, eps / ratio, eps, 0.0 };
    m.T = T;
    return m;
}

State zero_state( const NeighborTable& t )
{
    return make_initial_data( t.grid(), {}, FieldPreset::zero(),
                              FieldPreset::zero() );
}

double l2( const std::vector<double>& a, const std::vector<double>& b,
           const ParticleGrid& g )
{
    double s = 0.0;
    for ( auto p : g.interior )
        s += ( a[p] - b[p] ) * ( a[p] - b[p] );
    return std::sqrt( s * g.cell_area() );
}
} // namespace

TEST( InitialData, ZeroAndCrack )
{
    const auto m = model_for( 0.1, 4 );
    const auto t = build_table( m );
    const auto s0 = zero_state( t );
    for ( double v : s0.u )
        EXPECT_EQ( v, 0.0 );

    const CrackSegment c{ { 0.3, 0.5 }, { 0.7, 0.5 }, 1.0, 0.1 };
    const auto s = make_initial_data( t.grid(), { c }, FieldPreset::zero(),
                                      FieldPreset::zero() );
    const auto& g = t.grid();
    for ( std::size_t p = 0; p < g.count(); ++p )
    {
        const Vec2 x = g.positions[p];
        double expect = 0.0;
        if ( g.is_interior( p ) && x.x > 0.3 && x.x < 0.7 &&
             std::abs( x.y - 0.5 ) < 0.1 )
            expect = x.y > 0.5 ? 0.5 : -0.5;
        EXPECT_EQ( s.u[p], expect );
    }
}

TEST( InitialData, CrackTouchingCollarRejected )
{
    const auto t = build_table( model_for( 0.1, 4 ) );
    const CrackSegment c{ { 0.5, 0.5 }, { 0.95, 0.5 }, 1.0, 0.1 };
    EXPECT_NO_THROW( make_initial_data( t.grid(), { c }, {}, {} ) );
    const CrackSegment d{ { 0.5, 0.5 }, { 1.2, 0.5 }, 1.0, 0.1 };
    EXPECT_THROW( make_initial_data( t.grid(), { d }, {}, {} ), ConfigError );
    const CrackSegment e{ { 0.5, 0.05 }, { 0.7, 0.05 }, 1.0, 0.1 };
    EXPECT_THROW( make_initial_data( t.grid(), { e }, {}, {} ), ConfigError );
}

TEST( Force, ZeroStateGivesZeroForce )
{
    const auto m = model_for( 0.1, 4 );
    const auto t = build_table( m );
    for ( double f : assemble_force( zero_state( t ), t, m ) )
        EXPECT_EQ( f, 0.0 );
}

TEST( Force, LinearFieldIsEquilibriumInTheBulk )
{
    const auto m = model_for( 0.1, 4 );
    const auto t = build_table( m );
    const auto& g = t.grid();
    State s = zero_state( t );
    for ( auto p : g.interior )
        s.u[p] = 0.3 * g.positions[p].x - 0.2 * g.positions[p].y;
    const auto f = assemble_force( s, t, m );
    const auto p = g.locate( { 0.5, 0.5 } );
    EXPECT_NEAR( f[p], 0.0, 1e-9 );
}

TEST( Force, BoundaryParticleSeesWholeNeighbourhood )
{
    // difference form: F(x) = 2 sum_y h^2 dW/deta(u(y) - u(x)) over every
    // neighbour, collar included
    const double eps = 0.1;
    const auto m = model_for( eps, 4 );
    const auto t = build_table( m );
    const auto& g = t.grid();
    State s = zero_state( t );
    for ( auto p : g.interior )
        s.u[p] = 0.1 + 0.05 * g.positions[p].x;
    const auto f = assemble_force( s, t, m );
    const auto p = std::size_t( g.locate( { 0.01, 0.5 } ) );
    double expect = 0.0;
    for ( std::size_t k = 0; k < t.stencil().size(); ++k )
    {
        const auto& b = t.stencil()[k];
        const BondGeometry geom{ b.xi_norm, b.direction, eps };
        expect += 2 * t.weight() *
                  bond_force_density( m.potential, m.influence, geom,
                                      s.u[t.neighbor( p, k )] - s.u[p] );
    }
    EXPECT_LT( expect, 0.0 );
    EXPECT_NEAR( f[p], expect, 1e-12 * std::abs( expect ) );
}

TEST( Force, ContinuumLimitIsTwiceShearModulusTimesLaplacian )
{
    // horizon/spacing = 6 keeps the lattice moment error near 0.1%
    const double mu = calibrate( {}, {} ).mu;
    double prev = 1e300;
    for ( double eps : { 1.0 / 8, 1.0 / 16, 1.0 / 32 } )
    {
        const auto m = model_for( eps, 6 );
        const auto t = build_table( m );
        const auto& g = t.grid();
        const auto mode = FieldPreset::mode( 1.0 );
        const auto s = make_initial_data( g, {}, mode, FieldPreset::zero() );
        const auto f = assemble_force( s, t, m );
        const auto p = g.locate( { 0.5, 0.5 } );
        const double target = -4.0 * mu * std::pow( pi, 2 ) * s.u[p];
        const double err = std::abs( f[p] - target ) / std::abs( target );
        EXPECT_LT( err, prev ) << eps;
        prev = err;
    }
    EXPECT_LT( prev, 0.05 );
}

TEST( Force, ExactNegativeEnergyGradient )
{
    const double h = 1.0 / 16.0;
    const auto m = model_for( 3 * h, 3 );
    const auto t = build_table( m );
    const auto& g = t.grid();
    std::mt19937_64 rng( 5 );
    const double bar = critical_stretch( m.potential, m.horizon(), 1.0 );
    std::uniform_real_distribution<double> amp( -bar, bar );
    State s = zero_state( t );
    for ( auto p : g.interior )
        s.u[p] = amp( rng );
    const auto f = assemble_force( s, t, m );
    for ( int dir = 0; dir < 5; ++dir )
    {
        std::vector<double> w( g.count(), 0.0 );
        for ( auto p : g.interior )
            w[p] = amp( rng ) / bar;
        double pairing = 0.0;
        for ( auto p : g.interior )
            pairing += f[p] * w[p] * g.cell_area();
        const double ds = 1e-6;
        auto shifted = [&]( double a ) {
            auto u = s.u;
            for ( auto p : g.interior )
                u[p] += a * w[p];
            return strain_energy( u, t, m );
        };
        const double dpd = ( shifted( ds ) - shifted( -ds ) ) / ( 2 * ds );
        EXPECT_NEAR( pairing, -dpd, 1e-6 * std::abs( dpd ) );
    }
}

TEST( Force, ThreadCountDoesNotChangeResults )
{
    const auto m = model_for( 0.1, 4 );
    const auto t = build_table( m );
    const auto s = make_initial_data( t.grid(), {}, FieldPreset::mode( 0.3 ),
                                      FieldPreset::zero() );
    set_num_threads( 1 );
    std::vector<double> f1( t.grid().count() );
    const double e1 = assemble_force( s, t, m, f1 );
    set_num_threads( 3 );
    std::vector<double> f3( t.grid().count() );
    const double e3 = assemble_force( s, t, m, f3 );
    set_num_threads( 1 );
    EXPECT_EQ( e1, e3 );
    EXPECT_EQ( f1, f3 );
}

TEST( Force, NonFiniteInputRejected )
{
    const auto m = model_for( 0.1, 4 );
    const auto t = build_table( m );
    State s = zero_state( t );
    s.u[t.grid().interior[3]] = std::nan( "" );
    EXPECT_THROW( assemble_force( s, t, m ), NumericError );
}

TEST( StableStep, Scaling )
{
    const auto m1 = model_for( 1.0 / 8, 4 );
    const auto m2 = model_for( 1.0 / 16, 4 );
    const double d1 = stable_dt( m1, build_table( m1 ) );
    const double d2 = stable_dt( m2, build_table( m2 ) );
    EXPECT_NEAR( d2 / d1, 0.5, 0.025 );

    auto heavy = m1;
    heavy.rho = 4.0;
    EXPECT_NEAR( stable_dt( heavy, build_table( heavy ) ) / d1, 2.0, 1e-12 );
    auto stiff = m1;
    stiff.potential.f_prime_0 = 4.0;
    EXPECT_NEAR( stable_dt( stiff, build_table( stiff ) ) / d1, 0.5, 1e-12 );
}

TEST( StableStep, RowSumBoundValue )
{
    // bulk row sum 4 sum_k h^2 2 J f'(0) / (eps^4 |xi|), safety 1/2
    const double eps = 0.1, h = eps / 4;
    const auto m = model_for( eps, 4 );
    const auto t = build_table( m );
    double row = 0.0;
    for ( int i = -4; i <= 4; ++i )
        for ( int j = -4; j <= 4; ++j )
        {
            const double r = std::hypot( i, j );
            if ( r == 0 || r > 4 )
                continue;
            row += 4 * h * h * 2 / ( std::pow( eps, 4 ) * ( r / 4 ) );
        }
    EXPECT_NEAR( stable_dt( m, t ), 0.5 * 2 / std::sqrt( row ), 1e-12 );
}

TEST( Step, ZeroStateStaysZero )
{
    const auto m = model_for( 0.1, 4 );
    const auto t = build_table( m );
    const auto s = step( zero_state( t ), t, m, {} );
    for ( double v : s.u )
        EXPECT_EQ( v, 0.0 );
    for ( double v : s.v )
        EXPECT_EQ( v, 0.0 );
}

TEST( Step, ConstantBodyForceOneStep )
{
    auto m = model_for( 0.1, 4 );
    m.rho = 2.0;
    const auto t = build_table( m );
    m.dt = 0.25 * stable_dt( m, t );
    const BodyForceSpec b{ PresetKind::uniform, 3.0, 0.0 };
    const auto s = step( zero_state( t ), t, m, b );
    const auto& g = t.grid();
    EXPECT_NEAR( s.t, m.dt, 1e-15 );
    const auto p = g.locate( { 0.5, 0.5 } );
    EXPECT_NEAR( s.u[p], m.dt * m.dt * 3.0 / ( 2 * 2.0 ), 1e-15 );
    EXPECT_NEAR( s.v[p], m.dt * 3.0 / 2.0, 1e-13 );
    for ( std::size_t q = 0; q < g.count(); ++q )
        if ( !g.is_interior( q ) )
        {
            EXPECT_EQ( s.u[q], 0.0 );
            EXPECT_EQ( s.v[q], 0.0 );
        }
}

TEST( Step, TimeReversible )
{
    auto m = model_for( 0.1, 4 );
    const auto t = build_table( m );
    m.dt = 0.5 * stable_dt( m, t );
    const auto s0 = make_initial_data( t.grid(), {}, FieldPreset::mode( 0.05 ),
                                       FieldPreset::mode( 0.1, 2, 1 ) );
    VerletIntegrator vv( t, m, {}, m.dt );
    State s = s0;
    for ( int n = 0; n < 200; ++n )
        vv.advance( s );
    for ( auto& v : s.v )
        v = -v;
    for ( int n = 0; n < 200; ++n )
        vv.advance( s );
    const auto& g = t.grid();
    const double base = l2( s0.u, std::vector<double>( g.count(), 0.0 ), g );
    EXPECT_LT( l2( s.u, s0.u, g ) / base, 1e-8 );
}

TEST( Step, BlowUpCarriesStepIndex )
{
    auto m = model_for( 0.1, 4, 10.0 );
    const auto t = build_table( m );
    m.dt = 100 * stable_dt( m, t );
    const auto s0 = make_initial_data( t.grid(), {}, FieldPreset::mode( 0.01 ),
                                       FieldPreset::zero() );
    try
    {
        run( t, m, s0, {} );
        FAIL() << "expected a blow-up";
    }
    catch ( const IntegrationError& e )
    {
        EXPECT_GT( e.step(), 0u );
    }
}

TEST( Run, ZeroFinalTimeGivesInitialRecordOnly )
{
    const auto m = model_for( 0.1, 4, 0.0 );
    const auto t = build_table( m );
    const auto s0 = make_initial_data( t.grid(), {}, FieldPreset::mode( 0.1 ),
                                       FieldPreset::zero() );
    const auto r = run( t, m, s0, {} );
    EXPECT_EQ( r.records.size(), 1u );
    EXPECT_EQ( r.steps, 0u );
    EXPECT_EQ( r.final_state.u, s0.u );
}

TEST( Run, RecordCountFollowsStride )
{
    auto m = model_for( 0.1, 4, 0.3 );
    const auto t = build_table( m );
    m.dt = 0.01;
    const auto s0 = make_initial_data( t.grid(), {}, FieldPreset::mode( 0.1 ),
                                       FieldPreset::zero() );
    for ( std::size_t k : { 1u, 4u, 7u, 30u } )
    {
        RunOptions o;
        o.stride = k;
        std::size_t calls = 0;
        o.observer = [&]( const State&, const EnergyReport&, std::size_t n ) {
            EXPECT_EQ( n % k, 0u );
            ++calls;
        };
        const auto r = run( t, m, s0, {}, o );
        EXPECT_EQ( r.steps, 30u );
        EXPECT_EQ( r.records.size(), 30 / k + 1 );
        EXPECT_EQ( calls, r.records.size() );
    }
}

TEST( Run, CollarStaysPinned )
{
    const auto m = model_for( 0.1, 4, 0.5 );
    const auto t = build_table( m );
    const auto s0 = make_initial_data( t.grid(), {}, FieldPreset::mode( 0.3 ),
                                       FieldPreset::mode( 0.5 ) );
    const auto r = run( t, m, s0, BodyForceSpec{ PresetKind::uniform, 1.0, 0.5 } );
    const auto& g = t.grid();
    for ( std::size_t p = 0; p < g.count(); ++p )
        if ( !g.is_interior( p ) )
        {
            EXPECT_EQ( r.final_state.u[p], 0.0 );
            EXPECT_EQ( r.final_state.v[p], 0.0 );
        }
}

TEST( Run, EnergyDriftIsSecondOrder )
{
    auto m = model_for( 1.0 / 8, 4, 1.0 );
    const auto t = build_table( m );
    const auto s0 = make_initial_data( t.grid(), {}, FieldPreset::mode( 0.2 ),
                                       FieldPreset::zero() );
    const double dt0 = 0.5 * stable_dt( m, t );
    std::vector<double> drift;
    for ( double dt : { dt0, dt0 / 2 } )
    {
        m.dt = dt;
        const auto r = run( t, m, s0, {} );
        drift.push_back( balance_residual( r.records ).max_relative );
    }
    EXPECT_GE( drift[0] / drift[1], 3.5 );
}

TEST( Run, GronwallBoundEnforced )
{
    const auto m = model_for( 0.1, 4, 0.5 );
    const auto t = build_table( m );
    const auto s0 = make_initial_data( t.grid(), {}, FieldPreset::mode( 0.1 ),
                                       FieldPreset::zero() );
    const BodyForceSpec b{ PresetKind::mode, 2.0, 1.0 };
    const auto ok = run( t, m, s0, b );
    EXPECT_GT( ok.max_energy_ratio, 0.0 );
    EXPECT_LE( ok.max_energy_ratio, 1.0 );
    RunOptions tight;
    tight.gronwall_slack = 1e-3;
    EXPECT_THROW( run( t, m, s0, b, tight ), BoundViolation );
}

TEST( Run, LipschitzInTime )
{
    auto m = model_for( 0.1, 4, 0.6 );
    const auto t = build_table( m );
    const auto& g = t.grid();
    const auto s0 = make_initial_data( g, {}, FieldPreset::mode( 0.2 ),
                                       FieldPreset::mode( 0.4, 1, 2 ) );
    std::vector<State> snaps;
    RunOptions o;
    o.stride = 3;
    o.observer = [&]( const State& s, const EnergyReport&, std::size_t ) {
        snaps.push_back( s );
    };
    const auto r = run( t, m, s0, {}, o );
    double kmax = 0.0;
    for ( const auto& e : r.records )
        kmax = std::max( kmax, e.kinetic );
    const double K = std::sqrt( 2 * kmax / m.rho );
    std::mt19937 rng( 1 );
    std::uniform_int_distribution<std::size_t> pick( 0, snaps.size() - 1 );
    for ( int i = 0; i < 40; ++i )
    {
        const auto a = pick( rng ), b = pick( rng );
        if ( a == b )
            continue;
        EXPECT_LE( l2( snaps[a].u, snaps[b].u, g ),
                   K * std::abs( snaps[a].t - snaps[b].t ) * ( 1 + 1e-12 ) );
    }
}
