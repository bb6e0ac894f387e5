#ifndef PDFRAC_REFERENCE_HPP
#define PDFRAC_REFERENCE_HPP

#include <pdfrac/common.hpp>
#include <pdfrac/diagnostics.hpp>
#include <pdfrac/dynamics.hpp>
#include <pdfrac/fields.hpp>
#include <pdfrac/kernels.hpp>
#include <pdfrac/lattice.hpp>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace pdfrac
{

/******************************************************************************
  Local wave equation rho u_tt = 2 mu lap u + b, u = 0 on the boundary of D,
  five-point leapfrog on the nodes x0 + (i, j) h.
******************************************************************************/
struct WaveConfig
{
    double rho = 1.0;
    double mu = 1.0;
    Rect domain;
    double spacing = 0.0;
    // 0 selects half the CFL limit.
    double dt = 0.0;
    double T = 1.0;
    FieldPreset u0;
    FieldPreset v0;
    BodyForceSpec body;

    double wave_speed() const { return std::sqrt( 2.0 * mu / rho ); }
    double cfl_limit() const
    {
        return spacing / ( wave_speed() * std::sqrt( 2.0 ) );
    }
    double resolved_dt() const { return dt > 0.0 ? dt : 0.5 * cfl_limit(); }

    void validate() const
    {
        if ( !( rho > 0.0 ) || !( mu > 0.0 ) )
            throw ConfigError( "wave solver needs rho > 0 and mu > 0" );
        if ( !( spacing > 0.0 ) || !( T >= 0.0 ) || !( dt >= 0.0 ) )
            throw ConfigError( "wave solver needs spacing > 0, T >= 0, dt >= 0" );
        const double nx = domain.width() / spacing;
        const double ny = domain.height() / spacing;
        if ( std::abs( nx - std::round( nx ) ) > 1e-9 * nx ||
             std::abs( ny - std::round( ny ) ) > 1e-9 * ny || nx < 2 || ny < 2 )
            throw ConfigError( "reference spacing must divide the domain" );
        if ( resolved_dt() > cfl_limit() * ( 1.0 + 1e-12 ) )
            throw ConfigError( "reference time step violates the CFL limit " +
                               std::to_string( cfl_limit() ) );
    }
};

// Nodal field on the reference grid.
struct WaveField
{
    double t = 0.0;
    Rect domain;
    double spacing = 0.0;
    long nx = 0;
    long ny = 0;
    std::vector<double> values;

    double at( long i, long j ) const
    {
        return values[std::size_t( i * ( ny + 1 ) + j )];
    }

    // Bilinear interpolation, zero outside D.
    double sample( Vec2 x ) const
    {
        if ( !domain.contains( x ) )
            return 0.0;
        const double s = ( x.x - domain.x0 ) / spacing;
        const double r = ( x.y - domain.y0 ) / spacing;
        const long i = std::clamp( long( std::floor( s ) ), 0L, nx - 1 );
        const long j = std::clamp( long( std::floor( r ) ), 0L, ny - 1 );
        const double a = s - double( i );
        const double b = r - double( j );
        return ( 1 - a ) * ( 1 - b ) * at( i, j ) + a * ( 1 - b ) * at( i + 1, j ) +
               ( 1 - a ) * b * at( i, j + 1 ) + a * b * at( i + 1, j + 1 );
    }
};

struct WaveTrajectory
{
    double dt = 0.0;
    std::size_t steps = 0;
    std::vector<WaveField> samples;
};

// Samples are taken at n_samples + 1 equispaced times 0, T/n, ..., T; the
// step count is rounded up to a multiple of n_samples so they are exact.
inline WaveTrajectory wave_solve( const WaveConfig& cfg, int n_samples = 10 )
{
    cfg.validate();
    if ( n_samples < 1 )
        throw ConfigError( "wave_solve needs at least one sample interval" );
    const long nx = std::lround( cfg.domain.width() / cfg.spacing );
    const long ny = std::lround( cfg.domain.height() / cfg.spacing );
    const double h = cfg.spacing;
    const auto n_per = static_cast<std::size_t>(
        cfg.T > 0.0 ? std::ceil( cfg.T / ( n_samples * cfg.resolved_dt() ) -
                                 1e-9 )
                    : 0.0 );
    WaveTrajectory traj;
    traj.steps = n_per * std::size_t( n_samples );
    traj.dt = traj.steps > 0 ? cfg.T / double( traj.steps ) : cfg.resolved_dt();
    const double dt = traj.dt;

    const std::size_t stride = std::size_t( ny + 1 );
    const std::size_t n = std::size_t( nx + 1 ) * stride;
    std::vector<double> prev( n, 0.0 ), cur( n, 0.0 ), next( n, 0.0 ),
        vel( n, 0.0 ), shape( n, 0.0 );
    auto node = [&]( long i, long j ) {
        return Vec2{ cfg.domain.x0 + double( i ) * h,
                     cfg.domain.y0 + double( j ) * h };
    };
    for ( long i = 1; i < nx; ++i )
        for ( long j = 1; j < ny; ++j )
        {
            const auto id = std::size_t( i ) * stride + std::size_t( j );
            cur[id] = cfg.u0.value( node( i, j ), cfg.domain );
            vel[id] = cfg.v0.value( node( i, j ), cfg.domain );
            if ( !cfg.body.is_zero() )
                shape[id] = cfg.body.shape( node( i, j ), cfg.domain );
        }
    const double coef = 2.0 * cfg.mu / ( cfg.rho * h * h );
    auto accel = [&]( const std::vector<double>& u, std::size_t id,
                      double t ) {
        const double lap = u[id + stride] + u[id - stride] + u[id + 1] +
                           u[id - 1] - 4.0 * u[id];
        const double b = cfg.body.is_zero()
                             ? 0.0
                             : cfg.body.amplitude * ( 1.0 + cfg.body.ramp * t ) *
                                   shape[id];
        return coef * lap + b / cfg.rho;
    };
    auto record = [&]( const std::vector<double>& u, double t ) {
        traj.samples.push_back( { t, cfg.domain, h, nx, ny, u } );
    };

    record( cur, 0.0 );
    if ( traj.steps == 0 )
        return traj;
    for ( long i = 1; i < nx; ++i )
        for ( long j = 1; j < ny; ++j )
        {
            const auto id = std::size_t( i ) * stride + std::size_t( j );
            next[id] = cur[id] + dt * vel[id] + 0.5 * dt * dt * accel( cur, id, 0.0 );
        }
    std::swap( prev, cur );
    std::swap( cur, next );
    for ( std::size_t s = 1;; ++s )
    {
        const double t = double( s ) * dt;
        if ( s % n_per == 0 )
            record( cur, s == traj.steps ? cfg.T : t );
        if ( s == traj.steps )
            break;
        for ( long i = 1; i < nx; ++i )
            for ( long j = 1; j < ny; ++j )
            {
                const auto id = std::size_t( i ) * stride + std::size_t( j );
                next[id] = 2.0 * cur[id] - prev[id] + dt * dt * accel( cur, id, t );
            }
        std::swap( prev, cur );
        std::swap( cur, next );
    }
    if ( !all_finite( traj.samples.back().values ) )
        throw NumericError( "reference solution is not finite" );
    return traj;
}

/******************************************************************************
  L2(D) distance between a particle field and a reference sample.
******************************************************************************/
inline double field_error( const State& state, const WaveField& ref,
                           const ParticleGrid& grid, double dt )
{
    if ( std::abs( state.t - ref.t ) > 0.5 * dt )
        throw ConfigError( "field_error: state at t = " +
                           std::to_string( state.t ) +
                           " compared with reference at t = " +
                           std::to_string( ref.t ) );
    return std::sqrt( detail::cell_sum( grid, [&]( auto p ) {
        const double d = state.u[p] - ref.sample( grid.positions[p] );
        return d * d;
    } ) );
}

inline double field_norm( const WaveField& ref, const ParticleGrid& grid )
{
    return std::sqrt( detail::cell_sum( grid, [&]( auto p ) {
        const double v = ref.sample( grid.positions[p] );
        return v * v;
    } ) );
}

/******************************************************************************
  Horizon sweep at fixed horizon/spacing ratio.
******************************************************************************/
struct SweepConfig
{
    // domain.horizon and domain.spacing are replaced per run.
    ModelSpec base;
    double horizon_ratio = 4.0;
    std::vector<double> horizons;
    FieldPreset u0;
    FieldPreset v0;
    std::vector<CrackSegment> cracks;
    BodyForceSpec body;
    int samples = 10;
    double gronwall_slack = 2.0;
    // Compare with the local wave solution (uncracked data only).
    bool compare_reference = true;
};

struct SweepRun
{
    double horizon = 0.0;
    double spacing = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;
    // Per sample time.
    std::vector<double> times;
    std::vector<double> errors;
    std::vector<double> reference_norms;
    double sup_error = 0.0;
    double sup_reference_norm = 0.0;
    double max_abs_u = 0.0;
    double max_energy_ratio = 0.0;
    double max_balance_residual = 0.0;
    // Angular frequency from the first zero of the projection onto u0,
    // NaN when there is none.
    double frequency = std::numeric_limits<double>::quiet_NaN();
    std::vector<EnergyReport> energies;
    UnstableReport unstable;
};

struct SweepReport
{
    std::vector<SweepRun> runs;
    double initial_sup = 0.0;
    double reference_dt = 0.0;
    double reference_spacing = 0.0;
    bool complete = true;
    std::string failure;
    // Exit status the failure maps to: 2 numerical, 3 bound violation.
    int failure_status = 0;

    std::vector<double> horizons() const
    {
        std::vector<double> e;
        for ( const auto& r : runs )
            e.push_back( r.horizon );
        return e;
    }
};

namespace detail
{
inline double mode_projection( const State& s, const ParticleGrid& g,
                               std::span<const double> mode, double mode_norm2 )
{
    return cell_sum( g, [&]( auto p ) { return s.u[p] * mode[p]; } ) /
           mode_norm2;
}
} // namespace detail

inline SweepReport convergence_sweep( const SweepConfig& cfg )
{
    if ( cfg.horizons.size() < 3 )
        throw ConfigError( "sweep needs at least three horizons" );
    for ( std::size_t i = 1; i < cfg.horizons.size(); ++i )
        if ( !( cfg.horizons[i] < cfg.horizons[i - 1] ) )
            throw ConfigError( "sweep horizons must be strictly decreasing" );
    if ( cfg.samples < 1 )
        throw ConfigError( "sweep needs at least one sample interval" );

    SweepReport report;
    const bool with_reference = cfg.compare_reference && cfg.cracks.empty();
    const Calibration cal =
        calibrate( cfg.base.potential, cfg.base.influence );

    WaveTrajectory ref;
    if ( with_reference )
    {
        WaveConfig w;
        w.rho = cfg.base.rho;
        w.mu = cal.mu;
        w.domain = cfg.base.domain.domain;
        w.spacing = 0.5 * cfg.horizons.back() / cfg.horizon_ratio;
        w.T = cfg.base.T;
        w.u0 = cfg.u0;
        w.v0 = cfg.v0;
        w.body = cfg.body;
        ref = wave_solve( w, cfg.samples );
        report.reference_dt = ref.dt;
        report.reference_spacing = w.spacing;
    }

    for ( double eps : cfg.horizons )
    {
        SweepRun run_out;
        run_out.horizon = eps;
        try
        {
            ModelSpec model = cfg.base;
            model.domain.horizon = eps;
            model.domain.spacing = eps / cfg.horizon_ratio;
            model.domain.collar_width = 0.0;
            const NeighborTable table = build_table( model );
            const auto& g = table.grid();
            run_out.spacing = g.spacing;

            // Step count is a multiple of the sample count so that samples
            // fall exactly on steps.
            const double dt0 = resolved_dt( model, table );
            const auto per = static_cast<std::size_t>( std::max(
                1.0, std::ceil( model.T / ( cfg.samples * dt0 ) - 1e-9 ) ) );
            if ( model.T > 0.0 )
                model.dt = model.T / double( per * std::size_t( cfg.samples ) );
            else
                model.dt = dt0;

            State s0 = make_initial_data( g, cfg.cracks, cfg.u0, cfg.v0 );
            report.initial_sup = std::max( report.initial_sup, max_abs( s0.u ) );

            std::vector<double> mode( g.count(), 0.0 );
            double mode_norm2 = 0.0;
            if ( cfg.u0.kind == PresetKind::mode )
            {
                for ( auto p : g.interior )
                    mode[p] = cfg.u0.value( g.positions[p], g.domain );
                mode_norm2 = detail::cell_sum( g, [&]( auto p ) {
                    return mode[p] * mode[p];
                } );
            }
            double prev_a = 0.0, prev_t = 0.0;
            bool have_prev = false;

            RunOptions opts;
            opts.stride = 1;
            opts.gronwall_slack = cfg.gronwall_slack;
            std::size_t sample_index = 0;
            opts.observer = [&]( const State& s, const EnergyReport& e,
                                 std::size_t n ) {
                if ( mode_norm2 > 0.0 && std::isnan( run_out.frequency ) )
                {
                    const double a =
                        detail::mode_projection( s, g, mode, mode_norm2 );
                    if ( have_prev && prev_a > 0.0 && a <= 0.0 )
                    {
                        const double tz =
                            prev_t + ( s.t - prev_t ) * prev_a / ( prev_a - a );
                        run_out.frequency = 0.5 * pi / tz;
                    }
                    prev_a = a;
                    prev_t = s.t;
                    have_prev = true;
                }
                if ( n % per != 0 )
                    return;
                run_out.energies.push_back( e );
                run_out.times.push_back( s.t );
                if ( with_reference )
                {
                    const auto& sample = ref.samples.at( sample_index );
                    const double err = field_error( s, sample, g, model.dt );
                    const double nrm = field_norm( sample, g );
                    run_out.errors.push_back( err );
                    run_out.reference_norms.push_back( nrm );
                    run_out.sup_error = std::max( run_out.sup_error, err );
                    run_out.sup_reference_norm =
                        std::max( run_out.sup_reference_norm, nrm );
                }
                ++sample_index;
            };
            const RunResult res = run( table, model, s0, cfg.body, opts );
            run_out.dt = res.dt;
            run_out.steps = res.steps;
            run_out.max_abs_u = res.max_abs_u;
            run_out.max_energy_ratio = res.max_energy_ratio;
            fill_balance( run_out.energies );
            if ( run_out.energies.size() >= 2 )
                run_out.max_balance_residual =
                    balance_residual( run_out.energies ).max_relative;
            run_out.unstable =
                unstable_centroids( res.final_state, table, model );
            report.runs.push_back( std::move( run_out ) );
        }
        catch ( const BoundViolation& e )
        {
            report.complete = false;
            report.failure = e.what();
            report.failure_status = 3;
            return report;
        }
        catch ( const NumericError& e )
        {
            report.complete = false;
            report.failure = e.what();
            report.failure_status = 2;
            return report;
        }
    }
    return report;
}

/******************************************************************************
  Strain energy of a fixed field against its LEFM energy, per horizon.
******************************************************************************/
struct GammaField
{
    FieldPreset smooth;
    std::vector<CrackSegment> cracks;
};

struct GammaRow
{
    double horizon = 0.0;
    double spacing = 0.0;
    double pd = 0.0;
    double target = 0.0;
    double relative_error = 0.0;
};

inline std::vector<GammaRow> gamma_limit_check( const GammaField& field,
                                                std::span<const double> horizons,
                                                const ModelSpec& base,
                                                double horizon_ratio )
{
    const Calibration cal = calibrate( base.potential, base.influence );
    const auto jumps = jump_curves( field.cracks );
    std::vector<GammaRow> rows;
    for ( double eps : horizons )
    {
        ModelSpec model = base;
        model.domain.horizon = eps;
        model.domain.spacing = eps / horizon_ratio;
        model.domain.collar_width = 0.0;
        const NeighborTable table = build_table( model );
        const auto& g = table.grid();
        const State s = make_initial_data( g, field.cracks, field.smooth,
                                           FieldPreset::zero() );
        GammaRow row;
        row.horizon = eps;
        row.spacing = g.spacing;
        row.pd = strain_energy( s.u, table, model );
        std::function<Vec2( Vec2 )> grad;
        if ( field.smooth.kind == PresetKind::mode )
            grad = [&]( Vec2 x ) { return field.smooth.gradient( x, g.domain ); };
        row.target = lefm_energy( g, grad, jumps, cal.mu, cal.Gc ).total;
        row.relative_error =
            row.target != 0.0 ? ( row.pd - row.target ) / row.target : row.pd;
        rows.push_back( row );
    }
    return rows;
}

} // namespace pdfrac

#endif
