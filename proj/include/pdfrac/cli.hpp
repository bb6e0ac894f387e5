#ifndef PDFRAC_CLI_HPP
#define PDFRAC_CLI_HPP

#include <pdfrac/config.hpp>
#include <pdfrac/diagnostics.hpp>
#include <pdfrac/dynamics.hpp>
#include <pdfrac/io.hpp>
#include <pdfrac/nucleation.hpp>
#include <pdfrac/reference.hpp>

#include <array>
#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>

namespace pdfrac
{

enum ExitStatus : int
{
    exit_ok = 0,
    exit_validation = 1,
    exit_numerical = 2,
    exit_assertion = 3
};

inline constexpr std::array<std::string_view, 6> subcommands = {
    "run", "calibrate", "nucleate", "sweep", "wave", "gamma" };

struct DispatchOptions
{
    bool grid_summary = false;
};

namespace detail
{
namespace fs = std::filesystem;

inline fs::path prepare_output( const RunConfig& cfg )
{
    const fs::path dir( cfg.out_dir );
    fs::create_directories( dir );
    const auto path = dir / "resolved_config.txt";
    auto f = open_output( path );
    write_resolved_config( f, cfg );
    close_output( f, path );
    return dir;
}

inline int cmd_calibrate( const RunConfig& cfg, std::ostream& out )
{
    prepare_output( cfg );
    const auto c = calibrate( cfg.model.potential, cfg.model.influence );
    out << std::setprecision( 10 ) << "mu = " << c.mu << "\nGc = " << c.Gc
        << "\n";
    out << "rbar = " << inflection_point( cfg.model.potential ) << "\n";
    return exit_ok;
}

inline int cmd_run( const RunConfig& cfg, std::ostream& out )
{
    const auto dir = prepare_output( cfg );
    const NeighborTable table = build_table( cfg.model );
    const auto& g = table.grid();
    const State s0 = make_initial_data( g, cfg.cracks, cfg.u0, cfg.v0 );

    RunOptions opts;
    opts.stride = cfg.stride;
    opts.gronwall_slack = cfg.gronwall_slack;
    if ( cfg.snapshots )
        opts.observer = [&]( const State& s, const EnergyReport&,
                             std::size_t n ) {
            write_snapshot_csv( dir / ( "snap_" + std::to_string( n ) + ".csv" ),
                                s, g );
        };
    RunResult res;
    try
    {
        res = run( table, cfg.model, s0, cfg.body, opts );
    }
    catch ( const IntegrationError& e )
    {
        out << "integration failed at step " << e.step() << "\n";
        throw;
    }
    fill_balance( res.records );
    write_energy_csv( dir / "energy.csv", res.records );
    const auto unstable = unstable_centroids( res.final_state, table, cfg.model );
    write_unstable_csv( dir / unstable_file_name( table.horizon() ), unstable );

    out << std::setprecision( 10 ) << "steps = " << res.steps
        << "\ndt = " << res.dt << "\nrecords = " << res.records.size()
        << "\nfinal_pd = " << res.records.back().pd
        << "\nfinal_kinetic = " << res.records.back().kinetic
        << "\nmax_balance_residual = "
        << ( res.records.size() >= 2
                 ? balance_residual( res.records ).max_relative
                 : 0.0 )
        << "\nmax_energy_ratio = " << res.max_energy_ratio
        << "\nunstable_measure = " << unstable.measure << "\n";
    return exit_ok;
}

inline int cmd_nucleate( const RunConfig& cfg, std::ostream& out )
{
    const auto dir = prepare_output( cfg );
    const NeighborTable table = build_table( cfg.model );
    const auto& g = table.grid();
    const State s = make_initial_data( g, cfg.cracks, cfg.u0, cfg.v0 );
    auto points = cfg.nucleate_points;
    if ( points.empty() )
        points.push_back( { 0.5 * ( g.domain.x0 + g.domain.x1 ),
                            0.5 * ( g.domain.y0 + g.domain.y1 ) } );
    std::vector<NucleationResult> rows;
    for ( const auto& x : points )
    {
        const auto p = g.locate( x );
        if ( p < 0 || !g.is_interior( std::size_t( p ) ) )
            throw ConfigError( "[nucleate] point (" + format_number( x.x ) +
                               ", " + format_number( x.y ) +
                               ") is not inside the domain" );
        rows.push_back( most_unstable_direction( s, table, cfg.model,
                                                 std::size_t( p ),
                                                 cfg.directions ) );
    }
    write_nucleation_csv( dir / "nucleation.csv", rows );
    out << std::setprecision( 10 ) << "x,y,A_star,theta_star,unstable\n";
    for ( const auto& r : rows )
        out << r.point.x << ',' << r.point.y << ',' << r.A_star << ','
            << r.theta_star << ',' << ( r.unstable ? 1 : 0 ) << '\n';
    return exit_ok;
}

inline bool strictly_decreasing( std::span<const double> v )
{
    for ( std::size_t i = 1; i < v.size(); ++i )
        if ( !( v[i] < v[i - 1] ) )
            return false;
    return true;
}

inline int cmd_sweep( const RunConfig& cfg, std::ostream& out )
{
    const auto dir = prepare_output( cfg );
    SweepConfig sc;
    sc.base = cfg.model;
    sc.base.dt = 0.0;
    sc.horizon_ratio = cfg.sweep_ratio;
    sc.horizons = cfg.sweep_horizons;
    sc.u0 = cfg.u0;
    sc.v0 = cfg.v0;
    sc.cracks = cfg.cracks;
    sc.body = cfg.body;
    sc.samples = cfg.samples;
    sc.gronwall_slack = cfg.gronwall_slack;
    sc.compare_reference = cfg.sweep_reference;
    const SweepReport rep = convergence_sweep( sc );

    const auto sp = dir / "sweep_summary.txt";
    auto f = open_output( sp );
    f << "complete = " << ( rep.complete ? "true" : "false" ) << "\n";
    if ( !rep.complete )
        f << "failure = " << rep.failure << "\n";
    std::vector<double> errors;
    double max_u = 0.0;
    for ( const auto& r : rep.runs )
    {
        const auto key = "eps_" + format_number( r.horizon );
        f << key << ".spacing = " << r.spacing << "\n"
          << key << ".dt = " << r.dt << "\n"
          << key << ".steps = " << r.steps << "\n"
          << key << ".sup_error = " << r.sup_error << "\n"
          << key << ".sup_reference_norm = " << r.sup_reference_norm << "\n"
          << key << ".max_abs_u = " << r.max_abs_u << "\n"
          << key << ".max_energy_ratio = " << r.max_energy_ratio << "\n"
          << key << ".max_balance_residual = " << r.max_balance_residual
          << "\n"
          << key << ".frequency = " << r.frequency << "\n"
          << key << ".unstable_measure = " << r.unstable.measure << "\n";
        errors.push_back( r.sup_error );
        max_u = std::max( max_u, r.max_abs_u );
        write_unstable_csv( dir / unstable_file_name( r.horizon ), r.unstable );
    }
    auto verdict = []( bool ok ) { return ok ? "pass" : "fail"; };
    f << "initial_sup = " << rep.initial_sup << "\n"
      << "max_abs_u = " << max_u << "\n"
      << "check.max_abs_u_bounded = "
      << verdict( rep.initial_sup == 0.0 ? max_u == 0.0
                                         : max_u < 10.0 * rep.initial_sup )
      << "\n";
    if ( cfg.sweep_reference && cfg.cracks.empty() && !rep.runs.empty() )
    {
        const auto& last = rep.runs.back();
        const double rel = last.sup_reference_norm > 0.0
                               ? last.sup_error / last.sup_reference_norm
                               : last.sup_error;
        f << "final_relative_error = " << rel << "\n"
          << "check.errors_decreasing = "
          << verdict( rep.initial_sup == 0.0 || strictly_decreasing( errors ) )
          << "\n"
          << "check.final_error_below_5pct = " << verdict( rel < 0.05 ) << "\n";
        if ( cfg.u0.kind == PresetKind::mode && cfg.v0.kind == PresetKind::zero &&
             cfg.body.is_zero() )
        {
            const auto cal = calibrate( cfg.model.potential, cfg.model.influence );
            const double omega = std::sqrt( 2.0 * cal.mu / cfg.model.rho ) *
                                 std::sqrt( cfg.u0.laplacian_eigenvalue(
                                     cfg.model.domain.domain ) );
            const double rf = std::abs( last.frequency - omega ) / omega;
            f << "expected_frequency = " << omega << "\n"
              << "frequency_relative_error = " << rf << "\n"
              << "check.frequency_within_3pct = " << verdict( rf < 0.03 )
              << "\n";
        }
    }
    if ( rep.runs.size() >= 3 )
    {
        std::vector<UnstableReport> reports;
        for ( const auto& r : rep.runs )
            reports.push_back( r.unstable );
        auto deltas = cfg.deltas;
        if ( deltas.empty() )
            for ( double e : cfg.sweep_horizons )
                deltas.push_back( 2.0 * e );
        std::sort( deltas.begin(), deltas.end() );
        const auto conc = concentration_measure( reports, deltas );
        write_concentration_csv( dir / "concentration.csv", conc );
        bool nested = true;
        for ( std::size_t i = 1; i < conc.sets.size(); ++i )
            nested = nested && std::includes( conc.sets[i].begin(),
                                              conc.sets[i].end(),
                                              conc.sets[i - 1].begin(),
                                              conc.sets[i - 1].end() );
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for ( std::size_t i = 0; i < conc.deltas.size(); ++i )
            if ( conc.measures[i] > 0.0 )
            {
                const double q = conc.measures[i] / std::sqrt( conc.deltas[i] );
                lo = std::min( lo, q );
                hi = std::max( hi, q );
            }
        f << "check.concentration_nested = " << verdict( nested ) << "\n";
        if ( hi > 0.0 )
            f << "concentration_ratio_spread = " << hi / lo << "\n";
        if ( conc.exponent )
            f << "concentration_exponent = " << *conc.exponent << "\n";
    }
    close_output( f, sp );
    out << "sweep summary written to " << sp.string() << "\n";
    if ( !rep.complete )
    {
        out << "sweep incomplete: " << rep.failure << "\n";
        return rep.failure_status;
    }
    return exit_ok;
}

inline int cmd_wave( const RunConfig& cfg, std::ostream& out )
{
    const auto dir = prepare_output( cfg );
    WaveConfig w;
    w.rho = cfg.model.rho;
    w.mu = calibrate( cfg.model.potential, cfg.model.influence ).mu;
    w.domain = cfg.model.domain.domain;
    w.spacing = cfg.wave_spacing;
    w.dt = cfg.wave_dt;
    w.T = cfg.model.T;
    w.u0 = cfg.u0;
    w.v0 = cfg.v0;
    w.body = cfg.body;
    const auto traj = wave_solve( w, cfg.samples );
    const auto& last = traj.samples.back();
    const auto path = dir / "wave_final.csv";
    auto f = open_output( path );
    f << "x,y,u\n";
    for ( long i = 0; i <= last.nx; ++i )
        for ( long j = 0; j <= last.ny; ++j )
            f << w.domain.x0 + double( i ) * w.spacing << ','
              << w.domain.y0 + double( j ) * w.spacing << ',' << last.at( i, j )
              << '\n';
    close_output( f, path );
    out << std::setprecision( 10 ) << "steps = " << traj.steps
        << "\ndt = " << traj.dt << "\nwave_speed = " << w.wave_speed() << "\n";
    if ( cfg.u0.kind == PresetKind::mode && cfg.v0.kind == PresetKind::zero &&
         cfg.body.is_zero() )
    {
        const double omega =
            w.wave_speed() * std::sqrt( cfg.u0.laplacian_eigenvalue( w.domain ) );
        double err = 0.0;
        for ( long i = 0; i <= last.nx; ++i )
            for ( long j = 0; j <= last.ny; ++j )
            {
                const Vec2 x{ w.domain.x0 + double( i ) * w.spacing,
                              w.domain.y0 + double( j ) * w.spacing };
                err = std::max( err, std::abs( last.at( i, j ) -
                                               cfg.u0.value( x, w.domain ) *
                                                   std::cos( omega * last.t ) ) );
            }
        out << "omega = " << omega << "\nmax_error_vs_closed_form = " << err
            << "\n";
    }
    return exit_ok;
}

inline int cmd_gamma( const RunConfig& cfg, std::ostream& out )
{
    const auto dir = prepare_output( cfg );
    if ( cfg.gamma_horizons.empty() )
        throw ConfigError( "[gamma] horizons must list at least one value" );
    const auto rows = gamma_limit_check( { cfg.u0, cfg.cracks },
                                         cfg.gamma_horizons, cfg.model,
                                         cfg.gamma_ratio );
    write_gamma_csv( dir / "gamma.csv", rows );
    out << std::setprecision( 10 ) << "eps,h,pd,target,rel_error\n";
    for ( const auto& r : rows )
        out << r.horizon << ',' << r.spacing << ',' << r.pd << ',' << r.target
            << ',' << r.relative_error << '\n';
    return exit_ok;
}
} // namespace detail

// Runs one subcommand and maps failures onto exit statuses.
inline int dispatch( std::string_view subcommand, const RunConfig& cfg,
                     std::ostream& out, std::ostream& err,
                     const DispatchOptions& options = {} )
{
    try
    {
        if ( options.grid_summary )
            write_summary( out, build_table( cfg.model ) );
        if ( subcommand == "run" )
            return detail::cmd_run( cfg, out );
        if ( subcommand == "calibrate" )
            return detail::cmd_calibrate( cfg, out );
        if ( subcommand == "nucleate" )
            return detail::cmd_nucleate( cfg, out );
        if ( subcommand == "sweep" )
            return detail::cmd_sweep( cfg, out );
        if ( subcommand == "wave" )
            return detail::cmd_wave( cfg, out );
        if ( subcommand == "gamma" )
            return detail::cmd_gamma( cfg, out );
        err << "unknown subcommand '" << subcommand << "'\n";
        return exit_validation;
    }
    catch ( const BoundViolation& e )
    {
        err << "assertion failed: " << e.what() << "\n";
        return exit_assertion;
    }
    catch ( const NumericError& e )
    {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
    catch ( const std::exception& e )
    {
        err << "error: " << e.what() << "\n";
        return exit_validation;
    }
}

} // namespace pdfrac

#endif
