#ifndef PDFRAC_IO_HPP
#define PDFRAC_IO_HPP

#include <pdfrac/diagnostics.hpp>
#include <pdfrac/dynamics.hpp>
#include <pdfrac/nucleation.hpp>
#include <pdfrac/reference.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

namespace pdfrac
{

/******************************************************************************
  Text outputs. Every file starts with a header row; numbers are written with
  17 significant digits so that they round-trip exactly.

    energy.csv          t,kinetic,pd,work,epd,residual
    snap_<step>.csv     x,y,u,v
    unstable_<eps>.csv  t,eps,x,y,P
    concentration.csv   delta,measure  (+ one "# fit" summary line)
    nucleation.csv      x,y,A_star,theta_star,unstable
    gamma.csv           eps,h,pd,target,rel_error
******************************************************************************/
inline std::string format_number( double v )
{
    std::ostringstream os;
    os << std::setprecision( 17 ) << v;
    return os.str();
}

inline std::ofstream open_output( const std::filesystem::path& path )
{
    std::ofstream f( path );
    if ( !f )
        throw std::runtime_error( "cannot open " + path.string() +
                                  " for writing" );
    f << std::setprecision( 17 );
    return f;
}

inline void close_output( std::ofstream& f, const std::filesystem::path& path )
{
    f.close();
    if ( !f )
        throw std::runtime_error( "write to " + path.string() + " failed" );
}

inline void write_energy_csv( const std::filesystem::path& path,
                              std::span<const EnergyReport> records )
{
    auto f = open_output( path );
    f << "t,kinetic,pd,work,epd,residual\n";
    for ( const auto& r : records )
        f << r.t << ',' << r.kinetic << ',' << r.pd << ',' << r.work << ','
          << r.epd << ',' << r.balance_residual << '\n';
    close_output( f, path );
}

inline void write_snapshot_csv( const std::filesystem::path& path,
                                const State& s, const ParticleGrid& g )
{
    auto f = open_output( path );
    f << "x,y,u,v\n";
    for ( std::size_t p = 0; p < g.count(); ++p )
        f << g.positions[p].x << ',' << g.positions[p].y << ',' << s.u[p] << ','
          << s.v[p] << '\n';
    close_output( f, path );
}

inline std::string unstable_file_name( double eps )
{
    return "unstable_" + format_number( eps ) + ".csv";
}

inline void write_unstable_csv( const std::filesystem::path& path,
                                const UnstableReport& r )
{
    auto f = open_output( path );
    f << "t,eps,x,y,P\n";
    for ( std::size_t i = 0; i < r.centroids.size(); ++i )
        f << r.t << ',' << r.horizon << ',' << r.centroid_positions[i].x << ','
          << r.centroid_positions[i].y << ',' << r.centroid_fractions[i] << '\n';
    close_output( f, path );
}

inline void write_concentration_csv( const std::filesystem::path& path,
                                     const ConcentrationReport& c )
{
    auto f = open_output( path );
    f << "delta,measure\n";
    for ( std::size_t i = 0; i < c.deltas.size(); ++i )
        f << c.deltas[i] << ',' << c.measures[i] << '\n';
    if ( c.exponent )
        f << "# fit exponent " << *c.exponent << " prefactor " << *c.prefactor
          << '\n';
    else
        f << "# fit unavailable\n";
    close_output( f, path );
}

inline void write_nucleation_csv( const std::filesystem::path& path,
                                  std::span<const NucleationResult> rows )
{
    auto f = open_output( path );
    f << "x,y,A_star,theta_star,unstable\n";
    for ( const auto& r : rows )
        f << r.point.x << ',' << r.point.y << ',' << r.A_star << ','
          << r.theta_star << ',' << ( r.unstable ? 1 : 0 ) << '\n';
    close_output( f, path );
}

inline void write_gamma_csv( const std::filesystem::path& path,
                             std::span<const GammaRow> rows )
{
    auto f = open_output( path );
    f << "eps,h,pd,target,rel_error\n";
    for ( const auto& r : rows )
        f << r.horizon << ',' << r.spacing << ',' << r.pd << ',' << r.target
          << ',' << r.relative_error << '\n';
    close_output( f, path );
}

} // namespace pdfrac

#endif
