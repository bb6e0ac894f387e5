#ifndef PDFRAC_DIAGNOSTICS_HPP
#define PDFRAC_DIAGNOSTICS_HPP

#include <pdfrac/common.hpp>
#include <pdfrac/dynamics.hpp>
#include <pdfrac/fields.hpp>
#include <pdfrac/kernels.hpp>
#include <pdfrac/lattice.hpp>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace pdfrac
{

/******************************************************************************
  Energies
******************************************************************************/
inline EnergyReport energy_report( const State& state,
                                   const NeighborTable& table,
                                   const ModelSpec& model,
                                   const BodyForceSpec& b )
{
    check_state( state, table );
    const auto& g = table.grid();
    const auto shape = sample_shape( b, g );
    const double factor =
        b.is_zero() ? 0.0 : b.amplitude * ( 1.0 + b.ramp * state.t );
    const double rate = b.is_zero() ? 0.0 : b.amplitude * b.ramp;
    return detail::make_report( state, g, model.rho,
                                strain_energy( state.u, table, model ), shape,
                                factor, rate );
}

struct BalanceSeries
{
    std::vector<double> raw;
    std::vector<double> relative;
    double max_relative = 0.0;
};

// residual(t) = EPD(t) - EPD(0) + int_0^t int_D b_t u, trapezoid in time.
inline BalanceSeries balance_residual( std::span<const EnergyReport> records )
{
    if ( records.size() < 2 )
        throw ConfigError( "balance_residual needs at least two records" );
    BalanceSeries out;
    const double scale = std::max( std::abs( records.front().epd ), DBL_EPSILON );
    double integral = 0.0;
    for ( std::size_t i = 0; i < records.size(); ++i )
    {
        if ( i > 0 )
            integral += 0.5 * ( records[i].t - records[i - 1].t ) *
                        ( records[i].work_rate + records[i - 1].work_rate );
        const double r = records[i].epd - records.front().epd + integral;
        out.raw.push_back( r );
        out.relative.push_back( r / scale );
        out.max_relative = std::max( out.max_relative, std::abs( r ) / scale );
    }
    return out;
}

inline void fill_balance( std::vector<EnergyReport>& records )
{
    if ( records.size() < 2 )
        return;
    const auto series = balance_residual( records );
    for ( std::size_t i = 0; i < records.size(); ++i )
        records[i].balance_residual = series.raw[i];
}

/******************************************************************************
  Weighted fraction of unstable bonds

    P(x) = (1 / (eps^2 m)) sum_y h^2 chi(y) (|y - x| / eps) J(|y - x| / eps)

  with m the discrete normalization, so that P = 1 when every bond counts.
******************************************************************************/
template <class BondPredicate>
double weighted_fraction( const NeighborTable& table, std::size_t p,
                          BondPredicate&& counts )
{
    if ( !table.grid().is_interior( p ) )
        throw ConfigError( "fractions are defined at interior particles only" );
    const double eps = table.horizon();
    const double w = table.weight() / ( eps * eps );
    std::vector<double> terms;
    terms.reserve( table.stencil().size() );
    for ( std::size_t k = 0; k < table.stencil().size(); ++k )
    {
        const auto& b = table.stencil()[k];
        if ( counts( k, static_cast<std::size_t>( table.neighbor( p, k ) ) ) )
            terms.push_back( w * b.xi_norm * b.influence );
    }
    return pairwise_sum( terms ) / table.m_discrete();
}

inline double unstable_fraction( const State& state, const NeighborTable& table,
                                 const ModelSpec& model, std::size_t p )
{
    const double rbar = inflection_point( model.potential );
    const double eps = table.horizon();
    return weighted_fraction( table, p, [&]( std::size_t k, std::size_t q ) {
        const double bar =
            std::sqrt( eps * table.stencil()[k].xi_norm ) * rbar;
        return std::abs( state.u[q] - state.u[p] ) > bar;
    } );
}

struct UnstableReport
{
    double t = 0.0;
    double horizon = 0.0;
    double spacing = 0.0;
    Rect domain;
    // P at every interior particle, in grid.interior order.
    std::vector<double> fractions;
    std::vector<std::int32_t> centroids;
    std::vector<Vec2> centroid_positions;
    std::vector<double> centroid_fractions;
    double measure = 0.0;
};

inline UnstableReport unstable_centroids( const State& state,
                                          const NeighborTable& table,
                                          const ModelSpec& model )
{
    check_state( state, table );
    const auto& g = table.grid();
    UnstableReport r;
    r.t = state.t;
    r.horizon = table.horizon();
    r.spacing = g.spacing;
    r.domain = g.domain;
    r.fractions.resize( g.interior.size() );
    parallel_for( g.interior.size(), [&]( std::size_t i ) {
        r.fractions[i] =
            unstable_fraction( state, table, model, std::size_t( g.interior[i] ) );
    } );
    const double threshold = std::sqrt( r.horizon );
    for ( std::size_t i = 0; i < g.interior.size(); ++i )
        if ( r.fractions[i] > threshold )
        {
            const auto p = g.interior[i];
            r.centroids.push_back( p );
            r.centroid_positions.push_back( g.positions[p] );
            r.centroid_fractions.push_back( r.fractions[i] );
        }
    r.measure = g.cell_area() * double( r.centroids.size() );
    return r;
}

/******************************************************************************
  Concentration sets C_delta = union of U_eps over eps < delta, rasterized
  onto the cells of D at the finest spacing in the sweep.
******************************************************************************/
struct ConcentrationReport
{
    std::vector<double> deltas;
    std::vector<double> measures;
    // Finest-grid cell ids (i * ny + j) of every C_delta, sorted.
    std::vector<std::vector<std::int64_t>> sets;
    double fine_spacing = 0.0;
    std::optional<double> exponent;
    std::optional<double> prefactor;
};

namespace detail
{
inline std::vector<std::int64_t> rasterize( const UnstableReport& r,
                                            const Rect& d, double hf, long nx,
                                            long ny )
{
    std::vector<std::int64_t> cells;
    const double half = 0.5 * r.spacing;
    for ( const auto& c : r.centroid_positions )
    {
        // fine centres x0 + (i + 1/2) hf strictly inside the coarse cell
        const auto lo = [&]( double v, double o ) {
            return static_cast<long>(
                std::floor( ( v - half - o ) / hf - 0.5 ) + 1 );
        };
        const auto hi = [&]( double v, double o ) {
            return static_cast<long>(
                std::ceil( ( v + half - o ) / hf - 0.5 ) - 1 );
        };
        for ( long i = std::max( 0L, lo( c.x, d.x0 ) );
              i <= std::min( nx - 1, hi( c.x, d.x0 ) ); ++i )
            for ( long j = std::max( 0L, lo( c.y, d.y0 ) );
                  j <= std::min( ny - 1, hi( c.y, d.y0 ) ); ++j )
                cells.push_back( std::int64_t( i ) * ny + j );
    }
    std::sort( cells.begin(), cells.end() );
    cells.erase( std::unique( cells.begin(), cells.end() ), cells.end() );
    return cells;
}
} // namespace detail

inline ConcentrationReport
concentration_measure( std::span<const UnstableReport> sweep,
                       std::span<const double> deltas )
{
    if ( sweep.empty() )
        throw ConfigError( "concentration_measure needs at least one report" );
    const double max_delta =
        deltas.empty() ? 0.0 : *std::max_element( deltas.begin(), deltas.end() );
    std::vector<double> distinct;
    for ( const auto& r : sweep )
        if ( r.horizon < max_delta )
            distinct.push_back( r.horizon );
    std::sort( distinct.begin(), distinct.end() );
    distinct.erase( std::unique( distinct.begin(), distinct.end() ),
                    distinct.end() );
    if ( distinct.size() < 3 )
        throw ConfigError( "concentration_measure needs at least three "
                           "horizons below the largest delta" );

    const Rect d = sweep.front().domain;
    double hf = sweep.front().spacing;
    for ( const auto& r : sweep )
        hf = std::min( hf, r.spacing );
    const long nx = std::lround( d.width() / hf );
    const long ny = std::lround( d.height() / hf );

    std::vector<std::vector<std::int64_t>> raster;
    for ( const auto& r : sweep )
        raster.push_back( detail::rasterize( r, d, hf, nx, ny ) );

    ConcentrationReport out;
    out.fine_spacing = hf;
    std::vector<double> lx, ly;
    for ( double delta : deltas )
    {
        std::vector<std::int64_t> set;
        for ( std::size_t j = 0; j < sweep.size(); ++j )
            if ( sweep[j].horizon < delta )
            {
                std::vector<std::int64_t> merged;
                std::set_union( set.begin(), set.end(), raster[j].begin(),
                                raster[j].end(), std::back_inserter( merged ) );
                set = std::move( merged );
            }
        const double m = hf * hf * double( set.size() );
        out.deltas.push_back( delta );
        out.measures.push_back( m );
        out.sets.push_back( std::move( set ) );
        if ( m > 0.0 )
        {
            lx.push_back( std::log( delta ) );
            ly.push_back( std::log( m ) );
        }
    }
    if ( lx.size() >= 2 )
    {
        const double n = double( lx.size() );
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for ( std::size_t i = 0; i < lx.size(); ++i )
        {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double den = n * sxx - sx * sx;
        if ( den > 0.0 )
        {
            const double slope = ( n * sxy - sx * sy ) / den;
            out.exponent = slope;
            out.prefactor = std::exp( ( sy - slope * sx ) / n );
        }
    }
    return out;
}

/******************************************************************************
  LEFM energy mu int_D |grad u|^2 + Gc H^1(jump set).
******************************************************************************/
namespace detail
{
inline bool segments_overlap( const Segment& s, const Segment& t )
{
    const Vec2 d = s.b - s.a;
    const double len = norm( d );
    const double tol = 1e-12 * std::max( { 1.0, len, t.length() } );
    const auto cross = []( Vec2 a, Vec2 b ) { return a.x * b.y - a.y * b.x; };
    if ( std::abs( cross( d, t.a - s.a ) ) > tol * len ||
         std::abs( cross( d, t.b - s.a ) ) > tol * len )
        return false;
    const double ta = dot( t.a - s.a, d ) / len;
    const double tb = dot( t.b - s.a, d ) / len;
    const double lo = std::max( 0.0, std::min( ta, tb ) );
    const double hi = std::min( len, std::max( ta, tb ) );
    return hi - lo > tol;
}
} // namespace detail

struct LefmEnergy
{
    double bulk = 0.0;
    double surface_length = 0.0;
    double total = 0.0;
};

inline LefmEnergy lefm_energy( const ParticleGrid& grid,
                               const std::function<Vec2( Vec2 )>& gradient,
                               std::span<const Segment> jumps, double mu,
                               double Gc )
{
    for ( std::size_t i = 0; i < jumps.size(); ++i )
    {
        if ( !( jumps[i].length() > 0.0 ) )
            throw ConfigError( "jump segment must have positive length" );
        for ( std::size_t j = i + 1; j < jumps.size(); ++j )
            if ( detail::segments_overlap( jumps[i], jumps[j] ) )
                throw ConfigError( "overlapping jump segments" );
    }
    LefmEnergy e;
    if ( gradient )
        e.bulk = mu * detail::cell_sum( grid, [&]( auto p ) {
                     const Vec2 g = gradient( grid.positions[p] );
                     return dot( g, g );
                 } );
    std::vector<double> lengths;
    for ( const auto& s : jumps )
        lengths.push_back( s.length() );
    e.surface_length = pairwise_sum( lengths );
    e.total = e.bulk + Gc * e.surface_length;
    return e;
}

// Jump curves of a list of crack data, each with its band outline.
inline std::vector<Segment> jump_curves( std::span<const CrackSegment> cracks )
{
    std::vector<Segment> out;
    for ( const auto& c : cracks )
        for ( const auto& s : jump_set( c ) )
            out.push_back( s );
    return out;
}

} // namespace pdfrac

#endif
