#ifndef PDFRAC_NUCLEATION_HPP
#define PDFRAC_NUCLEATION_HPP

#include <pdfrac/common.hpp>
#include <pdfrac/dynamics.hpp>
#include <pdfrac/kernels.hpp>
#include <pdfrac/lattice.hpp>

#include <cmath>
#include <vector>

namespace pdfrac
{

/******************************************************************************
  Growth coefficient of a small jump across the line through x with
  direction nu:

    A_nu = -1/2 [ sum_{xi . nu_perp > 0}  h^2 W''(u(x + eps xi) - u(x))
                + sum_{xi . nu_perp <= 0} h^2 W''(u(x) - u(x - eps xi)) ]

  A_nu > 0 means the jump grows.
******************************************************************************/
namespace detail
{
inline std::vector<std::size_t> mirror_index( const NeighborTable& table )
{
    const auto& st = table.stencil();
    std::vector<std::size_t> m( st.size() );
    for ( std::size_t k = 0; k < st.size(); ++k )
        for ( std::size_t l = 0; l < st.size(); ++l )
            if ( st[l].di == -st[k].di && st[l].dj == -st[k].dj )
                m[k] = l;
    return m;
}

inline double stability_coefficient( const State& state,
                                     const NeighborTable& table,
                                     const PotentialSpec& spec,
                                     std::span<const std::size_t> mirror,
                                     std::size_t p, Vec2 nu )
{
    const Vec2 side = perp( nu );
    const double eps = table.horizon();
    const double w = table.weight();
    std::vector<double> terms;
    terms.reserve( table.stencil().size() );
    for ( std::size_t k = 0; k < table.stencil().size(); ++k )
    {
        const auto& b = table.stencil()[k];
        const double s = b.di * side.x + b.dj * side.y;
        const double tie = 1e-12 * std::hypot( double( b.di ), double( b.dj ) );
        double eta;
        if ( s > tie )
            eta = state.u[table.neighbor( p, k )] - state.u[p];
        else
            eta = state.u[p] - state.u[table.neighbor( p, mirror[k] )];
        const BondCoefficients c( table.influence(), b.xi_norm, eps );
        const double r = eta * eta * c.inv_len;
        const auto v = profile_eval( spec, r );
        terms.push_back( w * 2.0 * c.inv_len * c.c_w * ( v.df + 2.0 * v.d2f * r ) );
    }
    return -0.5 * pairwise_sum( terms );
}
} // namespace detail

inline void check_direction( Vec2 nu )
{
    if ( std::abs( norm( nu ) - 1.0 ) > 1e-9 )
        throw ConfigError( "direction must be a unit vector" );
}

inline double stability_coefficient( const State& state,
                                     const NeighborTable& table,
                                     const ModelSpec& model, std::size_t p,
                                     Vec2 nu )
{
    check_state( state, table );
    check_direction( nu );
    if ( !table.grid().is_interior( p ) )
        throw ConfigError( "stability coefficient needs an interior particle" );
    const auto mirror = detail::mirror_index( table );
    return detail::stability_coefficient( state, table, model.potential, mirror,
                                          p, nu );
}

// Coefficient of the unoriented line: the larger of A_nu and A_{-nu}.
inline double line_coefficient( const State& state, const NeighborTable& table,
                                const ModelSpec& model, std::size_t p, Vec2 nu )
{
    return std::max( stability_coefficient( state, table, model, p, nu ),
                     stability_coefficient( state, table, model, p,
                                            -1.0 * nu ) );
}

struct NucleationResult
{
    std::size_t particle = 0;
    Vec2 point;
    std::vector<Vec2> directions;
    // Line coefficient per direction theta_k = k pi / N.
    std::vector<double> coefficients;
    // Oriented maximizer; theta_star is its line angle in [0, pi).
    Vec2 nu_star;
    double theta_star = 0.0;
    double A_star = 0.0;
    bool unstable = false;

    // sqrt(A / rho) when the jump grows, 0 otherwise.
    double growth_rate( double rho ) const
    {
        return unstable ? std::sqrt( A_star / rho ) : 0.0;
    }
};

inline NucleationResult most_unstable_direction( const State& state,
                                                 const NeighborTable& table,
                                                 const ModelSpec& model,
                                                 std::size_t p,
                                                 int n_directions = 64 )
{
    check_state( state, table );
    if ( n_directions < 8 )
        throw ConfigError( "need at least 8 directions" );
    if ( !table.grid().is_interior( p ) )
        throw ConfigError( "stability coefficient needs an interior particle" );
    const auto mirror = detail::mirror_index( table );
    NucleationResult r;
    r.particle = p;
    r.point = table.grid().positions[p];
    r.coefficients.resize( std::size_t( n_directions ) );
    r.directions.resize( std::size_t( n_directions ) );
    std::vector<Vec2> oriented( static_cast<std::size_t>( n_directions ) );
    parallel_for( std::size_t( n_directions ), [&]( std::size_t k ) {
        const double theta = double( k ) * pi / n_directions;
        const Vec2 nu{ std::cos( theta ), std::sin( theta ) };
        const double plus = detail::stability_coefficient(
            state, table, model.potential, mirror, p, nu );
        const double minus = detail::stability_coefficient(
            state, table, model.potential, mirror, p, -1.0 * nu );
        r.directions[k] = nu;
        r.coefficients[k] = std::max( plus, minus );
        oriented[k] = minus > plus ? -1.0 * nu : nu;
    } );
    std::size_t best = 0;
    for ( std::size_t k = 1; k < r.coefficients.size(); ++k )
        if ( r.coefficients[k] > r.coefficients[best] )
            best = k;
    r.A_star = r.coefficients[best];
    r.nu_star = oriented[best];
    r.theta_star = double( best ) * pi / n_directions;
    r.unstable = r.A_star > 0.0;
    return r;
}

} // namespace pdfrac

#endif
