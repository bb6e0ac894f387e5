#ifndef PDFRAC_LATTICE_HPP
#define PDFRAC_LATTICE_HPP

#include <pdfrac/common.hpp>
#include <pdfrac/kernels.hpp>

#include <cmath>
#include <cstdint>
#include <ostream>
#include <vector>

namespace pdfrac
{

struct Rect
{
    double x0 = 0.0;
    double y0 = 0.0;
    double x1 = 1.0;
    double y1 = 1.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool contains( Vec2 p ) const
    {
        return p.x > x0 && p.x < x1 && p.y > y0 && p.y < y1;
    }
    double distance( Vec2 p ) const
    {
        const double dx = std::max( { x0 - p.x, 0.0, p.x - x1 } );
        const double dy = std::max( { y0 - p.y, 0.0, p.y - y1 } );
        return std::hypot( dx, dy );
    }

    friend bool operator==( const Rect&, const Rect& ) = default;
};

/******************************************************************************
  Domain D, collar D_alpha \ D, lattice spacing h and horizon eps.
  A collar width of 0 selects the default eps + 2h rounded up to whole cells.
******************************************************************************/
struct DomainSpec
{
    Rect domain;
    double spacing = 0.0;
    double horizon = 0.0;
    double collar_width = 0.0;

    double horizon_ratio() const { return horizon / spacing; }

    double resolved_collar() const
    {
        if ( collar_width > 0.0 )
            return collar_width;
        return std::ceil( ( horizon + 2.0 * spacing ) / spacing - 1e-9 ) *
               spacing;
    }

    void validate() const
    {
        if ( !( domain.width() > 0.0 ) || !( domain.height() > 0.0 ) )
            throw ConfigError( "domain must have positive width and height" );
        if ( !( spacing > 0.0 ) )
            throw ConfigError( "spacing must be positive" );
        if ( !( horizon > 0.0 ) )
            throw ConfigError( "horizon must be positive" );
        if ( horizon_ratio() < 3.0 - 1e-9 )
            throw ConfigError( "horizon/spacing ratio must be >= 3, got " +
                               std::to_string( horizon_ratio() ) );
        if ( !( resolved_collar() > horizon ) )
            throw ConfigError( "collar_width must exceed the horizon "
                               "(nonlocal Dirichlet collar requires alpha > "
                               "epsilon)" );
    }

    friend bool operator==( const DomainSpec&, const DomainSpec& ) = default;
};

struct ParticleGrid
{
    Rect domain;
    double spacing = 0.0;
    double horizon = 0.0;
    double collar = 0.0;
    // Bounding lattice of D_alpha, cell (i, j) centred at origin + (i, j) h.
    int ni = 0;
    int nj = 0;
    Vec2 origin;

    std::vector<Vec2> positions;
    std::vector<char> interior_flag;
    std::vector<std::int32_t> interior;
    std::vector<std::int32_t> lattice_to_particle;
    std::vector<std::int32_t> particle_lattice;

    std::size_t count() const { return positions.size(); }
    double cell_area() const { return spacing * spacing; }
    bool is_interior( std::size_t p ) const { return interior_flag[p] != 0; }

    // Particle whose cell contains x, or -1.
    std::int32_t locate( Vec2 x ) const
    {
        const auto i = static_cast<long>(
            std::floor( ( x.x - origin.x ) / spacing + 0.5 ) );
        const auto j = static_cast<long>(
            std::floor( ( x.y - origin.y ) / spacing + 0.5 ) );
        if ( i < 0 || j < 0 || i >= ni || j >= nj )
            return -1;
        return lattice_to_particle[static_cast<std::size_t>( i * nj + j )];
    }
};

inline ParticleGrid build_grid( const DomainSpec& spec )
{
    spec.validate();
    ParticleGrid g;
    g.domain = spec.domain;
    g.spacing = spec.spacing;
    g.horizon = spec.horizon;
    g.collar = spec.resolved_collar();

    const double h = spec.spacing;
    const int nc = static_cast<int>( std::ceil( g.collar / h - 1e-9 ) );
    const int nx =
        static_cast<int>( std::ceil( spec.domain.width() / h - 1e-9 ) );
    const int ny =
        static_cast<int>( std::ceil( spec.domain.height() / h - 1e-9 ) );
    g.ni = nx + 2 * nc;
    g.nj = ny + 2 * nc;
    g.origin = { spec.domain.x0 - ( nc - 0.5 ) * h,
                 spec.domain.y0 - ( nc - 0.5 ) * h };
    g.lattice_to_particle.assign( std::size_t( g.ni ) * g.nj, -1 );

    for ( int i = 0; i < g.ni; ++i )
        for ( int j = 0; j < g.nj; ++j )
        {
            const Vec2 x{ g.origin.x + i * h, g.origin.y + j * h };
            if ( spec.domain.distance( x ) >= g.collar )
                continue;
            const auto p = static_cast<std::int32_t>( g.positions.size() );
            const bool inside = spec.domain.contains( x );
            g.positions.push_back( x );
            g.interior_flag.push_back( inside ? 1 : 0 );
            if ( inside )
                g.interior.push_back( p );
            g.lattice_to_particle[std::size_t( i ) * g.nj + j] = p;
            g.particle_lattice.push_back( i * g.nj + j );
        }
    return g;
}

/******************************************************************************
  Horizon neighbourhoods. The lattice is uniform and every interior
  particle sees a complete horizon disk (alpha > eps), so one offset stencil
  describes every neighbour list exactly.
******************************************************************************/
struct Bond
{
    int di;
    int dj;
    std::int64_t lattice_offset;
    double xi_norm;
    Vec2 direction;
    double influence;
};

class NeighborTable
{
  public:
    NeighborTable() = default;
    NeighborTable( ParticleGrid grid, std::vector<Bond> stencil,
                   InfluenceSpec influence )
        : grid_( std::move( grid ) )
        , stencil_( std::move( stencil ) )
        , influence_( std::move( influence ) )
    {
        const double w = grid_.cell_area() / ( grid_.horizon * grid_.horizon );
        std::vector<double> terms;
        terms.reserve( stencil_.size() );
        for ( const auto& b : stencil_ )
            terms.push_back( w * b.xi_norm * b.influence );
        m_discrete_ = pairwise_sum( terms );
    }

    const ParticleGrid& grid() const { return grid_; }
    const std::vector<Bond>& stencil() const { return stencil_; }
    const InfluenceSpec& influence() const { return influence_; }
    double horizon() const { return grid_.horizon; }
    // Quadrature weight of every neighbour (full cell area).
    double weight() const { return grid_.cell_area(); }

    // Discrete m = sum_y w eps^-2 |xi| J(|xi|); identical for every
    // interior particle because every interior stencil is complete.
    double m_discrete() const { return m_discrete_; }

    std::int32_t neighbor( std::size_t p, std::size_t k ) const
    {
        return grid_.lattice_to_particle[static_cast<std::size_t>(
            grid_.particle_lattice[p] + stencil_[k].lattice_offset )];
    }

    std::size_t bond_count() const
    {
        return grid_.interior.size() * stencil_.size();
    }

    std::size_t memory_bytes() const
    {
        return grid_.positions.size() *
                   ( sizeof( Vec2 ) + sizeof( char ) + sizeof( std::int32_t ) ) +
               grid_.interior.size() * sizeof( std::int32_t ) +
               grid_.lattice_to_particle.size() * sizeof( std::int32_t ) +
               stencil_.size() * sizeof( Bond );
    }

  private:
    ParticleGrid grid_;
    std::vector<Bond> stencil_;
    InfluenceSpec influence_;
    double m_discrete_ = 0.0;
};

inline NeighborTable build_neighborhoods( ParticleGrid grid,
                                          const InfluenceSpec& inf,
                                          double horizon )
{
    if ( std::abs( horizon - grid.horizon ) > 1e-12 * grid.horizon )
        throw ConfigError( "neighbourhoods requested for a horizon that does "
                           "not match the grid" );
    if ( !( grid.collar > horizon ) )
        throw ConfigError( "grid collar does not cover the horizon" );

    const double h = grid.spacing;
    const int reach = static_cast<int>( std::floor( horizon / h + 1e-9 ) );
    std::vector<Bond> stencil;
    for ( int di = -reach; di <= reach; ++di )
        for ( int dj = -reach; dj <= reach; ++dj )
        {
            if ( di == 0 && dj == 0 )
                continue;
            const double len = h * std::hypot( double( di ), double( dj ) );
            if ( len > horizon * ( 1.0 + 1e-12 ) )
                continue;
            const double xi = std::min( 1.0, len / horizon );
            const Vec2 e{ h * di / len, h * dj / len };
            stencil.push_back( { di, dj, std::int64_t( di ) * grid.nj + dj, xi,
                                 e, influence_eval( inf, xi ) } );
        }
    if ( stencil.empty() )
        throw ConfigError( "empty horizon neighbourhood" );
    return NeighborTable( std::move( grid ), std::move( stencil ), inf );
}

inline void write_summary( std::ostream& os, const NeighborTable& table )
{
    const auto& g = table.grid();
    os << "particles " << g.count() << "\n"
       << "interior " << g.interior.size() << "\n"
       << "collar " << g.count() - g.interior.size() << "\n"
       << "spacing " << g.spacing << "\n"
       << "horizon " << g.horizon << "\n"
       << "collar_width " << g.collar << "\n"
       << "neighbors_per_particle " << table.stencil().size() << "\n"
       << "bonds " << table.bond_count() << "\n"
       << "m_discrete " << table.m_discrete() << "\n"
       << "m_continuum "
       << continuum_weight_normalization( table.influence() ) << "\n"
       << "memory_bytes " << table.memory_bytes() << "\n";
}

} // namespace pdfrac

#endif
