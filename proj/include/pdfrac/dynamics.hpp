#ifndef PDFRAC_DYNAMICS_HPP
#define PDFRAC_DYNAMICS_HPP

#include <pdfrac/common.hpp>
#include <pdfrac/fields.hpp>
#include <pdfrac/kernels.hpp>
#include <pdfrac/lattice.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace pdfrac
{

struct State
{
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;
};

struct ModelSpec
{
    double rho = 1.0;
    PotentialSpec potential;
    InfluenceSpec influence;
    DomainSpec domain;
    double T = 1.0;
    // 0 selects half of stable_dt.
    double dt = 0.0;

    double horizon() const { return domain.horizon; }

    void validate() const
    {
        if ( !( rho > 0.0 ) )
            throw ConfigError( "rho must be positive" );
        if ( !( T >= 0.0 ) )
            throw ConfigError( "T must be non-negative" );
        if ( !( dt >= 0.0 ) )
            throw ConfigError( "dt must be non-negative" );
        potential.validate();
        influence.validate();
        domain.validate();
    }

    friend bool operator==( const ModelSpec&, const ModelSpec& ) = default;
};

inline NeighborTable build_table( const ModelSpec& model )
{
    model.validate();
    return build_neighborhoods( build_grid( model.domain ), model.influence,
                                model.horizon() );
}

/******************************************************************************
  Initial data: smooth part plus prescribed jump segments; collar zeroed.
******************************************************************************/
inline State make_initial_data( const ParticleGrid& grid,
                                const std::vector<CrackSegment>& cracks,
                                const FieldPreset& smooth_part,
                                const FieldPreset& v0 )
{
    for ( const auto& c : cracks )
        c.validate( grid.domain );
    State s;
    s.u.assign( grid.count(), 0.0 );
    s.v.assign( grid.count(), 0.0 );
    for ( auto p : grid.interior )
    {
        const Vec2 x = grid.positions[p];
        double u = smooth_part.value( x, grid.domain );
        for ( const auto& c : cracks )
            u += c.contribution( x );
        s.u[p] = u;
        s.v[p] = v0.value( x, grid.domain );
    }
    if ( !all_finite( s.u ) || !all_finite( s.v ) )
        throw NumericError( "initial data is not finite" );
    return s;
}

/******************************************************************************
  Bond sums. The discrete strain energy is

    PD = sum_{x} h^2 sum_{y in H(x)} h^2 W(u(y) - u(x), y - x)

  with x over D and the collar (bonds with both ends in the collar carry no
  energy since u = 0 there). The force per unit area is
  F(x) = -h^-2 dPD/du(x) = 2 sum_y h^2 dW/deta, the full-neighbourhood
  difference form. A bond into the collar enters PD from both of its ends
  but is visited once from the interior, hence its weight 2 in PD.
******************************************************************************/
namespace detail
{
struct StencilCoefficients
{
    std::vector<double> c_w;
    std::vector<double> inv_len;

    StencilCoefficients( const NeighborTable& table )
    {
        for ( const auto& b : table.stencil() )
        {
            const BondCoefficients c( table.influence(), b.xi_norm,
                                      table.horizon() );
            c_w.push_back( c.c_w );
            inv_len.push_back( c.inv_len );
        }
    }
};

template <bool WithForce>
double bond_sums( std::span<const double> u, const NeighborTable& table,
                  const PotentialSpec& spec, std::span<double> force )
{
    const auto& grid = table.grid();
    const StencilCoefficients coef( table );
    const double w = table.weight();
    const std::size_t nb = table.stencil().size();
    std::vector<double> density( grid.interior.size(), 0.0 );

    parallel_for( grid.interior.size(), [&]( std::size_t i ) {
        const auto p = static_cast<std::size_t>( grid.interior[i] );
        const double up = u[p];
        double f_sum = 0.0;
        double e_sum = 0.0;
        for ( std::size_t k = 0; k < nb; ++k )
        {
            const auto q = static_cast<std::size_t>( table.neighbor( p, k ) );
            const double eta = u[q] - up;
            const double s = eta * eta * coef.inv_len[k];
            const auto v = profile_eval( spec, s );
            e_sum += ( grid.interior_flag[q] ? 1.0 : 2.0 ) * coef.c_w[k] * v.f;
            if constexpr ( WithForce )
                f_sum += 4.0 * eta * coef.inv_len[k] * coef.c_w[k] * v.df;
        }
        density[i] = w * e_sum;
        if constexpr ( WithForce )
            force[p] = w * f_sum;
    } );
    return grid.cell_area() * pairwise_sum( density );
}
} // namespace detail

inline void check_state( const State& s, const NeighborTable& table )
{
    if ( s.u.size() != table.grid().count() ||
         s.v.size() != table.grid().count() )
        throw ConfigError( "state size does not match the particle grid" );
}

// Force per unit area on every particle (zero on the collar); returns PD(u).
inline double assemble_force( const State& state, const NeighborTable& table,
                              const ModelSpec& model, std::span<double> force )
{
    check_state( state, table );
    if ( !all_finite( state.u ) )
        throw NumericError( "assemble_force: displacement is not finite" );
    std::fill( force.begin(), force.end(), 0.0 );
    return detail::bond_sums<true>( state.u, table, model.potential, force );
}

inline std::vector<double> assemble_force( const State& state,
                                           const NeighborTable& table,
                                           const ModelSpec& model )
{
    std::vector<double> f( table.grid().count(), 0.0 );
    assemble_force( state, table, model, f );
    return f;
}

inline double strain_energy( std::span<const double> u,
                             const NeighborTable& table,
                             const ModelSpec& model )
{
    return detail::bond_sums<false>( u, table, model.potential, {} );
}

/******************************************************************************
  Largest stable step for velocity Verlet, 2 / sqrt(L / rho), scaled by
  safety. L is the largest absolute row sum of the force Jacobian at u = 0,
  which bounds |d^2W/deta^2| for every eta for the built-in profiles.
******************************************************************************/
inline double force_lipschitz_bound( const NeighborTable& table,
                                     const ModelSpec& model )
{
    const auto& grid = table.grid();
    const detail::StencilCoefficients coef( table );
    const double w = table.weight();
    double L = 0.0;
    for ( auto p : grid.interior )
    {
        double row = 0.0;
        for ( std::size_t k = 0; k < table.stencil().size(); ++k )
        {
            const auto q = table.neighbor( p, k );
            const double mult = grid.interior_flag[q] ? 2.0 : 1.0;
            const double stiff =
                2.0 * coef.inv_len[k] * coef.c_w[k] * model.potential.f_prime_0;
            row += 2.0 * w * mult * std::abs( stiff );
        }
        L = std::max( L, row );
    }
    return L;
}

inline double stable_dt( const ModelSpec& model, const NeighborTable& table,
                         double safety = 0.5 )
{
    const double L = force_lipschitz_bound( table, model );
    if ( !( L > 0.0 ) )
        return std::numeric_limits<double>::infinity();
    return safety * 2.0 / std::sqrt( L / model.rho );
}

inline double resolved_dt( const ModelSpec& model, const NeighborTable& table )
{
    return model.dt > 0.0 ? model.dt : 0.5 * stable_dt( model, table );
}

/******************************************************************************
  Velocity Verlet for rho u_tt = F(u) + b(t, x).
******************************************************************************/
class VerletIntegrator
{
  public:
    VerletIntegrator( const NeighborTable& table, const ModelSpec& model,
                      const BodyForceSpec& body, double dt )
        : table_( table )
        , model_( model )
        , body_( body )
        , dt_( dt )
        , shape_( sample_shape( body, table.grid() ) )
        , force_( table.grid().count(), 0.0 )
    {
        if ( !( dt > 0.0 ) )
            throw ConfigError( "time step must be positive" );
    }

    void prime( const State& s )
    {
        pd_ = assemble_force( s, table_, model_, force_ );
        primed_t_ = s.t;
    }

    void advance( State& s, std::size_t step_index = 0 )
    {
        if ( !primed_t_ || *primed_t_ != s.t )
            prime( s );
        const auto& interior = table_.grid().interior;
        const double half = 0.5 * dt_ / model_.rho;
        const double b0 = body_factor( s.t );
        for ( auto p : interior )
        {
            s.v[p] += half * ( force_[p] + b0 * shape_[p] );
            s.u[p] += dt_ * s.v[p];
        }
        s.t += dt_;
        if ( !all_finite( s.u ) )
            throw IntegrationError( "displacement blew up", step_index );
        pd_ = detail::bond_sums<true>( s.u, table_, model_.potential, force_ );
        const double b1 = body_factor( s.t );
        for ( auto p : interior )
            s.v[p] += half * ( force_[p] + b1 * shape_[p] );
        primed_t_ = s.t;
        if ( !all_finite( s.v ) || !std::isfinite( pd_ ) )
            throw IntegrationError( "velocity blew up", step_index );
    }

    double dt() const { return dt_; }
    double strain_energy() const { return pd_; }
    std::span<const double> force() const { return force_; }
    std::span<const double> body_shape() const { return shape_; }
    double body_factor( double t ) const
    {
        return body_.is_zero() ? 0.0 : body_.amplitude * ( 1.0 + body_.ramp * t );
    }
    double body_rate_factor() const
    {
        return body_.is_zero() ? 0.0 : body_.amplitude * body_.ramp;
    }

  private:
    const NeighborTable& table_;
    const ModelSpec& model_;
    BodyForceSpec body_;
    double dt_;
    std::vector<double> shape_;
    std::vector<double> force_;
    double pd_ = 0.0;
    std::optional<double> primed_t_;
};

inline State step( const State& state, const NeighborTable& table,
                   const ModelSpec& model, const BodyForceSpec& b )
{
    VerletIntegrator integrator( table, model, b, resolved_dt( model, table ) );
    State next = state;
    integrator.advance( next );
    return next;
}

/******************************************************************************
  Energies at one instant. epd = kinetic + pd - work.
******************************************************************************/
struct EnergyReport
{
    double t = 0.0;
    double pd = 0.0;
    double kinetic = 0.0;
    double work = 0.0;
    double epd = 0.0;
    // int_D b_t u dx, integrated in time by the balance check.
    double work_rate = 0.0;
    double balance_residual = 0.0;
};

namespace detail
{
inline double cell_sum( const ParticleGrid& g, auto&& term )
{
    std::vector<double> v;
    v.reserve( g.interior.size() );
    for ( auto p : g.interior )
        v.push_back( term( static_cast<std::size_t>( p ) ) );
    return g.cell_area() * pairwise_sum( v );
}

inline EnergyReport make_report( const State& s, const ParticleGrid& g,
                                 double rho, double pd,
                                 std::span<const double> shape, double b,
                                 double b_rate )
{
    EnergyReport r;
    r.t = s.t;
    r.pd = pd;
    r.kinetic = 0.5 * rho * cell_sum( g, [&]( auto p ) { return s.v[p] * s.v[p]; } );
    const double su = cell_sum( g, [&]( auto p ) { return shape[p] * s.u[p]; } );
    r.work = b * su;
    r.work_rate = b_rate * su;
    r.epd = r.kinetic + r.pd - r.work;
    return r;
}
} // namespace detail

/******************************************************************************
  Time loop.
******************************************************************************/
struct RunOptions
{
    std::size_t stride = 1;
    // Kinetic + strain energy must stay below
    //   slack * e^T * (initial energy + (1/2rho) int_0^T |b|^2).
    double gronwall_slack = 2.0;
    bool check_gronwall = true;
    std::function<void( const State&, const EnergyReport&, std::size_t )>
        observer;
};

struct RunResult
{
    State final_state;
    std::vector<EnergyReport> records;
    std::size_t steps = 0;
    double dt = 0.0;
    double gronwall_bound = 0.0;
    // max over steps of (kinetic + pd) / gronwall_bound
    double max_energy_ratio = 0.0;
    double max_abs_u = 0.0;
};

inline double max_abs( std::span<const double> v )
{
    double m = 0.0;
    for ( double x : v )
        m = std::max( m, std::abs( x ) );
    return m;
}

inline RunResult run( const NeighborTable& table, const ModelSpec& model,
                      State initial, const BodyForceSpec& b,
                      const RunOptions& options = {} )
{
    check_state( initial, table );
    if ( options.stride == 0 )
        throw ConfigError( "observer stride must be positive" );
    const auto& grid = table.grid();
    const double dt_request = resolved_dt( model, table );
    const auto nsteps = static_cast<std::size_t>(
        model.T > 0.0 ? std::ceil( model.T / dt_request - 1e-9 ) : 0.0 );
    const double dt = nsteps > 0 ? model.T / double( nsteps ) : dt_request;

    VerletIntegrator integrator( table, model, b, dt );
    integrator.prime( initial );

    RunResult result;
    result.dt = dt;
    result.steps = nsteps;
    State s = std::move( initial );

    auto report = [&]() {
        return detail::make_report( s, grid, model.rho,
                                    integrator.strain_energy(),
                                    integrator.body_shape(),
                                    integrator.body_factor( s.t ),
                                    integrator.body_rate_factor() );
    };

    const EnergyReport first = report();
    {
        double b2 = 0.0;
        if ( !b.is_zero() )
        {
            const double s2 = detail::cell_sum( grid, [&]( auto p ) {
                return integrator.body_shape()[p] * integrator.body_shape()[p];
            } );
            const double r = b.ramp;
            const double time_int =
                r == 0.0 ? model.T
                         : ( std::pow( 1.0 + r * model.T, 3 ) - 1.0 ) /
                               ( 3.0 * r );
            b2 = b.amplitude * b.amplitude * s2 * time_int;
        }
        result.gronwall_bound =
            options.gronwall_slack * std::exp( model.T ) *
            ( first.pd + first.kinetic + 0.5 / model.rho * b2 );
    }

    // Beyond this step the scheme amplifies the stiffest mode; a bound
    // breach is then reported as a numerical failure of the integrator.
    const bool outside_stability = dt > stable_dt( model, table, 1.0 );

    auto check_bound = [&]( const EnergyReport& r, std::size_t n ) {
        const double e = r.pd + r.kinetic;
        if ( result.gronwall_bound > 0.0 )
            result.max_energy_ratio =
                std::max( result.max_energy_ratio, e / result.gronwall_bound );
        if ( !options.check_gronwall ||
             e <= result.gronwall_bound * ( 1.0 + 1e-12 ) + 1e-300 )
            return;
        if ( outside_stability )
            throw IntegrationError( "energy bound exceeded with a time step "
                                    "above the stability limit",
                                    n );
        throw BoundViolation( "energy bound violated at step " +
                                  std::to_string( n ) + ": " +
                                  std::to_string( e ) + " > " +
                                  std::to_string( result.gronwall_bound ) );
    };

    auto record = [&]( const EnergyReport& r, std::size_t n ) {
        result.records.push_back( r );
        if ( options.observer )
            options.observer( s, r, n );
    };

    result.max_abs_u = max_abs( s.u );
    check_bound( first, 0 );
    record( first, 0 );
    for ( std::size_t n = 1; n <= nsteps; ++n )
    {
        integrator.advance( s, n );
        result.max_abs_u = std::max( result.max_abs_u, max_abs( s.u ) );
        const bool sampled = n % options.stride == 0;
        const EnergyReport r = report();
        check_bound( r, n );
        if ( sampled )
            record( r, n );
    }
    result.final_state = std::move( s );
    return result;
}

} // namespace pdfrac

#endif
