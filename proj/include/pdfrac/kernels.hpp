#ifndef PDFRAC_KERNELS_HPP
#define PDFRAC_KERNELS_HPP

#include <pdfrac/common.hpp>

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

namespace pdfrac
{
inline constexpr double pi = boost::math::constants::pi<double>();

/******************************************************************************
  Potential profile f: concave, f(0) = 0, f'(0) > 0, f(r) -> f_inf.

  exponential: f(r) = f_inf (1 - exp(-a r)),        a = f'(0) / f_inf
  arctan:      f(r) = (2 f_inf / pi) atan(b r),      b = pi f'(0) / (2 f_inf)
******************************************************************************/
enum class ProfileKind
{
    exponential,
    arctan
};

inline std::string_view to_string( ProfileKind k )
{
    return k == ProfileKind::exponential ? "exponential" : "arctan";
}

struct PotentialSpec
{
    double f_prime_0 = 1.0;
    double f_infinity = 1.0;
    ProfileKind profile = ProfileKind::exponential;

    void validate() const
    {
        if ( !( f_prime_0 >= 0.0 ) || !std::isfinite( f_prime_0 ) )
            throw ConfigError( "f_prime_0 must be finite and non-negative" );
        if ( !( f_infinity > 0.0 ) || !std::isfinite( f_infinity ) )
            throw ConfigError( "f_infinity must be finite and positive" );
    }

    friend bool operator==( const PotentialSpec&,
                            const PotentialSpec& ) = default;
};

struct PotentialValue
{
    double f;
    double df;
    double d2f;
};

namespace detail
{
// No domain check; r >= 0 is the caller's responsibility.
inline PotentialValue profile_eval( const PotentialSpec& spec, double r )
{
    const double fp0 = spec.f_prime_0;
    const double finf = spec.f_infinity;
    if ( spec.profile == ProfileKind::exponential )
    {
        const double a = fp0 / finf;
        const double e = std::exp( -a * r );
        return { -finf * std::expm1( -a * r ), fp0 * e, -a * fp0 * e };
    }
    const double b = pi * fp0 / ( 2.0 * finf );
    const double q = 1.0 / ( 1.0 + b * b * r * r );
    return { 2.0 * finf / pi * std::atan( b * r ), fp0 * q,
             -2.0 * fp0 * b * b * r * q * q };
}

// d^2/dr^2 f(r^2) = 2 f'(r^2) + 4 r^2 f''(r^2)
inline double squared_profile_curvature( const PotentialSpec& spec, double r )
{
    const double s = r * r;
    const auto v = profile_eval( spec, s );
    return 2.0 * v.df + 4.0 * s * v.d2f;
}
} // namespace detail

inline PotentialValue potential_eval( const PotentialSpec& spec, double r )
{
    if ( !( r >= 0.0 ) )
        throw std::domain_error( "potential_eval: argument must be >= 0, got " +
                                 std::to_string( r ) );
    return detail::profile_eval( spec, r );
}

// Bracketed bisection on the sign change of d^2/dr^2 f(r^2).
inline double inflection_point_bisection( const PotentialSpec& spec,
                                          double tolerance = 1e-12 )
{
    if ( spec.f_prime_0 <= 0.0 )
        throw NumericError( "inflection point undefined for f'(0) = 0" );
    double hi = std::sqrt( spec.f_infinity / spec.f_prime_0 );
    int guard = 0;
    while ( detail::squared_profile_curvature( spec, hi ) >= 0.0 )
    {
        hi *= 2.0;
        if ( ++guard > 200 )
            throw NumericError( "inflection point: no sign change found" );
    }
    auto curvature = [&]( double r ) {
        return detail::squared_profile_curvature( spec, r );
    };
    auto done = [tolerance]( double a, double b ) {
        return std::abs( b - a ) <= tolerance;
    };
    const auto [a, b] = boost::math::tools::bisect( curvature, 0.0, hi, done );
    return 0.5 * ( a + b );
}

// Inflection point rbar of r -> f(r^2).
inline double inflection_point( const PotentialSpec& spec )
{
    if ( spec.profile == ProfileKind::exponential )
        return std::sqrt( spec.f_infinity / ( 2.0 * spec.f_prime_0 ) );
    return inflection_point_bisection( spec );
}

/******************************************************************************
  Influence function J on the rescaled bond length r = |xi| in [0, 1].
******************************************************************************/
enum class InfluenceKind
{
    constant,
    linear_taper,
    polynomial
};

inline std::string_view to_string( InfluenceKind k )
{
    switch ( k )
    {
    case InfluenceKind::constant:
        return "constant";
    case InfluenceKind::linear_taper:
        return "linear_taper";
    default:
        return "polynomial";
    }
}

struct InfluenceSpec
{
    InfluenceKind kind = InfluenceKind::constant;
    // c0 + c1 r + c2 r^2 + ... (polynomial kind only)
    std::vector<double> coefficients;
    double bound_M = 2.0;

    static InfluenceSpec constant() { return {}; }
    static InfluenceSpec linear_taper()
    {
        return { InfluenceKind::linear_taper, {}, 2.0 };
    }
    static InfluenceSpec polynomial( std::vector<double> c, double M = 2.0 )
    {
        InfluenceSpec s{ InfluenceKind::polynomial, std::move( c ), M };
        s.validate();
        return s;
    }

    double raw( double r ) const
    {
        switch ( kind )
        {
        case InfluenceKind::constant:
            return 1.0;
        case InfluenceKind::linear_taper:
            return 1.0 - r;
        default:
        {
            double v = 0.0;
            for ( auto c = coefficients.rbegin(); c != coefficients.rend();
                  ++c )
                v = v * r + *c;
            return v;
        }
        }
    }

    void validate() const
    {
        if ( !( bound_M > 0.0 ) )
            throw ConfigError( "influence bound M must be positive" );
        if ( kind == InfluenceKind::polynomial && coefficients.empty() )
            throw ConfigError( "polynomial influence needs coefficients" );
        constexpr int samples = 2001;
        for ( int i = 0; i < samples; ++i )
        {
            const double r = double( i ) / ( samples - 1 );
            const double v = raw( r );
            if ( v < 0.0 )
                throw ConfigError( "influence function negative at r = " +
                                   std::to_string( r ) );
            if ( v >= bound_M )
                throw ConfigError( "influence function reaches bound M at r = " +
                                   std::to_string( r ) );
        }
    }

    friend bool operator==( const InfluenceSpec&,
                            const InfluenceSpec& ) = default;
};

inline double influence_eval( const InfluenceSpec& spec, double r )
{
    if ( !( r >= 0.0 ) )
        throw std::domain_error( "influence_eval: argument must be >= 0" );
    return r > 1.0 ? 0.0 : spec.raw( r );
}

/******************************************************************************
  Bond densities for the rescaled bond xi, |xi| in (0, 1].
******************************************************************************/
struct BondGeometry
{
    double xi_norm;
    Vec2 direction;
    double horizon;

    void validate() const
    {
        if ( !( xi_norm > 0.0 && xi_norm <= 1.0 ) )
            throw ConfigError( "bond length |xi| must lie in (0, 1]" );
        if ( std::abs( norm( direction ) - 1.0 ) > 1e-12 )
            throw ConfigError( "bond direction must be a unit vector" );
        if ( !( horizon > 0.0 ) )
            throw ConfigError( "horizon must be positive" );
    }
};

// Per-bond constants. W = c_w f(s), s = eta^2 * inv_len with inv_len =
// 1/(eps |xi|) and c_w = J(|xi|) / eps^3.
struct BondCoefficients
{
    double c_w;
    double inv_len;

    BondCoefficients( const InfluenceSpec& inf, double xi_norm, double eps )
        : c_w( influence_eval( inf, xi_norm ) / ( eps * eps * eps ) )
        , inv_len( 1.0 / ( eps * xi_norm ) )
    {
    }
};

inline double bond_potential_density( const PotentialSpec& spec,
                                      const InfluenceSpec& inf,
                                      const BondGeometry& geom, double eta )
{
    const BondCoefficients c( inf, geom.xi_norm, geom.horizon );
    return c.c_w * detail::profile_eval( spec, eta * eta * c.inv_len ).f;
}

inline double bond_force_density( const PotentialSpec& spec,
                                  const InfluenceSpec& inf,
                                  const BondGeometry& geom, double eta )
{
    const BondCoefficients c( inf, geom.xi_norm, geom.horizon );
    return 2.0 * eta * c.inv_len * c.c_w *
           detail::profile_eval( spec, eta * eta * c.inv_len ).df;
}

inline double bond_stiffness_density( const PotentialSpec& spec,
                                      const InfluenceSpec& inf,
                                      const BondGeometry& geom, double eta )
{
    const BondCoefficients c( inf, geom.xi_norm, geom.horizon );
    const double s = eta * eta * c.inv_len;
    const auto v = detail::profile_eval( spec, s );
    return 2.0 * c.inv_len * c.c_w * ( v.df + 2.0 * v.d2f * s );
}

// Relative displacement at which the bond stiffness changes sign.
inline double critical_stretch( const PotentialSpec& spec, double horizon,
                                double xi_norm )
{
    if ( !( horizon > 0.0 ) || !( xi_norm > 0.0 && xi_norm <= 1.0 ) )
        throw ConfigError( "critical_stretch: need horizon > 0 and |xi| in "
                           "(0, 1]" );
    return std::sqrt( horizon * xi_norm ) * inflection_point( spec );
}

/******************************************************************************
  Calibration of shear modulus and energy release rate:
    mu = pi f'(0) M2,   Gc = 2 pi f_inf M2,   M2 = int_0^1 r^2 J(r) dr
******************************************************************************/
enum class MomentMethod
{
    automatic,
    analytic,
    quadrature
};

struct Calibration
{
    double mu;
    double Gc;
};

inline double influence_moment_quadrature( const InfluenceSpec& inf,
                                           double tolerance = 1e-10 )
{
    double error = 0.0;
    auto integrand = [&]( double r ) { return r * r * inf.raw( r ); };
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            integrand, 0.0, 1.0, 15, tolerance, &error );
    if ( !std::isfinite( value ) || error > tolerance )
        throw NumericError( "moment quadrature did not converge, residual "
                            "estimate " +
                            std::to_string( error ) );
    return value;
}

inline double influence_moment( const InfluenceSpec& inf,
                                MomentMethod method = MomentMethod::automatic )
{
    if ( method == MomentMethod::quadrature )
        return influence_moment_quadrature( inf );
    switch ( inf.kind )
    {
    case InfluenceKind::constant:
        return 1.0 / 3.0;
    case InfluenceKind::linear_taper:
        return 1.0 / 12.0;
    default:
        if ( method == MomentMethod::analytic )
        {
            double m = 0.0;
            for ( std::size_t k = 0; k < inf.coefficients.size(); ++k )
                m += inf.coefficients[k] / double( k + 3 );
            return m;
        }
        return influence_moment_quadrature( inf );
    }
}

inline Calibration calibrate( const PotentialSpec& spec,
                              const InfluenceSpec& inf,
                              MomentMethod method = MomentMethod::automatic )
{
    const double m2 = influence_moment( inf, method );
    return { pi * spec.f_prime_0 * m2, 2.0 * pi * spec.f_infinity * m2 };
}

// m = int_{|xi|<1} |xi| J(|xi|) dxi
inline double continuum_weight_normalization( const InfluenceSpec& inf )
{
    return 2.0 * pi * influence_moment( inf );
}

} // namespace pdfrac

#endif
