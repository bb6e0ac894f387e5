#ifndef PDFRAC_CONFIG_HPP
#define PDFRAC_CONFIG_HPP

#include <pdfrac/common.hpp>
#include <pdfrac/dynamics.hpp>
#include <pdfrac/fields.hpp>
#include <pdfrac/io.hpp>
#include <pdfrac/kernels.hpp>
#include <pdfrac/lattice.hpp>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace pdfrac
{

/******************************************************************************
  INI configuration. Sections and keys (defaults in parentheses):

  [model]      rho*, f_prime_0*, f_infinity*, profile (exponential | arctan),
               influence (constant | linear_taper | polynomial),
               influence_coefficients (c0, c1, ...), influence_bound (2)
  [domain]     horizon*, spacing*, x0 y0 x1 y1 (unit square),
               collar_width (0 = horizon + 2 spacing)
  [time]       T*, dt (0 = half the stable step), stride (1),
               gronwall_slack (2)
  [initial]    u (zero | mode | uniform), u_amplitude, u_kx, u_ky,
               v, v_amplitude, v_kx, v_ky,
               cracks ("ax ay bx by height half_width; ...")
  [body_force] kind (zero | mode | uniform), amplitude, ramp, kx, ky
  [nucleate]   points ("x y; ..."), directions (64)
  [sweep]      horizons, horizon_ratio (4), samples (10), deltas,
               reference (true)
  [wave]       spacing (domain spacing / 2), dt (0 = half CFL)
  [gamma]      horizons, horizon_ratio (4)
  [output]     dir (out), snapshots (true)

  Keys marked * are required. Unknown sections or keys are rejected.
******************************************************************************/
struct RunConfig
{
    ModelSpec model;
    FieldPreset u0;
    FieldPreset v0;
    std::vector<CrackSegment> cracks;
    BodyForceSpec body;
    std::size_t stride = 1;
    double gronwall_slack = 2.0;

    std::vector<Vec2> nucleate_points;
    int directions = 64;

    std::vector<double> sweep_horizons;
    double sweep_ratio = 4.0;
    int samples = 10;
    std::vector<double> deltas;
    bool sweep_reference = true;

    double wave_spacing = 0.0;
    double wave_dt = 0.0;

    std::vector<double> gamma_horizons;
    double gamma_ratio = 4.0;

    std::string out_dir = "out";
    bool snapshots = true;

    friend bool operator==( const RunConfig&, const RunConfig& ) = default;
};

namespace detail
{
class IniReader
{
  public:
    explicit IniReader( const boost::property_tree::ptree& tree )
        : tree_( tree )
    {
        for ( const auto& [section, keys] : tree_ )
        {
            if ( keys.empty() && !keys.data().empty() )
                throw ConfigError( "key '" + section +
                                   "' appears outside any section" );
            for ( const auto& kv : keys )
                unread_.insert( section + "." + kv.first );
        }
    }

    std::optional<std::string> raw( const std::string& section,
                                    const std::string& key )
    {
        const auto path = boost::property_tree::ptree::path_type(
            section + "." + key, '.' );
        const auto v = tree_.get_optional<std::string>( path );
        if ( !v )
            return std::nullopt;
        unread_.erase( section + "." + key );
        return boost::algorithm::trim_copy( *v );
    }

    double number( const std::string& section, const std::string& key,
                   std::optional<double> fallback )
    {
        const auto v = raw( section, key );
        if ( !v )
        {
            if ( !fallback )
                throw ConfigError( "[" + section + "] missing required key '" +
                                   key + "'" );
            return *fallback;
        }
        return parse_number( section, key, *v );
    }

    int integer( const std::string& section, const std::string& key,
                 int fallback )
    {
        const auto v = raw( section, key );
        if ( !v )
            return fallback;
        int out = 0;
        const auto [ptr, ec] =
            std::from_chars( v->data(), v->data() + v->size(), out );
        if ( ec != std::errc() || ptr != v->data() + v->size() )
            throw ConfigError( "[" + section + "] " + key +
                               ": expected an integer, got '" + *v + "'" );
        return out;
    }

    bool boolean( const std::string& section, const std::string& key,
                  bool fallback )
    {
        const auto v = raw( section, key );
        if ( !v )
            return fallback;
        if ( *v == "true" || *v == "1" || *v == "yes" )
            return true;
        if ( *v == "false" || *v == "0" || *v == "no" )
            return false;
        throw ConfigError( "[" + section + "] " + key +
                           ": expected true or false, got '" + *v + "'" );
    }

    std::string word( const std::string& section, const std::string& key,
                      const std::string& fallback )
    {
        return raw( section, key ).value_or( fallback );
    }

    std::vector<double> list( const std::string& section,
                              const std::string& key )
    {
        std::vector<double> out;
        const auto v = raw( section, key );
        if ( !v || v->empty() )
            return out;
        std::vector<std::string> parts;
        boost::algorithm::split( parts, *v, boost::is_any_of( "," ) );
        for ( auto& p : parts )
        {
            boost::algorithm::trim( p );
            out.push_back( parse_number( section, key, p ) );
        }
        return out;
    }

    // Groups separated by ';', numbers within a group by whitespace.
    std::vector<std::vector<double>> groups( const std::string& section,
                                             const std::string& key,
                                             std::size_t width )
    {
        std::vector<std::vector<double>> out;
        const auto v = raw( section, key );
        if ( !v || v->empty() )
            return out;
        std::vector<std::string> parts;
        boost::algorithm::split( parts, *v, boost::is_any_of( ";" ) );
        for ( auto& p : parts )
        {
            boost::algorithm::trim( p );
            if ( p.empty() )
                continue;
            std::vector<std::string> fields;
            boost::algorithm::split( fields, p, boost::is_space(),
                                     boost::token_compress_on );
            if ( fields.size() != width )
                throw ConfigError( "[" + section + "] " + key + ": expected " +
                                   std::to_string( width ) +
                                   " numbers per group, got '" + p + "'" );
            std::vector<double> g;
            for ( const auto& f : fields )
                g.push_back( parse_number( section, key, f ) );
            out.push_back( std::move( g ) );
        }
        return out;
    }

    void reject_unknown() const
    {
        if ( unread_.empty() )
            return;
        const auto& first = *unread_.begin();
        const auto dot = first.find( '.' );
        throw ConfigError( "[" + first.substr( 0, dot ) + "] unknown key '" +
                           first.substr( dot + 1 ) + "'" );
    }

  private:
    static double parse_number( const std::string& section,
                                const std::string& key, const std::string& v )
    {
        double out = 0.0;
        const auto [ptr, ec] =
            std::from_chars( v.data(), v.data() + v.size(), out );
        if ( ec != std::errc() || ptr != v.data() + v.size() ||
             !std::isfinite( out ) )
            throw ConfigError( "[" + section + "] " + key +
                               ": expected a number, got '" + v + "'" );
        return out;
    }

    const boost::property_tree::ptree& tree_;
    std::set<std::string> unread_;
};

inline PresetKind preset_kind( const std::string& section,
                               const std::string& key, const std::string& v )
{
    if ( v == "zero" )
        return PresetKind::zero;
    if ( v == "mode" )
        return PresetKind::mode;
    if ( v == "uniform" )
        return PresetKind::uniform;
    throw ConfigError( "[" + section + "] " + key +
                       ": expected zero, mode or uniform, got '" + v + "'" );
}

inline void require_positive( const std::string& section,
                              const std::string& key, double v )
{
    if ( !( v > 0.0 ) )
        throw ConfigError( "[" + section + "] " + key + " must be positive" );
}

inline void require_nonnegative( const std::string& section,
                                 const std::string& key, double v )
{
    if ( !( v >= 0.0 ) )
        throw ConfigError( "[" + section + "] " + key +
                           " must be non-negative" );
}

template <class Fn>
void with_section( const std::string& section, Fn&& fn )
{
    try
    {
        fn();
    }
    catch ( const ConfigError& e )
    {
        const std::string what = e.what();
        if ( what.rfind( "[", 0 ) == 0 )
            throw;
        throw ConfigError( "[" + section + "] " + what );
    }
}

inline std::string join( std::span<const double> v )
{
    std::string s;
    for ( std::size_t i = 0; i < v.size(); ++i )
        s += ( i ? ", " : "" ) + format_number( v[i] );
    return s;
}
} // namespace detail

inline RunConfig parse_config_tree( const boost::property_tree::ptree& tree )
{
    detail::IniReader in( tree );
    RunConfig c;
    auto& m = c.model;

    m.rho = in.number( "model", "rho", std::nullopt );
    detail::require_positive( "model", "rho", m.rho );
    m.potential.f_prime_0 = in.number( "model", "f_prime_0", std::nullopt );
    detail::require_positive( "model", "f_prime_0", m.potential.f_prime_0 );
    m.potential.f_infinity = in.number( "model", "f_infinity", std::nullopt );
    detail::require_positive( "model", "f_infinity", m.potential.f_infinity );
    const auto profile = in.word( "model", "profile", "exponential" );
    if ( profile == "exponential" )
        m.potential.profile = ProfileKind::exponential;
    else if ( profile == "arctan" )
        m.potential.profile = ProfileKind::arctan;
    else
        throw ConfigError( "[model] profile: expected exponential or arctan, "
                           "got '" +
                           profile + "'" );
    const auto influence = in.word( "model", "influence", "constant" );
    const auto coefficients = in.list( "model", "influence_coefficients" );
    const double bound = in.number( "model", "influence_bound", 2.0 );
    if ( influence == "constant" )
        m.influence = InfluenceSpec::constant();
    else if ( influence == "linear_taper" )
        m.influence = InfluenceSpec::linear_taper();
    else if ( influence == "polynomial" )
        m.influence = { InfluenceKind::polynomial, coefficients, bound };
    else
        throw ConfigError( "[model] influence: expected constant, "
                           "linear_taper or polynomial, got '" +
                           influence + "'" );
    m.influence.bound_M = bound;
    detail::with_section( "model", [&] { m.influence.validate(); } );

    auto& d = m.domain;
    d.horizon = in.number( "domain", "horizon", std::nullopt );
    detail::require_positive( "domain", "horizon", d.horizon );
    d.spacing = in.number( "domain", "spacing", std::nullopt );
    detail::require_positive( "domain", "spacing", d.spacing );
    d.domain.x0 = in.number( "domain", "x0", 0.0 );
    d.domain.y0 = in.number( "domain", "y0", 0.0 );
    d.domain.x1 = in.number( "domain", "x1", 1.0 );
    d.domain.y1 = in.number( "domain", "y1", 1.0 );
    d.collar_width = in.number( "domain", "collar_width", 0.0 );
    detail::require_nonnegative( "domain", "collar_width", d.collar_width );
    detail::with_section( "domain", [&] { d.validate(); } );

    m.T = in.number( "time", "T", std::nullopt );
    detail::require_nonnegative( "time", "T", m.T );
    m.dt = in.number( "time", "dt", 0.0 );
    detail::require_nonnegative( "time", "dt", m.dt );
    const int stride = in.integer( "time", "stride", 1 );
    if ( stride < 1 )
        throw ConfigError( "[time] stride must be at least 1" );
    c.stride = std::size_t( stride );
    c.gronwall_slack = in.number( "time", "gronwall_slack", 2.0 );
    detail::require_positive( "time", "gronwall_slack", c.gronwall_slack );

    auto preset = [&]( const std::string& prefix ) {
        FieldPreset f;
        f.kind = detail::preset_kind( "initial", prefix,
                                      in.word( "initial", prefix, "zero" ) );
        f.amplitude = in.number( "initial", prefix + "_amplitude", 0.0 );
        f.kx = in.integer( "initial", prefix + "_kx", 1 );
        f.ky = in.integer( "initial", prefix + "_ky", 1 );
        if ( f.kind == PresetKind::zero )
            f.amplitude = 0.0;
        return f;
    };
    c.u0 = preset( "u" );
    c.v0 = preset( "v" );
    for ( const auto& g : in.groups( "initial", "cracks", 6 ) )
    {
        CrackSegment s{ { g[0], g[1] }, { g[2], g[3] }, g[4], g[5] };
        detail::with_section( "initial", [&] { s.validate( d.domain ); } );
        c.cracks.push_back( s );
    }

    c.body.kind = detail::preset_kind(
        "body_force", "kind", in.word( "body_force", "kind", "zero" ) );
    c.body.amplitude = in.number( "body_force", "amplitude", 0.0 );
    c.body.ramp = in.number( "body_force", "ramp", 0.0 );
    c.body.kx = in.integer( "body_force", "kx", 1 );
    c.body.ky = in.integer( "body_force", "ky", 1 );
    if ( c.body.kind == PresetKind::zero )
        c.body = {};

    for ( const auto& g : in.groups( "nucleate", "points", 2 ) )
        c.nucleate_points.push_back( { g[0], g[1] } );
    c.directions = in.integer( "nucleate", "directions", 64 );
    if ( c.directions < 8 )
        throw ConfigError( "[nucleate] directions must be at least 8" );

    c.sweep_horizons = in.list( "sweep", "horizons" );
    for ( double e : c.sweep_horizons )
        detail::require_positive( "sweep", "horizons", e );
    c.sweep_ratio = in.number( "sweep", "horizon_ratio", 4.0 );
    if ( c.sweep_ratio < 3.0 )
        throw ConfigError( "[sweep] horizon_ratio must be >= 3" );
    c.samples = in.integer( "sweep", "samples", 10 );
    if ( c.samples < 1 )
        throw ConfigError( "[sweep] samples must be at least 1" );
    c.deltas = in.list( "sweep", "deltas" );
    for ( double e : c.deltas )
        detail::require_positive( "sweep", "deltas", e );
    c.sweep_reference = in.boolean( "sweep", "reference", true );

    c.wave_spacing = in.number( "wave", "spacing", 0.5 * d.spacing );
    detail::require_positive( "wave", "spacing", c.wave_spacing );
    c.wave_dt = in.number( "wave", "dt", 0.0 );
    detail::require_nonnegative( "wave", "dt", c.wave_dt );

    c.gamma_horizons = in.list( "gamma", "horizons" );
    for ( double e : c.gamma_horizons )
        detail::require_positive( "gamma", "horizons", e );
    c.gamma_ratio = in.number( "gamma", "horizon_ratio", 4.0 );
    if ( c.gamma_ratio < 3.0 )
        throw ConfigError( "[gamma] horizon_ratio must be >= 3" );

    c.out_dir = in.word( "output", "dir", "out" );
    c.snapshots = in.boolean( "output", "snapshots", true );

    in.reject_unknown();

    if ( m.dt == 0.0 )
        m.dt = resolved_dt( m, build_table( m ) );
    return c;
}

inline RunConfig parse_config_string( const std::string& text )
{
    std::istringstream is( text );
    boost::property_tree::ptree tree;
    try
    {
        boost::property_tree::read_ini( is, tree );
    }
    catch ( const boost::property_tree::ini_parser_error& e )
    {
        throw ConfigError( std::string( "config: " ) + e.what() );
    }
    return parse_config_tree( tree );
}

inline RunConfig parse_config( const std::filesystem::path& path )
{
    std::ifstream f( path );
    if ( !f )
        throw ConfigError( "cannot read config file " + path.string() );
    std::stringstream buf;
    buf << f.rdbuf();
    return parse_config_string( buf.str() );
}

// Resolved configuration in the input format; parsing it yields an equal
// RunConfig.
inline void write_resolved_config( std::ostream& os, const RunConfig& c )
{
    const auto& m = c.model;
    const auto num = format_number;
    auto preset = [&]( const std::string& prefix, const FieldPreset& f ) {
        os << prefix << " = " << to_string( f.kind ) << "\n"
           << prefix << "_amplitude = " << num( f.amplitude ) << "\n"
           << prefix << "_kx = " << f.kx << "\n"
           << prefix << "_ky = " << f.ky << "\n";
    };
    os << "[model]\n"
       << "rho = " << num( m.rho ) << "\n"
       << "f_prime_0 = " << num( m.potential.f_prime_0 ) << "\n"
       << "f_infinity = " << num( m.potential.f_infinity ) << "\n"
       << "profile = " << to_string( m.potential.profile ) << "\n"
       << "influence = " << to_string( m.influence.kind ) << "\n";
    if ( !m.influence.coefficients.empty() )
        os << "influence_coefficients = "
           << detail::join( m.influence.coefficients ) << "\n";
    os << "influence_bound = " << num( m.influence.bound_M ) << "\n\n"
       << "[domain]\n"
       << "horizon = " << num( m.domain.horizon ) << "\n"
       << "spacing = " << num( m.domain.spacing ) << "\n"
       << "x0 = " << num( m.domain.domain.x0 ) << "\n"
       << "y0 = " << num( m.domain.domain.y0 ) << "\n"
       << "x1 = " << num( m.domain.domain.x1 ) << "\n"
       << "y1 = " << num( m.domain.domain.y1 ) << "\n"
       << "collar_width = " << num( m.domain.collar_width ) << "\n\n"
       << "[time]\n"
       << "T = " << num( m.T ) << "\n"
       << "dt = " << num( m.dt ) << "\n"
       << "stride = " << c.stride << "\n"
       << "gronwall_slack = " << num( c.gronwall_slack ) << "\n\n"
       << "[initial]\n";
    preset( "u", c.u0 );
    preset( "v", c.v0 );
    if ( !c.cracks.empty() )
    {
        os << "cracks = ";
        for ( std::size_t i = 0; i < c.cracks.size(); ++i )
        {
            const auto& s = c.cracks[i];
            os << ( i ? "; " : "" ) << num( s.a.x ) << " " << num( s.a.y ) << " "
               << num( s.b.x ) << " " << num( s.b.y ) << " "
               << num( s.jump_height ) << " " << num( s.half_width );
        }
        os << "\n";
    }
    os << "\n[body_force]\n"
       << "kind = " << to_string( c.body.kind ) << "\n"
       << "amplitude = " << num( c.body.amplitude ) << "\n"
       << "ramp = " << num( c.body.ramp ) << "\n"
       << "kx = " << c.body.kx << "\n"
       << "ky = " << c.body.ky << "\n\n"
       << "[nucleate]\n";
    if ( !c.nucleate_points.empty() )
    {
        os << "points = ";
        for ( std::size_t i = 0; i < c.nucleate_points.size(); ++i )
            os << ( i ? "; " : "" ) << num( c.nucleate_points[i].x ) << " "
               << num( c.nucleate_points[i].y );
        os << "\n";
    }
    os << "directions = " << c.directions << "\n\n"
       << "[sweep]\n";
    if ( !c.sweep_horizons.empty() )
        os << "horizons = " << detail::join( c.sweep_horizons ) << "\n";
    os << "horizon_ratio = " << num( c.sweep_ratio ) << "\n"
       << "samples = " << c.samples << "\n";
    if ( !c.deltas.empty() )
        os << "deltas = " << detail::join( c.deltas ) << "\n";
    os << "reference = " << ( c.sweep_reference ? "true" : "false" ) << "\n\n"
       << "[wave]\n"
       << "spacing = " << num( c.wave_spacing ) << "\n"
       << "dt = " << num( c.wave_dt ) << "\n\n"
       << "[gamma]\n";
    if ( !c.gamma_horizons.empty() )
        os << "horizons = " << detail::join( c.gamma_horizons ) << "\n";
    os << "horizon_ratio = " << num( c.gamma_ratio ) << "\n\n"
       << "[output]\n"
       << "dir = " << c.out_dir << "\n"
       << "snapshots = " << ( c.snapshots ? "true" : "false" ) << "\n";
}

} // namespace pdfrac

#endif
