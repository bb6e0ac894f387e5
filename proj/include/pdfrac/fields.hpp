#ifndef PDFRAC_FIELDS_HPP
#define PDFRAC_FIELDS_HPP

#include <pdfrac/common.hpp>
#include <pdfrac/kernels.hpp>
#include <pdfrac/lattice.hpp>

#include <array>
#include <cmath>
#include <string_view>
#include <vector>

namespace pdfrac
{

/******************************************************************************
  Smooth analytic presets on the rectangle D. The mode preset is
  amplitude * sin(kx pi s) sin(ky pi t) in unit coordinates of D; it vanishes
  on the boundary of D.
******************************************************************************/
enum class PresetKind
{
    zero,
    mode,
    uniform
};

inline std::string_view to_string( PresetKind k )
{
    switch ( k )
    {
    case PresetKind::zero:
        return "zero";
    case PresetKind::mode:
        return "mode";
    default:
        return "uniform";
    }
}

struct FieldPreset
{
    PresetKind kind = PresetKind::zero;
    double amplitude = 0.0;
    int kx = 1;
    int ky = 1;

    static FieldPreset zero() { return {}; }
    static FieldPreset mode( double amplitude, int kx = 1, int ky = 1 )
    {
        return { PresetKind::mode, amplitude, kx, ky };
    }
    static FieldPreset uniform( double value )
    {
        return { PresetKind::uniform, value, 1, 1 };
    }

    double value( Vec2 x, const Rect& d ) const
    {
        switch ( kind )
        {
        case PresetKind::zero:
            return 0.0;
        case PresetKind::uniform:
            return amplitude;
        default:
        {
            const double s = ( x.x - d.x0 ) / d.width();
            const double t = ( x.y - d.y0 ) / d.height();
            return amplitude * std::sin( kx * pi * s ) * std::sin( ky * pi * t );
        }
        }
    }

    Vec2 gradient( Vec2 x, const Rect& d ) const
    {
        if ( kind != PresetKind::mode )
            return {};
        const double s = ( x.x - d.x0 ) / d.width();
        const double t = ( x.y - d.y0 ) / d.height();
        const double ax = kx * pi / d.width();
        const double ay = ky * pi / d.height();
        return { amplitude * ax * std::cos( kx * pi * s ) *
                     std::sin( ky * pi * t ),
                 amplitude * ay * std::sin( kx * pi * s ) *
                     std::cos( ky * pi * t ) };
    }

    // Laplacian eigenvalue: lap(value) = -lambda value for the mode preset.
    double laplacian_eigenvalue( const Rect& d ) const
    {
        const double ax = kx * pi / d.width();
        const double ay = ky * pi / d.height();
        return ax * ax + ay * ay;
    }

    friend bool operator==( const FieldPreset&, const FieldPreset& ) = default;
};

/******************************************************************************
  Body force b(t, x) = amplitude (1 + ramp t) shape(x), shape uniform or mode.
******************************************************************************/
struct BodyForceSpec
{
    PresetKind kind = PresetKind::zero;
    double amplitude = 0.0;
    double ramp = 0.0;
    int kx = 1;
    int ky = 1;

    bool is_zero() const
    {
        return kind == PresetKind::zero || amplitude == 0.0;
    }

    double shape( Vec2 x, const Rect& d ) const
    {
        return FieldPreset{ kind, 1.0, kx, ky }.value( x, d );
    }
    double value( double t, Vec2 x, const Rect& d ) const
    {
        return is_zero() ? 0.0
                         : amplitude * ( 1.0 + ramp * t ) * shape( x, d );
    }
    double rate( double, Vec2 x, const Rect& d ) const
    {
        return is_zero() ? 0.0 : amplitude * ramp * shape( x, d );
    }

    friend bool operator==( const BodyForceSpec&,
                            const BodyForceSpec& ) = default;
};

// Shape of b sampled on the grid (zero on the collar).
inline std::vector<double> sample_shape( const BodyForceSpec& b,
                                         const ParticleGrid& g )
{
    std::vector<double> out( g.count(), 0.0 );
    if ( b.is_zero() )
        return out;
    for ( auto p : g.interior )
        out[p] = b.shape( g.positions[p], g.domain );
    return out;
}

/******************************************************************************
  Prescribed jump data. A crack segment [a, b] with jump height H adds
  +H/2 on the left of a->b and -H/2 on the right, inside the rectangle
  spanned by the segment and half-width w normal to it. Points on the
  segment line get the mean value 0.
******************************************************************************/
struct Segment
{
    Vec2 a;
    Vec2 b;
    double length() const { return norm( b - a ); }
};

struct CrackSegment
{
    Vec2 a;
    Vec2 b;
    double jump_height = 1.0;
    double half_width = 0.1;

    double length() const { return norm( b - a ); }
    Vec2 tangent() const { return ( 1.0 / length() ) * ( b - a ); }
    Vec2 normal() const { return perp( tangent() ); }

    // Contribution to u at x.
    double contribution( Vec2 x ) const
    {
        const Vec2 r = x - a;
        const double s = dot( r, tangent() );
        const double d = dot( r, normal() );
        const double L = length();
        if ( s < 0.0 || s > L || std::abs( d ) > half_width )
            return 0.0;
        if ( std::abs( d ) <= 1e-12 * L )
            return 0.0;
        return d > 0.0 ? 0.5 * jump_height : -0.5 * jump_height;
    }

    std::array<Vec2, 4> band_corners() const
    {
        const Vec2 n = half_width * normal();
        return { a + n, b + n, b - n, a - n };
    }

    void validate( const Rect& d ) const
    {
        if ( !( length() > 0.0 ) )
            throw ConfigError( "crack segment must have positive length" );
        if ( !( half_width > 0.0 ) )
            throw ConfigError( "crack band half-width must be positive" );
        if ( !d.contains( a ) || !d.contains( b ) )
            throw ConfigError( "crack endpoints must lie inside the domain" );
        for ( const auto& c : band_corners() )
            if ( !d.contains( c ) )
                throw ConfigError( "crack band touches the collar" );
    }

    friend bool operator==( const CrackSegment&,
                            const CrackSegment& ) = default;
};

// Every curve across which the crack datum jumps: the segment itself and
// the outline of its band.
inline std::vector<Segment> jump_set( const CrackSegment& c )
{
    const auto q = c.band_corners();
    return { { c.a, c.b },
             { q[0], q[1] },
             { q[1], q[2] },
             { q[2], q[3] },
             { q[3], q[0] } };
}

} // namespace pdfrac

#endif
