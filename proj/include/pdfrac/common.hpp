#ifndef PDFRAC_COMMON_HPP
#define PDFRAC_COMMON_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace pdfrac
{

struct Vec2
{
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+( Vec2 a, Vec2 b ) { return { a.x + b.x, a.y + b.y }; }
    friend Vec2 operator-( Vec2 a, Vec2 b ) { return { a.x - b.x, a.y - b.y }; }
    friend Vec2 operator*( double s, Vec2 a ) { return { s * a.x, s * a.y }; }
    friend bool operator==( Vec2 a, Vec2 b ) = default;
};

inline double dot( Vec2 a, Vec2 b ) { return a.x * b.x + a.y * b.y; }
inline double norm( Vec2 a ) { return std::hypot( a.x, a.y ); }
// Counter-clockwise rotation by pi/2.
inline Vec2 perp( Vec2 a ) { return { -a.y, a.x }; }

/******************************************************************************
  Errors. The CLI maps these onto exit statuses 1, 2 and 3.
******************************************************************************/
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

class IntegrationError : public NumericError
{
  public:
    IntegrationError( const std::string& what, std::size_t step )
        : NumericError( what + " (step " + std::to_string( step ) + ")" )
        , step_( step )
    {
    }
    std::size_t step() const { return step_; }

  private:
    std::size_t step_;
};

// A runtime check on a proven bound failed (e.g. the Gronwall energy bound).
class BoundViolation : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/******************************************************************************
  Threading. Work is split into contiguous chunks; every writer owns a
  disjoint index range, so results never depend on the thread count.
******************************************************************************/
namespace detail
{
inline int& thread_setting()
{
    static int n = 1;
    return n;
}
} // namespace detail

inline void set_num_threads( int n )
{
    detail::thread_setting() = std::max( 1, n );
}
inline int num_threads() { return detail::thread_setting(); }

template <class Fn>
void parallel_for( std::size_t n, Fn&& fn )
{
    const auto nt = static_cast<std::size_t>( num_threads() );
    if ( nt <= 1 || n < 2 * nt )
    {
        for ( std::size_t i = 0; i < n; ++i )
            fn( i );
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve( nt - 1 );
    const std::size_t chunk = ( n + nt - 1 ) / nt;
    for ( std::size_t t = 1; t < nt; ++t )
    {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min( n, lo + chunk );
        if ( lo >= hi )
            break;
        workers.emplace_back( [lo, hi, &fn] {
            for ( std::size_t i = lo; i < hi; ++i )
                fn( i );
        } );
    }
    for ( std::size_t i = 0; i < std::min( n, chunk ); ++i )
        fn( i );
}

// Pairwise summation in a fixed tree order.
inline double pairwise_sum( std::span<const double> v )
{
    if ( v.size() <= 16 )
    {
        double s = 0.0;
        for ( double x : v )
            s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum( v.first( half ) ) + pairwise_sum( v.subspan( half ) );
}

inline bool all_finite( std::span<const double> v )
{
    return std::all_of( v.begin(), v.end(),
                        []( double x ) { return std::isfinite( x ); } );
}

} // namespace pdfrac

#endif
