#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

// The library is compiled once per numeric backend. Each build lives in its
// own inline namespace so both can be linked into the same executable.
#if defined(DENJOY_EXTENDED_PRECISION)
#define DENJOY_BACKEND_NS ext
#else
#define DENJOY_BACKEND_NS dbl
#endif

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

#if defined(DENJOY_EXTENDED_PRECISION)
using real = long double;
inline constexpr const char* kBackendName = "extended";
#else
using real = double;
inline constexpr const char* kBackendName = "double";
#endif

inline constexpr real kEps = std::numeric_limits<real>::epsilon();

/// Maximum number of map evaluations a single call may spend on one orbit.
inline constexpr std::int64_t kDefaultOrbitCap = 2'000'000;

/// x mod 1 in [0, 1). Results within 2 eps of 1 are clamped to 0.
inline real frac(real x) {
    real r = x - std::floor(x);
    if (r >= real(1) - 2 * kEps) r = 0;
    return r;
}

/// Signed representative of x mod 1 in [-1/2, 1/2).
inline real centered_frac(real x) {
    real r = x - std::floor(x + real(0.5));
    return r;
}

/// Length of the counterclockwise arc from `from` to `to`, in [0, 1).
inline real ccw_distance(real from, real to) { return frac(to - from); }

/// Length of the shorter arc between two circle points.
inline real circle_distance(real x, real y) {
    real d = ccw_distance(x, y);
    return d < real(0.5) ? d : real(1) - d;
}

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
