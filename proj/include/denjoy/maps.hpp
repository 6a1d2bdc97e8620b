#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "denjoy/error.hpp"
#include "denjoy/real.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

/// A point of S^1 = R/Z, stored as its representative in [0, 1).
class CirclePoint {
public:
    CirclePoint() = default;
    /// Reduces a lift coordinate mod 1.
    explicit CirclePoint(real lift_coordinate) : value_(frac(lift_coordinate)) {}

    real value() const noexcept { return value_; }

    friend bool operator==(CirclePoint, CirclePoint) = default;

private:
    real value_ = 0;
};

struct BreakPoint {
    CirclePoint location;
    real d_minus = 1;  // left derivative of the lift
    real d_plus = 1;   // right derivative of the lift

    /// Jump ratio Df_-(x_b) / Df_+(x_b).
    real sigma() const { return d_minus / d_plus; }
};

/// One piece of a C^1-by-parts increasing function whose derivative is
/// affine on [x0, x1]: Df goes from d0 at x0 to d1 at x1.
struct Segment {
    real x0 = 0;
    real x1 = 1;
    real y0 = 0;
    real d0 = 1;
    real d1 = 1;

    real length() const { return x1 - x0; }
    /// Constant second derivative on the piece.
    real curvature() const { return (d1 - d0) / (x1 - x0); }
    real value_at(real x) const;
    real derivative_at(real x) const;
    real inverse_of(real y) const;
    real end_value() const { return value_at(x1); }
};

/// Strictly increasing continuous function on the real line that is
/// piecewise quadratic (piecewise linear derivative) on a finite list of
/// contiguous segments, extended affinely outside them.
class PiecewiseQuadratic {
public:
    PiecewiseQuadratic() = default;
    explicit PiecewiseQuadratic(std::vector<Segment> segments);

    /// Builds a function from knots, the value at the first knot, and the
    /// one-sided derivatives (right derivative at start, left derivative at
    /// end) of each piece. slopes.size() == knots.size() - 1.
    static PiecewiseQuadratic from_knots(const std::vector<real>& knots, real y_start,
                                         const std::vector<std::pair<real, real>>& slopes);

    real operator()(real x) const;
    real inverse(real y) const;
    /// (left derivative, right derivative) at x.
    std::pair<real, real> derivatives(real x) const;
    /// Right-sided second derivative.
    real second_derivative(real x) const;
    /// Exact integral of |D^2 f| over [lo, hi].
    real abs_d2_integral(real lo, real hi) const;
    /// (min, max) of D^2 f over pieces meeting (lo, hi).
    std::pair<real, real> d2_range(real lo, real hi) const;

    const std::vector<Segment>& segments() const { return segments_; }
    real domain_begin() const { return segments_.front().x0; }
    real domain_end() const { return segments_.back().x1; }

private:
    std::size_t locate(real x) const;
    std::size_t locate_value(real y) const;

    std::vector<Segment> segments_;
};

enum class MapKind { rotation, pl_two_break, pq_two_break };

std::string to_string(MapKind kind);
MapKind map_kind_from_string(const std::string& s);

/// Constructor parameters, kept so a map can be serialized and rebuilt.
struct MapParams {
    MapKind kind = MapKind::rotation;
    real a = 0;
    real c = 0.5;
    real slope_ratio = 2;
    real sigma_a = 2;
    real sigma_c = 0.8;
    real translation = 0;
};

/// Lift with integer part kept separately, so long orbits do not lose
/// fractional precision.
struct LiftPoint {
    std::int64_t turns = 0;
    real offset = 0;  // in [0, 1)

    real value() const { return static_cast<real>(turns) + offset; }
};

/// Orientation-preserving circle homeomorphism f_t = g + t where g is a
/// degree-one lift with g(0) = 0. Immutable after construction.
class CircleMap {
public:
    CircleMap(MapParams params, PiecewiseQuadratic base, std::vector<BreakPoint> breaks);

    MapKind kind() const { return params_.kind; }
    const MapParams& params() const { return params_; }
    real translation() const { return params_.translation; }
    const std::vector<BreakPoint>& breaks() const { return breaks_; }
    const PiecewiseQuadratic& base() const { return base_; }

    /// Same map with a different translation parameter.
    CircleMap with_translation(real t) const;

    /// Lift evaluation f(x).
    real lift(real x) const;
    real lift_inverse(real y) const;
    CirclePoint operator()(CirclePoint x) const;
    CirclePoint inverse(CirclePoint y) const;
    LiftPoint advance(LiftPoint x) const;

    /// (Df_-(x), Df_+(x)) at a lift coordinate.
    std::pair<real, real> one_sided_derivatives(real x) const;
    /// Derivative away from breaks; the right derivative at a break.
    real derivative(real x) const { return one_sided_derivatives(x).second; }
    /// Exact integral of |D^2 f| over the lift interval [lo, hi].
    real abs_d2_integral(real lo, real hi) const;
    /// (min, max) of D^2 f over [lo, hi], with hi - lo < 1.
    std::pair<real, real> d2_range(real lo, real hi) const;
    /// Breaks whose circle position lies in the lift interval [lo, hi].
    std::vector<BreakPoint> breaks_in(real lo, real hi) const;
    /// Distance on the circle from x to the nearest break, or 1 without breaks.
    real distance_to_break(real x) const;

    bool operator==(const CircleMap& other) const;

private:
    MapParams params_;
    PiecewiseQuadratic base_;
    std::vector<BreakPoint> breaks_;
};

struct MapStats {
    real v = 0;              // Var(log Df)
    real lambda = 0;         // (1 + e^{-v})^{-1/2}
    real sigma_product = 1;  // product of jump ratios
    real c1 = 0;             // min Df
    real c2 = 0;             // max Df
};

enum class Direction { forward, backward };

CircleMap make_rotation(real translation);
CircleMap make_pl_two_break(CirclePoint a, CirclePoint c, real slope_ratio, real translation);
CircleMap make_pq_two_break(CirclePoint a, CirclePoint c, real sigma_a, real sigma_c,
                            real translation);
CircleMap make_map(const MapParams& params);

real evaluate(const CircleMap& map, real x);
std::pair<real, real> one_sided_derivatives(const CircleMap& map, CirclePoint x);
std::vector<CirclePoint> iterate(const CircleMap& map, CirclePoint x0, std::int64_t n,
                                 Direction direction = Direction::forward,
                                 std::int64_t cap = kDefaultOrbitCap);
/// f^n applied to a lift coordinate.
real iterate_lift(const CircleMap& map, real x, std::int64_t n,
                  std::int64_t cap = kDefaultOrbitCap);
MapStats validate_p_homeo(const CircleMap& map);

/// lambda = (1 + e^{-v})^{-1/2}.
real contraction_rate(real v);

/// True iff the orbit is ordered on the circle exactly like {x0 + i rho}.
bool has_rotation_order(const std::vector<CirclePoint>& orbit, real rho);

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
