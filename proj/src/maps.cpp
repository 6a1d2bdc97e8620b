#include "denjoy/maps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "InvalidArgument";
        case ErrorKind::PrecisionBudgetExceeded: return "PrecisionBudgetExceeded";
        case ErrorKind::InvalidGeometry: return "InvalidGeometry";
        case ErrorKind::InfeasibleDerivatives: return "InfeasibleDerivatives";
        case ErrorKind::NotHomeomorphism: return "NotHomeomorphism";
        case ErrorKind::NotClassP: return "NotClassP";
        case ErrorKind::NotBracketed: return "NotBracketed";
        case ErrorKind::TolUnreachable: return "TolUnreachable";
        case ErrorKind::BreakCollision: return "BreakCollision";
        case ErrorKind::RefinementViolation: return "RefinementViolation";
        case ErrorKind::DegenerateQuadruple: return "DegenerateQuadruple";
        case ErrorKind::BreakNotInStatedInterval: return "BreakNotInStatedInterval";
        case ErrorKind::OrderViolation: return "OrderViolation";
        case ErrorKind::IndexMismatch: return "IndexMismatch";
        case ErrorKind::RankTooShallow: return "RankTooShallow";
        case ErrorKind::HypothesisNotCertified: return "HypothesisNotCertified";
        case ErrorKind::BracketingTooCoarse: return "BracketingTooCoarse";
        case ErrorKind::InvariantViolation: return "InvariantViolation";
        case ErrorKind::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

// ---------------------------------------------------------------------------
// Segment

real Segment::value_at(real x) const {
    const real u = x - x0;
    return y0 + d0 * u + real(0.5) * curvature() * u * u;
}

real Segment::derivative_at(real x) const {
    return d0 + curvature() * (x - x0);
}

real Segment::inverse_of(real y) const {
    const real w = y - y0;
    const real k = curvature();
    if (k == 0) return x0 + w / d0;
    // Root of k/2 u^2 + d0 u - w = 0 written without cancellation.
    const real disc = std::max(real(0), d0 * d0 + 2 * k * w);
    return x0 + 2 * w / (d0 + std::sqrt(disc));
}

// ---------------------------------------------------------------------------
// PiecewiseQuadratic

PiecewiseQuadratic::PiecewiseQuadratic(std::vector<Segment> segments)
    : segments_(std::move(segments)) {
    if (segments_.empty()) fail(ErrorKind::InvalidArgument, "piecewise function needs a segment");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const Segment& s = segments_[i];
        if (!(s.x1 > s.x0)) fail(ErrorKind::InvalidGeometry, "segment of non-positive length");
        if (i > 0 && segments_[i - 1].x1 != s.x0)
            fail(ErrorKind::InvalidGeometry, "segments are not contiguous");
    }
}

PiecewiseQuadratic PiecewiseQuadratic::from_knots(
    const std::vector<real>& knots, real y_start,
    const std::vector<std::pair<real, real>>& slopes) {
    if (knots.size() < 2 || slopes.size() + 1 != knots.size())
        fail(ErrorKind::InvalidArgument, "knot/slope count mismatch");
    std::vector<Segment> segs;
    segs.reserve(slopes.size());
    real y = y_start;
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        Segment s{knots[i], knots[i + 1], y, slopes[i].first, slopes[i].second};
        segs.push_back(s);
        y = s.end_value();
    }
    return PiecewiseQuadratic(std::move(segs));
}

std::size_t PiecewiseQuadratic::locate(real x) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                               [](real v, const Segment& s) { return v < s.x0; });
    if (it == segments_.begin()) return 0;
    return static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
}

std::size_t PiecewiseQuadratic::locate_value(real y) const {
    auto it = std::upper_bound(segments_.begin(), segments_.end(), y,
                               [](real v, const Segment& s) { return v < s.y0; });
    if (it == segments_.begin()) return 0;
    return static_cast<std::size_t>(std::distance(segments_.begin(), it)) - 1;
}

real PiecewiseQuadratic::operator()(real x) const {
    const Segment& first = segments_.front();
    const Segment& last = segments_.back();
    if (x < first.x0) return first.y0 + first.d0 * (x - first.x0);
    if (x > last.x1) return last.end_value() + last.d1 * (x - last.x1);
    return segments_[locate(x)].value_at(x);
}

real PiecewiseQuadratic::inverse(real y) const {
    const Segment& first = segments_.front();
    const Segment& last = segments_.back();
    if (y < first.y0) return first.x0 + (y - first.y0) / first.d0;
    const real y_end = last.end_value();
    if (y > y_end) return last.x1 + (y - y_end) / last.d1;
    const Segment& s = segments_[locate_value(y)];
    return std::clamp(s.inverse_of(y), s.x0, s.x1);
}

std::pair<real, real> PiecewiseQuadratic::derivatives(real x) const {
    const Segment& first = segments_.front();
    const Segment& last = segments_.back();
    if (x < first.x0) return {first.d0, first.d0};
    if (x > last.x1) return {last.d1, last.d1};
    if (x == last.x1) return {last.d1, last.d1};
    const std::size_t i = locate(x);
    const Segment& s = segments_[i];
    if (x == s.x0) {
        const real left = i > 0 ? segments_[i - 1].d1 : s.d0;
        return {left, s.d0};
    }
    const real d = s.derivative_at(x);
    return {d, d};
}

real PiecewiseQuadratic::second_derivative(real x) const {
    if (x < domain_begin() || x >= domain_end()) return 0;
    return segments_[locate(x)].curvature();
}

real PiecewiseQuadratic::abs_d2_integral(real lo, real hi) const {
    if (hi < lo) std::swap(lo, hi);
    real total = 0;
    for (const Segment& s : segments_) {
        const real l = std::max(lo, s.x0);
        const real h = std::min(hi, s.x1);
        if (h > l) total += std::abs(s.curvature()) * (h - l);
    }
    return total;
}

std::pair<real, real> PiecewiseQuadratic::d2_range(real lo, real hi) const {
    if (hi < lo) std::swap(lo, hi);
    bool any = false;
    real mn = 0, mx = 0;
    auto take = [&](real k) {
        if (!any) {
            mn = mx = k;
            any = true;
        } else {
            mn = std::min(mn, k);
            mx = std::max(mx, k);
        }
    };
    if (lo < domain_begin() || hi > domain_end()) take(0);
    for (const Segment& s : segments_) {
        if (std::min(hi, s.x1) > std::max(lo, s.x0)) take(s.curvature());
    }
    if (!any) take(0);
    return {mn, mx};
}

// ---------------------------------------------------------------------------
// CircleMap

std::string to_string(MapKind kind) {
    switch (kind) {
        case MapKind::rotation: return "rotation";
        case MapKind::pl_two_break: return "pl_two_break";
        case MapKind::pq_two_break: return "pq_two_break";
    }
    return "unknown";
}

MapKind map_kind_from_string(const std::string& s) {
    if (s == "rotation") return MapKind::rotation;
    if (s == "pl_two_break") return MapKind::pl_two_break;
    if (s == "pq_two_break") return MapKind::pq_two_break;
    fail(ErrorKind::ConfigError, "unknown map kind '" + s + "'");
}

CircleMap::CircleMap(MapParams params, PiecewiseQuadratic base, std::vector<BreakPoint> breaks)
    : params_(params), base_(std::move(base)), breaks_(std::move(breaks)) {
    if (base_.domain_begin() != 0 || base_.domain_end() != 1)
        fail(ErrorKind::InvalidGeometry, "base lift must be tabulated on [0, 1]");
}

CircleMap CircleMap::with_translation(real t) const {
    CircleMap copy = *this;
    copy.params_.translation = t;
    return copy;
}

real CircleMap::lift(real x) const {
    const real k = std::floor(x);
    return k + base_(x - k) + params_.translation;
}

real CircleMap::lift_inverse(real y) const {
    const real w = y - params_.translation;
    const real k = std::floor(w);
    return k + base_.inverse(w - k);
}

CirclePoint CircleMap::operator()(CirclePoint x) const {
    return CirclePoint(base_(x.value()) + params_.translation);
}

CirclePoint CircleMap::inverse(CirclePoint y) const {
    return CirclePoint(lift_inverse(y.value()));
}

LiftPoint CircleMap::advance(LiftPoint x) const {
    const real y = base_(x.offset) + params_.translation;
    real whole = std::floor(y);
    real rest = y - whole;
    if (rest >= real(1) - 2 * kEps) {
        rest = 0;
        whole += 1;
    }
    return {x.turns + static_cast<std::int64_t>(whole), rest};
}

std::pair<real, real> CircleMap::one_sided_derivatives(real x) const {
    const real r = x - std::floor(x);
    if (r == 0) {
        return {base_.segments().back().d1, base_.segments().front().d0};
    }
    return base_.derivatives(r);
}

real CircleMap::abs_d2_integral(real lo, real hi) const {
    if (hi < lo) std::swap(lo, hi);
    real total = 0;
    for (real k = std::floor(lo); k < hi; k += 1) {
        const real l = std::max(lo - k, real(0));
        const real h = std::min(hi - k, real(1));
        if (h > l) total += base_.abs_d2_integral(l, h);
    }
    return total;
}

std::pair<real, real> CircleMap::d2_range(real lo, real hi) const {
    if (hi < lo) std::swap(lo, hi);
    real mn = 0, mx = 0;
    bool any = false;
    for (real k = std::floor(lo); k < hi; k += 1) {
        const real l = std::max(lo - k, real(0));
        const real h = std::min(hi - k, real(1));
        if (h <= l) continue;
        auto [a, b] = base_.d2_range(l, h);
        if (!any) {
            mn = a;
            mx = b;
            any = true;
        } else {
            mn = std::min(mn, a);
            mx = std::max(mx, b);
        }
    }
    return {mn, mx};
}

std::vector<BreakPoint> CircleMap::breaks_in(real lo, real hi) const {
    std::vector<BreakPoint> out;
    for (const BreakPoint& b : breaks_) {
        if (hi - lo >= 1 || ccw_distance(lo, b.location.value()) <= hi - lo) out.push_back(b);
    }
    return out;
}

real CircleMap::distance_to_break(real x) const {
    real best = 1;
    for (const BreakPoint& b : breaks_) best = std::min(best, circle_distance(x, b.location.value()));
    return best;
}

bool CircleMap::operator==(const CircleMap& other) const {
    const MapParams& p = params_;
    const MapParams& q = other.params_;
    return p.kind == q.kind && p.a == q.a && p.c == q.c && p.slope_ratio == q.slope_ratio &&
           p.sigma_a == q.sigma_a && p.sigma_c == q.sigma_c && p.translation == q.translation;
}

// ---------------------------------------------------------------------------
// Constructors

namespace {

std::vector<real> circle_knots(real a, real c) {
    std::vector<real> knots{0, a, c, 1};
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    return knots;
}

}  // namespace

CircleMap make_rotation(real translation) {
    MapParams params;
    params.kind = MapKind::rotation;
    params.translation = translation;
    return CircleMap(params, PiecewiseQuadratic({Segment{0, 1, 0, 1, 1}}), {});
}

CircleMap make_pl_two_break(CirclePoint a, CirclePoint c, real slope_ratio, real translation) {
    if (a == c) fail(ErrorKind::InvalidGeometry, "break points must differ");
    if (!(slope_ratio > 0) || !std::isfinite(slope_ratio))
        fail(ErrorKind::InvalidGeometry, "slope ratio must be positive and finite");
    if (slope_ratio == 1) fail(ErrorKind::InvalidGeometry, "slope ratio 1 has no break");

    const real arc_ac = ccw_distance(a.value(), c.value());
    const real s2 = 1 / (slope_ratio * arc_ac + (1 - arc_ac));
    const real s1 = slope_ratio * s2;

    const std::vector<real> knots = circle_knots(a.value(), c.value());
    std::vector<std::pair<real, real>> slopes;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const real mid = real(0.5) * (knots[i] + knots[i + 1]);
        const real s = ccw_distance(a.value(), mid) < arc_ac ? s1 : s2;
        slopes.emplace_back(s, s);
    }

    MapParams params;
    params.kind = MapKind::pl_two_break;
    params.a = a.value();
    params.c = c.value();
    params.slope_ratio = slope_ratio;
    params.translation = translation;
    std::vector<BreakPoint> breaks{{a, s2, s1}, {c, s1, s2}};
    return CircleMap(params, PiecewiseQuadratic::from_knots(knots, 0, slopes), std::move(breaks));
}

CircleMap make_pq_two_break(CirclePoint a, CirclePoint c, real sigma_a, real sigma_c,
                            real translation) {
    if (a == c) fail(ErrorKind::InvalidGeometry, "break points must differ");
    if (!(sigma_a > 0) || !(sigma_c > 0) || !std::isfinite(sigma_a) || !std::isfinite(sigma_c))
        fail(ErrorKind::InfeasibleDerivatives, "jump ratios must be positive and finite");
    if (sigma_a == 1 || sigma_c == 1)
        fail(ErrorKind::InvalidGeometry, "a jump ratio of 1 is not a break");

    // Log-symmetric profile: Df_+(a) = sa^-1/2, Df_-(a) = sa^1/2, and the
    // same at c; Df is affine on each arc between the breaks. One positive
    // scale factor then closes the lift.
    const real arc_ac = ccw_distance(a.value(), c.value());
    const real arc_ca = 1 - arc_ac;
    const real sa = std::sqrt(sigma_a);
    const real sc = std::sqrt(sigma_c);
    real a_plus = 1 / sa, c_minus = sc, c_plus = 1 / sc, a_minus = sa;
    const real area = real(0.5) * (a_plus + c_minus) * arc_ac + real(0.5) * (c_plus + a_minus) * arc_ca;
    const real scale = 1 / area;
    a_plus *= scale;
    c_minus *= scale;
    c_plus *= scale;
    a_minus *= scale;
    if (!(a_plus > 0 && c_minus > 0 && c_plus > 0 && a_minus > 0))
        fail(ErrorKind::InfeasibleDerivatives, "closure forces a non-positive derivative");

    auto profile = [&](real start_offset_from_a, bool on_ac) {
        if (on_ac) return a_plus + (c_minus - a_plus) * (start_offset_from_a / arc_ac);
        return c_plus + (a_minus - c_plus) * (start_offset_from_a / arc_ca);
    };

    const std::vector<real> knots = circle_knots(a.value(), c.value());
    std::vector<std::pair<real, real>> slopes;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const real mid = real(0.5) * (knots[i] + knots[i + 1]);
        const bool on_ac = ccw_distance(a.value(), mid) < arc_ac;
        const real arc_start = on_ac ? a.value() : c.value();
        real off0 = ccw_distance(arc_start, knots[i]);
        const real arc_len = on_ac ? arc_ac : arc_ca;
        if (off0 >= arc_len) off0 = 0;
        const real off1 = off0 + (knots[i + 1] - knots[i]);
        slopes.emplace_back(profile(off0, on_ac), profile(off1, on_ac));
    }

    MapParams params;
    params.kind = MapKind::pq_two_break;
    params.a = a.value();
    params.c = c.value();
    params.sigma_a = sigma_a;
    params.sigma_c = sigma_c;
    params.translation = translation;
    std::vector<BreakPoint> breaks{{a, a_minus, a_plus}, {c, c_minus, c_plus}};
    return CircleMap(params, PiecewiseQuadratic::from_knots(knots, 0, slopes), std::move(breaks));
}

CircleMap make_map(const MapParams& p) {
    switch (p.kind) {
        case MapKind::rotation: return make_rotation(p.translation);
        case MapKind::pl_two_break:
            return make_pl_two_break(CirclePoint(p.a), CirclePoint(p.c), p.slope_ratio, p.translation);
        case MapKind::pq_two_break:
            return make_pq_two_break(CirclePoint(p.a), CirclePoint(p.c), p.sigma_a, p.sigma_c,
                                     p.translation);
    }
    fail(ErrorKind::InvalidArgument, "unknown map kind");
}

// ---------------------------------------------------------------------------
// Operations

real evaluate(const CircleMap& map, real x) { return map.lift(x); }

std::pair<real, real> one_sided_derivatives(const CircleMap& map, CirclePoint x) {
    return map.one_sided_derivatives(x.value());
}

std::vector<CirclePoint> iterate(const CircleMap& map, CirclePoint x0, std::int64_t n,
                                 Direction direction, std::int64_t cap) {
    if (n < 0) fail(ErrorKind::InvalidArgument, "orbit length must be non-negative");
    if (n > cap)
        fail(ErrorKind::PrecisionBudgetExceeded,
             "orbit of length " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
    std::vector<CirclePoint> orbit;
    orbit.reserve(static_cast<std::size_t>(n) + 1);
    orbit.push_back(x0);
    CirclePoint x = x0;
    for (std::int64_t i = 0; i < n; ++i) {
        x = direction == Direction::forward ? map(x) : map.inverse(x);
        orbit.push_back(x);
    }
    return orbit;
}

real iterate_lift(const CircleMap& map, real x, std::int64_t n, std::int64_t cap) {
    if (n > cap) fail(ErrorKind::PrecisionBudgetExceeded, "orbit exceeds cap");
    if (n < 0) {
        for (std::int64_t i = 0; i < -n; ++i) x = map.lift_inverse(x);
        return x;
    }
    const real whole = std::floor(x);
    LiftPoint p{static_cast<std::int64_t>(whole), x - whole};
    for (std::int64_t i = 0; i < n; ++i) p = map.advance(p);
    return p.value();
}

real contraction_rate(real v) { return 1 / std::sqrt(1 + std::exp(-v)); }

MapStats validate_p_homeo(const CircleMap& map) {
    const auto& segs = map.base().segments();
    MapStats stats;
    stats.c1 = segs.front().d0;
    stats.c2 = segs.front().d0;
    real v = 0;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Segment& s = segs[i];
        if (!(s.d0 > 0) || !(s.d1 > 0)) fail(ErrorKind::NotClassP, "non-positive one-sided derivative");
        stats.c1 = std::min({stats.c1, s.d0, s.d1});
        stats.c2 = std::max({stats.c2, s.d0, s.d1});
        v += std::abs(std::log(s.d1 / s.d0));
        const real left = i == 0 ? segs.back().d1 : segs[i - 1].d1;
        v += std::abs(std::log(left / s.d0));
    }

    std::vector<real> grid;
    constexpr int kGrid = 10'000;
    grid.reserve(kGrid + map.breaks().size() + segs.size());
    for (int i = 0; i < kGrid; ++i) grid.push_back(real(i) / kGrid);
    for (const BreakPoint& b : map.breaks()) grid.push_back(b.location.value());
    for (const Segment& s : segs) grid.push_back(s.x0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    real prev = map.lift(grid.front());
    for (std::size_t i = 1; i <= grid.size(); ++i) {
        const real x = i < grid.size() ? grid[i] : grid.front() + 1;
        const real y = map.lift(x);
        if (!(y > prev)) fail(ErrorKind::NotHomeomorphism, "lift is not strictly increasing");
        prev = y;
    }

    stats.v = v;
    stats.lambda = contraction_rate(v);
    if (map.kind() == MapKind::pl_two_break || map.breaks().empty()) {
        // Piecewise constant log Df telescopes around the circle.
        stats.sigma_product = 1;
    } else {
        real prod = 1;
        for (const BreakPoint& b : map.breaks()) prod *= b.sigma();
        stats.sigma_product = prod;
    }
    return stats;
}

bool has_rotation_order(const std::vector<CirclePoint>& orbit, real rho) {
    const std::size_t n = orbit.size();
    if (n < 3) return true;
    const real x0 = orbit.front().value();
    std::vector<std::size_t> by_position(n), by_rotation(n);
    std::iota(by_position.begin(), by_position.end(), 0);
    std::iota(by_rotation.begin(), by_rotation.end(), 0);
    std::vector<real> pos(n), rot(n);
    for (std::size_t i = 0; i < n; ++i) {
        pos[i] = ccw_distance(x0, orbit[i].value());
        rot[i] = frac(static_cast<real>(i) * rho);
    }
    std::sort(by_position.begin(), by_position.end(),
              [&](std::size_t i, std::size_t j) { return pos[i] < pos[j]; });
    std::sort(by_rotation.begin(), by_rotation.end(),
              [&](std::size_t i, std::size_t j) { return rot[i] < rot[j]; });
    return by_position == by_rotation;
}

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
