#include "denjoy/crossratio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include "denjoy/io.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

namespace {

real cr_from_gaps(real g12, real g23, real g34) {
    return (g12 * g34) / ((g12 + g23) * (g23 + g34));
}

void check_gaps(real g12, real g23, real g34, const std::string& where) {
    const real hull = g12 + g23 + g34;
    const real floor = 10 * kEps * hull;
    if (!(g12 > floor && g23 > floor && g34 > floor)) fail(ErrorKind::DegenerateQuadruple, where);
}

// on the circle the hull has to fit in one chart
void check_chart(const Quadruple& q) {
    if (!(q.hull() < 1)) fail(ErrorKind::DegenerateQuadruple, "hull wraps around the circle");
}

struct Located {
    real position;  // lift coordinate inside the hull
    BreakPoint point;
};

std::vector<Located> breaks_in_hull(const Quadruple& q, const CircleMap& map) {
    std::vector<Located> out;
    for (const BreakPoint& b : map.breaks()) {
        const real pos = q.z1 + ccw_distance(frac(q.z1), b.location.value());
        if (pos <= q.z4) out.push_back({pos, b});
    }
    return out;
}

}  // namespace

void Quadruple::validate() const {
    check_gaps(z2 - z1, z3 - z2, z4 - z3, "quadruple gaps below 10 eps of the hull");
}

real cross_ratio(const Quadruple& q) {
    q.validate();
    return cr_from_gaps(q.z2 - q.z1, q.z3 - q.z2, q.z4 - q.z3);
}

real distortion(const Quadruple& q, const CircleMap& map) {
    check_chart(q);
    return distortion(q, [&](real x) { return map.lift(x); });
}

real distortion_iterate(const Quadruple& q, const CircleMap& map, std::int64_t steps) {
    q.validate();
    check_chart(q);
    if (steps > kDefaultOrbitCap) fail(ErrorKind::PrecisionBudgetExceeded, "orbit exceeds cap");
    std::array<LiftPoint, 4> p;
    const std::array<real, 4> z{q.z1, q.z2, q.z3, q.z4};
    for (int i = 0; i < 4; ++i) {
        const real k = std::floor(z[i]);
        p[i] = {static_cast<std::int64_t>(k), z[i] - k};
    }
    for (std::int64_t s = 0; s < steps; ++s)
        for (auto& x : p) x = map.advance(x);
    auto gap = [&](int i, int j) {
        return static_cast<real>(p[j].turns - p[i].turns) + (p[j].offset - p[i].offset);
    };
    const real g12 = gap(0, 1), g23 = gap(1, 2), g34 = gap(2, 3);
    check_gaps(g12, g23, g34, "image quadruple degenerate");
    if (!(g12 + g23 + g34 < 1)) fail(ErrorKind::DegenerateQuadruple, "image hull wraps around the circle");
    return cr_from_gaps(g12, g23, g34) / cross_ratio(q);
}

real g_func(real x, real sigma) { return sigma * (1 + x) / (sigma + x); }

real f_func(real x, real t, real sigma) {
    const real a = sigma + (1 - sigma) * t;
    return a * (1 + x) / (a + x);
}

real f_func_right(real eta, real theta, real sigma) {
    const real a = 1 + (sigma - 1) * theta;
    return a * (1 + eta) / (a + sigma * eta);
}

NormalizedCoords normalized_coords(const Quadruple& q, std::optional<real> tracked) {
    NormalizedCoords c;
    c.xi = (q.z3 - q.z2) / (q.z2 - q.z1);
    c.eta = (q.z3 - q.z2) / (q.z4 - q.z3);
    if (tracked) {
        const real x = *tracked;
        if (q.z1 <= x && x <= q.z2) c.z = (q.z2 - x) / (q.z2 - q.z1);
        if (q.z3 <= x && x <= q.z4) c.theta = (x - q.z3) / (q.z4 - q.z3);
    }
    return c;
}

ClosedFormResult single_break_closed_form(const Quadruple& q, const CircleMap& map, BreakSide side, real k1_hat) {
    q.validate();
    const auto found = breaks_in_hull(q, map);
    if (found.size() != 1)
        fail(ErrorKind::BreakNotInStatedInterval,
             "hull holds " + std::to_string(found.size()) + " breaks, expected exactly one");
    const Located& b = found.front();
    ClosedFormResult r;
    r.sigma = b.point.sigma();
    const NormalizedCoords c = normalized_coords(q, b.position);
    if (side == BreakSide::left) {
        if (!c.z) fail(ErrorKind::BreakNotInStatedInterval, "break is not in [z1, z2]");
        r.position = *c.z;
        r.ratio = c.xi;
        r.predicted = f_func(c.xi, *c.z, r.sigma);
    } else {
        if (!c.theta) fail(ErrorKind::BreakNotInStatedInterval, "break is not in [z3, z4]");
        r.position = *c.theta;
        r.ratio = c.eta;
        r.predicted = f_func_right(c.eta, *c.theta, r.sigma);
    }
    r.actual = distortion(q, map);
    r.residual = std::abs(r.actual - r.predicted);
    r.d2_integral = map.abs_d2_integral(q.z1, q.z4);
    r.residual_bound = k1_hat * r.d2_integral;
    return r;
}

ChainResult distortion_chain(const Quadruple& q, const CircleMap& map, std::int64_t steps) {
    if (steps > kDefaultOrbitCap) fail(ErrorKind::PrecisionBudgetExceeded, "orbit exceeds cap");
    ChainResult out;
    out.factors.reserve(static_cast<std::size_t>(steps));
    out.images.reserve(static_cast<std::size_t>(steps) + 1);
    Quadruple cur = q.shifted(-std::floor(q.z1));
    real total = 1;
    for (std::int64_t s = 0; s < steps; ++s) {
        out.images.push_back(cur);
        try {
            cur.validate();
            check_chart(cur);
        } catch (const Error&) {
            fail(ErrorKind::DegenerateQuadruple, "chain degenerates at step " + std::to_string(s));
        }
        Quadruple next = map_quadruple(cur, [&](real x) { return map.lift(x); });
        const real factor = cr_from_gaps(next.z2 - next.z1, next.z3 - next.z2, next.z4 - next.z3) /
                            cr_from_gaps(cur.z2 - cur.z1, cur.z3 - cur.z2, cur.z4 - cur.z3);
        out.factors.push_back(factor);
        total *= factor;
        cur = next.shifted(-std::floor(next.z1));
    }
    out.images.push_back(cur);
    try {
        cur.validate();
        check_chart(cur);
    } catch (const Error&) {
        fail(ErrorKind::DegenerateQuadruple, "chain degenerates at step " + std::to_string(steps));
    }
    out.total = total;
    out.direct = distortion_iterate(q, map, steps);
    return out;
}

real smooth_bound_term(const Quadruple& q, const CircleMap& map) {
    const auto [lo, hi] = map.d2_range(q.z1, q.z4);
    const real integral = map.abs_d2_integral(q.z1, q.z4);
    return q.hull() * (hi - lo) + integral * integral;
}

Calibration calibrate_constants(const CircleMap& map, std::uint64_t seed, int samples) {
    Calibration cal;
    cal.samples = samples;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0, 1), share(0.2, 1), logh(-4, -1);

    auto random_gaps = [&](real h) {
        std::array<real, 3> g{share(rng), share(rng), share(rng)};
        const real s = g[0] + g[1] + g[2];
        for (auto& x : g) x *= h / s;
        return g;
    };

    real k_max = 0, c_max = 0;
    if (!map.breaks().empty()) {
        for (int i = 0, tries = 0; i < samples && tries < 100 * samples; ++tries) {
            const BreakPoint& b = map.breaks()[static_cast<std::size_t>(i) % map.breaks().size()];
            const BreakSide side = unit(rng) < 0.5 ? BreakSide::left : BreakSide::right;
            const auto g = random_gaps(std::pow(real(10), static_cast<real>(logh(rng))));
            const real u = 0.05 + 0.9 * unit(rng);  // break strictly inside its side interval
            const real bpos = b.location.value();
            real z1 = side == BreakSide::left ? bpos - u * g[0] : bpos - g[0] - g[1] - u * g[2];
            const Quadruple q{z1, z1 + g[0], z1 + g[0] + g[1], z1 + g[0] + g[1] + g[2]};
            if (breaks_in_hull(q, map).size() != 1) continue;
            const ClosedFormResult r = single_break_closed_form(q, map, side);
            if (r.d2_integral > 0) k_max = std::max(k_max, r.residual / r.d2_integral);
            ++i;
        }
    }
    for (int i = 0, tries = 0; i < samples && tries < 100 * samples; ++tries) {
        const auto g = random_gaps(std::pow(real(10), static_cast<real>(logh(rng))));
        const real z1 = unit(rng);
        const Quadruple q{z1, z1 + g[0], z1 + g[0] + g[1], z1 + g[0] + g[1] + g[2]};
        if (!breaks_in_hull(q, map).empty()) continue;
        const real term = smooth_bound_term(q, map);
        if (term > 0) c_max = std::max(c_max, std::abs(distortion(q, map) - 1) / term);
        ++i;
    }
    cal.k1_hat = 2 * k_max;
    cal.c1_hat = 2 * c_max;
    return cal;
}

std::string quadruple_csv_header() { return "z1,z2,z3,z4,cr,dist,predicted,residual,bound\n"; }

std::string quadruple_csv_row(const Quadruple& q, real cr, real dist, real predicted, real residual, real bound) {
    std::ostringstream out;
    out << fmt_real(q.z1) << ',' << fmt_real(q.z2) << ',' << fmt_real(q.z3) << ',' << fmt_real(q.z4) << ','
        << fmt_real(cr) << ',' << fmt_real(dist) << ',' << fmt_real(predicted) << ',' << fmt_real(residual) << ','
        << fmt_real(bound) << '\n';
    return out.str();
}

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
