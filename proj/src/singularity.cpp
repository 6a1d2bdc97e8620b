#include "denjoy/singularity.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <numeric>

#include "denjoy/io.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

namespace {

// f^steps applied to the four points, integer turns cancelled against z1
Quadruple image(const CircleMap& map, const Quadruple& q, std::int64_t steps) {
    const std::array<real, 4> z{q.z1, q.z2, q.z3, q.z4};
    std::array<LiftPoint, 4> p;
    for (int i = 0; i < 4; ++i) {
        const real k = std::floor(z[i]);
        p[i] = {static_cast<std::int64_t>(k), z[i] - k};
    }
    for (std::int64_t s = 0; s < steps; ++s)
        for (auto& x : p) x = map.advance(x);
    auto rel = [&](int i) { return static_cast<real>(p[i].turns - p[0].turns) + (p[i].offset - p[0].offset); };
    const real base = p[0].offset;
    return {base, base + rel(1), base + rel(2), base + rel(3)};
}

// lift coordinate of circle point b measured from the start of q, allowing b
// to sit a hair before z1
real locate(const Quadruple& q, real b) {
    real d = ccw_distance(frac(q.z1), b);
    if (d > real(0.5)) d -= 1;
    return q.z1 + d;
}

bool covers(const Quadruple& q, real b) {
    const real d = ccw_distance(frac(q.z1), b);
    return d <= q.hull();
}

real median(std::vector<real> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : real(0.5) * (v[m - 1] + v[m]);
}

[[noreturn]] void rethrow_with(const Error& e, const std::string& where) { fail(e.kind(), where + ": " + e.detail()); }

}  // namespace

real zeta0_value(real sigma_a, real sigma_c, real v) {
    const real prod = sigma_a * sigma_c;
    const real den = 2 * std::exp(v) * std::abs(prod - sigma_a);
    if (den == 0) return 1;
    return std::min(std::abs(prod - 1) / den, real(1));
}

real calibrate_r6(real sigma_a, real sigma_c) {
    real worst = 0;
    for (int i = 0; i <= 20; ++i) {
        const real xi_l = 10 * std::pow(real(2), i);
        for (int j = 0; j <= 20; ++j) {
            const real xi_p = 10 * std::pow(real(2), j);
            for (int k = 0; k <= 20; ++k) {
                const real z = real(k) / 20;
                const real A = sigma_c + (1 - sigma_c) * z;
                const real phi2 = (1 + xi_l) / (sigma_a + xi_l) * (1 + xi_p) / (A + xi_p);
                worst = std::max(worst, std::abs(phi2 - 1) / (1 / xi_l + 1 / xi_p));
            }
        }
    }
    return 2 * worst;
}

RegularCoverParams cover_params(real sigma_a, real sigma_c, real v) {
    RegularCoverParams p;
    p.sigma_a = sigma_a;
    p.sigma_c = sigma_c;
    p.v = v;
    const real prod = sigma_a * sigma_c;
    p.regular = std::abs(prod - 1) > 1e3 * kEps;
    if (!p.regular) return p;  // C0 = zeta0 = 1
    p.zeta0 = zeta0_value(sigma_a, sigma_c, v);
    p.r6_hat = calibrate_r6(sigma_a, sigma_c);
    const real m_sigma = std::max(prod, sigma_c);
    p.C0 = std::max(4 * p.r6_hat * std::exp(v) * m_sigma / std::abs(prod - 1), real(1));
    return p;
}

RegularCoverParams cover_params(const CircleMap& map) {
    const MapStats stats = validate_p_homeo(map);
    if (map.breaks().size() != 2) {
        RegularCoverParams p;
        p.v = stats.v;
        return p;
    }
    return cover_params(map.breaks()[0].sigma(), map.breaks()[1].sigma(), stats.v);
}

std::string to_string(CoverCase c) {
    switch (c) {
        case CoverCase::a_only: return "a_only";
        case CoverCase::c_outside_U: return "c_outside_U";
        case CoverCase::c_in_U_left: return "c_in_U_left";
        case CoverCase::c_in_U_right: return "c_in_U_right";
    }
    return "?";
}

CoverTriple regular_cover_triple(const CircleMap& map, const ContinuedFraction& cf, CirclePoint x0, int n,
                                 const RegularCoverParams& params, std::int64_t cap) {
    const auto& breaks = map.breaks();
    if (!breaks.empty() && breaks.size() != 2)
        fail(ErrorKind::InvalidArgument, "cover triples need a map with two breaks");
    const DynamicalPartition part = build_partition(map, cf, x0, n, cap);
    const std::int64_t qn = cf.q(n), qp = cf.q(n - 1);

    CoverTriple t;
    t.n = n;
    t.q_n = qn;

    // generator hull: the two elements meeting at x0
    const CircleInterval hull{part.elements.back().interval.left,
                              part.elements.back().interval.length + part.elements.front().interval.length};
    if (breaks.empty()) {
        t.abar = part.x0.value();
    } else {
        const auto back = iterate(map, breaks[0].location, qn - 1, Direction::backward, cap);
        for (std::size_t l = 0; l < back.size(); ++l) {
            if (hull.contains(back[l])) {
                t.l_index = static_cast<std::int64_t>(l);
                t.abar = hull.left.value() + ccw_distance(hull.left.value(), back[l].value());
                break;
            }
        }
        if (t.l_index < 0) fail(ErrorKind::InvariantViolation, "no preimage of a_b in the generator hull");
    }

    const real fwd = iterate_lift(map, t.abar, qp, cap);
    const real bwd = iterate_lift(map, t.abar, -qp, cap);
    t.d_n = real(0.5) * std::min(circle_distance(frac(t.abar), frac(fwd)), circle_distance(frac(bwd), frac(t.abar)));
    t.l_V = std::exp(-params.v) * t.d_n / params.C0;
    t.l_U = params.zeta0 * t.l_V;

    std::optional<real> offset;  // cbar - abar
    if (breaks.size() == 2) {
        const auto back = iterate(map, breaks[1].location, qn - 1, Direction::backward, cap);
        for (std::size_t p = 0; p < back.size(); ++p) {
            const real s = centered_frac(back[p].value() - t.abar);
            if (std::abs(s) < real(0.5) * t.l_V && (!offset || std::abs(s) < std::abs(*offset))) {
                offset = s;
                t.p_index = static_cast<std::int64_t>(p);
            }
        }
    }

    const real a = t.abar, V = t.l_V, U = t.l_U, C0 = params.C0;
    if (!offset) {
        t.case_tag = CoverCase::a_only;
    } else {
        t.cbar = a + *offset;
        if (std::abs(*offset) > real(0.5) * U) t.case_tag = CoverCase::c_outside_U;
        else if (*offset <= 0) t.case_tag = CoverCase::c_in_U_left;
        else t.case_tag = CoverCase::c_in_U_right;
    }
    switch (t.case_tag) {
        case CoverCase::a_only:
        case CoverCase::c_outside_U: t.z = {a - U / 4, a, a + U / 4, a + U / 2}; break;
        case CoverCase::c_in_U_left: t.z = {a - V / 2, a, a + C0 * V / 2, a + C0 * V}; break;
        case CoverCase::c_in_U_right: t.z = {a - C0 * V, a - C0 * V / 2, a, a + V / 2}; break;
    }
    const real g12 = t.z.z2 - t.z.z1, g23 = t.z.z3 - t.z.z2, g34 = t.z.z4 - t.z.z3;
    if (std::min({g12, g23, g34}) < 1e6 * kEps)
        fail(ErrorKind::RankTooShallow, "triple sub-intervals of length " + fmt_real(std::min({g12, g23, g34})) +
                                            " at n = " + std::to_string(n));

    if (t.case_tag == CoverCase::c_in_U_right) {
        t.ratio0 = g23 / g34;
        t.position0 = (*t.cbar - t.z.z3) / g34;
    } else {
        t.ratio0 = g23 / g12;
        t.position0 = t.case_tag == CoverCase::c_in_U_left ? (t.z.z2 - *t.cbar) / g12 : 0;
    }

    // audit: q_n-smallness and the break hits along the first q_n images
    t.qn_small = is_qn_small(map, CircleInterval{CirclePoint(t.z.z1), t.z.hull()}, cf, n, cap);
    {
        std::array<LiftPoint, 2> ends;
        for (int i = 0; i < 2; ++i) {
            const real z = i == 0 ? t.z.z1 : t.z.z4;
            const real k = std::floor(z);
            ends[i] = {static_cast<std::int64_t>(k), z - k};
        }
        for (std::int64_t j = 0; j < qn; ++j) {
            const real len = static_cast<real>(ends[1].turns - ends[0].turns) + (ends[1].offset - ends[0].offset);
            const Quadruple span{ends[0].offset, 0, 0, ends[0].offset + len};
            if (breaks.size() == 2) {
                if (covers(span, breaks[0].location.value())) t.a_hits.push_back(j);
                if (covers(span, breaks[1].location.value())) t.c_hits.push_back(j);
            }
            for (auto& e : ends) e = map.advance(e);
        }
    }

    // comparability of the sub-intervals, their T^{q_n} images and the offsets from x0
    {
        const Quadruple im = image(map, t.z, qn);
        const std::array<real, 6> lens{g12, g23, g34, im.z2 - im.z1, im.z3 - im.z2, im.z4 - im.z3};
        const auto [lo, hi] = std::minmax_element(lens.begin(), lens.end());
        t.r1 = *hi / *lo;
        const real base = part.x0.value();
        for (real z : {t.z.z1, t.z.z2, t.z.z3, t.z.z4, im.z1, im.z2, im.z3, im.z4})
            t.r1 = std::max(t.r1, circle_distance(base, frac(z)) / g12);
    }

    if (!breaks.empty()) {
        const bool a_once = t.a_hits.size() == 1 && t.a_hits[0] == t.l_index;
        bool c_ok = false;
        if (t.case_tag == CoverCase::c_in_U_left || t.case_tag == CoverCase::c_in_U_right)
            c_ok = t.c_hits.size() == 1 && t.c_hits[0] == t.p_index;
        else
            c_ok = t.c_hits.empty();
        if (!t.qn_small || !a_once || !c_ok)
            fail(ErrorKind::InvariantViolation,
                 "cover triple at n = " + std::to_string(n) + " (" + to_string(t.case_tag) +
                     ") fails its audit: qn_small=" + std::to_string(t.qn_small) +
                     ", a hits=" + std::to_string(t.a_hits.size()) + ", c hits=" + std::to_string(t.c_hits.size()));
        const bool in_U = t.case_tag == CoverCase::c_in_U_left || t.case_tag == CoverCase::c_in_U_right;
        t.certified = params.regular && in_U && t.l_index != t.p_index && t.ratio0 >= params.C0 * (1 - 1e-9) &&
                      t.position0 >= 0 && t.position0 <= params.zeta0 * (1 + 1e-9);
    }
    return t;
}

real gf_gap(const RegularCoverParams& params, real xi_l, real xi_p, real z_p, bool certified) {
    if (params.regular && !certified)
        fail(ErrorKind::HypothesisNotCertified, "G F gap requested without certified hypotheses");
    const real gap = std::abs(g_func(xi_l, params.sigma_a) * f_func(xi_p, z_p, params.sigma_c) - 1);
    if (params.regular && gap < params.gap_bound())
        fail(ErrorKind::InvariantViolation, "|G F - 1| = " + fmt_real(gap) + " below " + fmt_real(params.gap_bound()));
    return gap;
}

real gf_gap_right(const RegularCoverParams& params, real eta_l, real eta_p, real theta_p, bool certified) {
    if (params.regular && !certified)
        fail(ErrorKind::HypothesisNotCertified, "G F gap requested without certified hypotheses");
    const real gap = std::abs(g_func(eta_l, 1 / params.sigma_a) * f_func_right(eta_p, theta_p, params.sigma_c) - 1);
    if (params.regular && gap < params.gap_bound())
        fail(ErrorKind::InvariantViolation, "|G F - 1| = " + fmt_real(gap) + " below " + fmt_real(params.gap_bound()));
    return gap;
}

namespace {

// normalized coordinates at the hits; position_p stays 0 unless c is covered
GapEvaluation break_coordinates(const CircleMap& map, const CoverTriple& t) {
    GapEvaluation g;
    const bool right = t.case_tag == CoverCase::c_in_U_right;
    auto ratio = [&](const Quadruple& q) {
        return right ? (q.z3 - q.z2) / (q.z4 - q.z3) : (q.z3 - q.z2) / (q.z2 - q.z1);
    };
    const Quadruple ql = image(map, t.z, t.l_index);
    g.ratio_l = ratio(ql);
    if (t.p_index >= 0 && (t.case_tag == CoverCase::c_in_U_left || right)) {
        const Quadruple qp = image(map, t.z, t.p_index);
        g.ratio_p = ratio(qp);
        const real c = locate(qp, map.breaks()[1].location.value());
        g.position_p = right ? (c - qp.z3) / (qp.z4 - qp.z3) : (qp.z2 - c) / (qp.z2 - qp.z1);
        g.position_p = std::clamp(g.position_p, real(0), real(1));
    }
    return g;
}

}  // namespace

GapEvaluation triple_gf_gap(const CircleMap& map, const CoverTriple& triple, const RegularCoverParams& params) {
    const bool in_U = triple.case_tag == CoverCase::c_in_U_left || triple.case_tag == CoverCase::c_in_U_right;
    if (!in_U || triple.l_index < 0 || triple.p_index < 0)
        fail(ErrorKind::HypothesisNotCertified, "triple does not cover both breaks");
    GapEvaluation g = break_coordinates(map, triple);
    g.bound = params.gap_bound();
    g.gap = triple.case_tag == CoverCase::c_in_U_right
                ? gf_gap_right(params, g.ratio_l, g.ratio_p, g.position_p, triple.certified)
                : gf_gap(params, g.ratio_l, g.ratio_p, g.position_p, triple.certified);
    return g;
}

real predicted_break_gap(const CircleMap& map, const CoverTriple& triple, const RegularCoverParams& params) {
    if (triple.l_index < 0) return 0;
    const GapEvaluation g = break_coordinates(map, triple);
    switch (triple.case_tag) {
        case CoverCase::a_only:
        case CoverCase::c_outside_U: return std::abs(g_func(g.ratio_l, params.sigma_a) - 1);
        case CoverCase::c_in_U_left:
            return std::abs(g_func(g.ratio_l, params.sigma_a) * f_func(g.ratio_p, g.position_p, params.sigma_c) - 1);
        case CoverCase::c_in_U_right:
            return std::abs(g_func(g.ratio_l, 1 / params.sigma_a) *
                                f_func_right(g.ratio_p, g.position_p, params.sigma_c) -
                            1);
    }
    return 0;
}

DistortionRow qn_distortion_row(const CircleMap& map, const CoverTriple& triple) {
    const ChainResult c = distortion_chain(triple.z, map, triple.q_n);
    DistortionRow r;
    r.n = triple.n;
    r.q_n = triple.q_n;
    r.case_tag = triple.case_tag;
    r.chain = c.total;
    r.direct = c.direct;
    r.gap = std::abs(c.total - 1);
    if (std::abs(c.total / c.direct - 1) > 1e-10)
        fail(ErrorKind::InvariantViolation, "chained distortion " + fmt_real(c.total) + " differs from direct " +
                                                fmt_real(c.direct) + " at n = " + std::to_string(triple.n));
    for (std::size_t j = 0; j < c.factors.size(); ++j) {
        const auto i = static_cast<std::int64_t>(j);
        if (i == triple.l_index || i == triple.p_index) continue;
        r.off_break_max = std::max(r.off_break_max, std::abs(c.factors[j] - 1));
    }
    return r;
}

DistortionExperiment qn_distortion_experiment(const CircleMap& map, const ContinuedFraction& cf, CirclePoint x0,
                                              int n_lo, int n_hi, const RegularCoverParams& params,
                                              std::int64_t cap) {
    if (n_lo < 1 || n_hi < n_lo) fail(ErrorKind::InvalidArgument, "bad n range");
    DistortionExperiment out;
    for (int n = n_lo; n <= n_hi; ++n)
        out.rows.push_back(qn_distortion_row(map, regular_cover_triple(map, cf, x0, n, params, cap)));
    const int upper = n_lo + (n_hi - n_lo + 1) / 2;
    bool first = true;
    for (const auto& r : out.rows) {
        if (r.n < upper) continue;
        out.empirical_constant = first ? r.gap : std::min(out.empirical_constant, r.gap);
        first = false;
    }
    return out;
}

ProbeResult conjugacy_distortion_probe(const OrbitMeasure& om, const CoverTriple& triple) {
    auto brackets = [&](const Quadruple& q) {
        const std::array<real, 4> z{q.z1, q.z2, q.z3, q.z4};
        std::array<MeasureBounds, 4> b;
        for (int i = 0; i < 4; ++i) {
            b[i] = phi_bracket(om, CirclePoint(z[i]));
            // unwrap across phi = 0 relative to the first point
            if (i > 0 && b[i].lower < b[0].lower - real(0.5)) {
                b[i].lower += 1;
                b[i].upper += 1;
            }
        }
        for (int i = 0; i < 3; ++i)
            if (!(b[i + 1].lower > b[i].upper))
                fail(ErrorKind::BracketingTooCoarse, "orbit points do not separate the triple endpoints");
        return b;
    };
    auto cr = [](real a, real b, real c, real d) { return (b - a) * (d - c) / ((c - a) * (d - b)); };
    auto enclosure = [&](const std::array<MeasureBounds, 4>& b, real base) {
        real lo = 0, hi = 0;
        for (int mask = 0; mask < 16; ++mask) {
            std::array<real, 4> p;
            for (int i = 0; i < 4; ++i) p[i] = (mask >> i) & 1 ? b[i].upper : b[i].lower;
            const real v = cr(p[0], p[1], p[2], p[3]) / base;
            lo = mask == 0 ? v : std::min(lo, v);
            hi = mask == 0 ? v : std::max(hi, v);
        }
        return MeasureBounds{lo, hi};
    };

    const Quadruple fz = image(om.map, triple.z, triple.q_n);
    const real cr_z = cross_ratio(triple.z), cr_fz = cross_ratio(fz);
    const auto bz = brackets(triple.z);
    const auto bfz = brackets(fz);

    ProbeResult r;
    r.dist_phi = enclosure(bz, cr_z);
    r.dist_phi_qn = enclosure(bfz, cr_fz);
    r.dist_fqn = cr_fz / cr_z;

    std::array<real, 4> mid;
    for (int i = 0; i < 4; ++i) mid[i] = real(0.5) * (bz[i].lower + bz[i].upper);
    const real shift = frac(static_cast<real>(triple.q_n) * om.rho_mid);
    r.shift_identity_error = std::abs(cr(mid[0] + shift, mid[1] + shift, mid[2] + shift, mid[3] + shift) -
                                      cr(mid[0], mid[1], mid[2], mid[3]));
    const real lo = r.dist_phi.lower / r.dist_phi_qn.upper, hi = r.dist_phi.upper / r.dist_phi_qn.lower;
    r.consistent = lo * (1 - 1e-12) <= r.dist_fqn && r.dist_fqn <= hi * (1 + 1e-12);
    return r;
}

LorenzCurve mass_length_curve(const std::vector<ElementMass>& masses) {
    std::vector<std::size_t> order(masses.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        const real di = masses[i].density(), dj = masses[j].density();
        if (di != dj) return di > dj;
        if (masses[i].element.rank_tag != masses[j].element.rank_tag)
            return masses[i].element.rank_tag < masses[j].element.rank_tag;
        return masses[i].element.index < masses[j].element.index;
    });
    real total_len = 0, total_mass = 0;
    for (const auto& m : masses) {
        total_len += m.length;
        total_mass += m.mass;
    }
    LorenzCurve c;
    c.points.emplace_back(0, 0);
    real len = 0, mass = 0;
    bool reached = false;
    for (std::size_t k : order) {
        len += masses[k].length;
        mass += masses[k].mass;
        c.points.emplace_back(len / total_len, mass / total_mass);
        if (!reached && mass / total_mass >= real(0.9)) {
            c.lorenz_90_length = len / total_len;
            reached = true;
        }
    }
    return c;
}

LorenzCurve mass_length_curve(const OrbitMeasure& om, const DynamicalPartition& part) {
    return mass_length_curve(partition_masses(om, part));
}

SameOrbitSolution solve_same_orbit(const MapParams& family, const ContinuedFraction& target, int m, real tune_tol,
                                   std::int64_t cap) {
    if (m < 1) fail(ErrorKind::InvalidArgument, "same-orbit power must be positive");
    if (family.kind == MapKind::rotation) fail(ErrorKind::InvalidArgument, "rotations have no breaks");
    const real a = frac(family.a);

    auto build = [&](real c_lift) {
        MapParams p = family;
        p.a = a;
        p.c = frac(c_lift);
        const CircleMap f = make_map(p);
        return f.with_translation(tune_translation(f, target, tune_tol, cap).translation);
    };
    // f^m(a) - c, both measured ccw from a
    auto defect = [&](real c_lift, CircleMap* out) {
        const CircleMap f = build(c_lift);
        const real y = iterate_lift(f, a, m, cap);
        if (out) *out = f;
        return ccw_distance(a, frac(y)) - (c_lift - a);
    };

    const int grid = 32;
    real lo = 0, hi = 0;
    bool found = false;
    real prev = defect(a + real(1) / grid, nullptr);
    for (int k = 2; k < grid && !found; ++k) {
        const real c = a + real(k) / grid;
        const real d = defect(c, nullptr);
        if (prev > 0 && d <= 0) {
            lo = c - real(1) / grid;
            hi = c;
            found = true;
        }
        prev = d;
    }
    if (!found) fail(ErrorKind::NotBracketed, "no sign change of f^m(a) - c over the circle");

    SameOrbitSolution s{make_rotation(0), 0, 0, 0};
    while (hi - lo > 1e-13 && s.steps < 80) {
        const real mid = real(0.5) * (lo + hi);
        (defect(mid, nullptr) > 0 ? lo : hi) = mid;
        ++s.steps;
    }
    CircleMap f = make_rotation(0);
    const real c = real(0.5) * (lo + hi);
    defect(c, &f);
    s.map = f;
    s.c = frac(c);
    s.residual = circle_distance(frac(iterate_lift(f, a, m, cap)), s.c);
    return s;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::singular_evidence: return "SINGULAR_EVIDENCE";
        case Verdict::ac_baseline: return "AC_BASELINE";
        case Verdict::no_evidence: return "NO_EVIDENCE";
    }
    return "?";
}

bool lorenz_trend_down(const std::vector<real>& values, const VerdictThresholds& t) {
    int violations = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] < values[i - 1]) continue;
        ++violations;
        if (values[i] > values[i - 1] * (1 + t.trend_violation_size)) return false;
    }
    return violations <= t.trend_violations;
}

SingularityReport singularity_report(const SingularityConfig& cfg) {
    if (cfg.n_lo < 1 || cfg.n_hi < cfg.n_lo) fail(ErrorKind::InvalidArgument, "bad n range");
    SingularityReport rep;
    rep.x0 = cfg.x0;

    CircleMap map = make_map(cfg.map);
    try {
        if (cfg.same_orbit_m > 0) {
            map = solve_same_orbit(cfg.map, cfg.target, cfg.same_orbit_m, cfg.tune_tol, cfg.cap).map;
        } else if (cfg.tune) {
            map = map.with_translation(tune_translation(map, cfg.target, cfg.tune_tol, cfg.cap).translation);
        }
    } catch (const Error& e) {
        rethrow_with(e, "tune");
    }
    rep.map = map.params();
    rep.translation = map.translation();

    ContinuedFraction cf = cfg.target;
    try {
        rep.stats = validate_p_homeo(map);
        rep.params = map.breaks().size() == 2 ? cover_params(map) : cover_params(1, 1, rep.stats.v);
        rep.rho = rho_for_measure(map, 1e-14, cfg.cap);
        if (!cfg.tune && cfg.same_orbit_m == 0) cf = cf_expand_convergents(rep.rho.value, 40);
    } catch (const Error& e) {
        rethrow_with(e, "setup");
    }
    if (cf.depth() < static_cast<std::size_t>(cfg.n_hi) + 1)
        fail(ErrorKind::RankTooShallow, "rotation number CF shorter than n_hi + 1");
    for (std::size_t i = 1; i <= std::min<std::size_t>(cf.depth(), static_cast<std::size_t>(cfg.n_hi) + 1); ++i)
        rep.cf_prefix.push_back(cf.k(i));

    const OrbitMeasure probe_om = [&] {
        try {
            // as long as the rho enclosure allows
            std::int64_t N = cfg.probe_orbit;
            if (rep.rho.width() > 0)
                N = std::min<std::int64_t>(N, static_cast<std::int64_t>(std::floor(cfg.measure_tol / rep.rho.width())));
            return conjugacy_values(map, rep.rho, cfg.x0, std::max<std::int64_t>(N, 1), cfg.measure_tol, cfg.cap);
        } catch (const Error& e) {
            rethrow_with(e, "probe measure");
        }
    }();

    auto run_n = [&](int n) {
        SingularityRow row;
        row.n = n;
        row.q_n = cf.q(n);
        std::string stage = "partition";
        try {
            const DynamicalPartition part = build_partition(map, cf, cfg.x0, n, cfg.cap);
            row.max_length = part.max_length();
            stage = "masses";
            const OrbitMeasure om = conjugacy_values(map, rep.rho, part.x0, row.q_n + cf.q(n - 1), cfg.measure_tol,
                                                     cfg.cap);
            row.curve = mass_length_curve(om, part);
            row.lorenz_90_length = row.curve.lorenz_90_length;
            stage = "triple";
            const CoverTriple t = regular_cover_triple(map, cf, cfg.x0, n, rep.params, cfg.cap);
            row.case_tag = t.case_tag;
            row.certified = t.certified;
            stage = "gf gap";
            row.gf_gap = t.certified ? triple_gf_gap(map, t, rep.params).gap : predicted_break_gap(map, t, rep.params);
            stage = "distortion";
            row.dist_qn_gap = qn_distortion_row(map, t).gap;
            stage = "probe";
            try {
                row.probe = conjugacy_distortion_probe(probe_om, t);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::BracketingTooCoarse) throw;
            }
        } catch (const Error& e) {
            rethrow_with(e, "n = " + std::to_string(n) + ", " + stage);
        }
        return row;
    };

    if (cfg.parallel) {
        std::vector<std::future<SingularityRow>> jobs;
        for (int n = cfg.n_lo; n <= cfg.n_hi; ++n) jobs.push_back(std::async(std::launch::async, run_n, n));
        for (auto& j : jobs) rep.rows.push_back(j.get());
    } else {
        for (int n = cfg.n_lo; n <= cfg.n_hi; ++n) rep.rows.push_back(run_n(n));
    }

    std::vector<real> gaps, lorenz;
    const int upper = cfg.n_lo + (cfg.n_hi - cfg.n_lo + 1) / 2;
    bool first = true;
    rep.ac_like = true;
    for (const auto& r : rep.rows) {
        gaps.push_back(r.dist_qn_gap);
        lorenz.push_back(r.lorenz_90_length);
        if (r.n >= upper) {
            rep.empirical_constant = first ? r.dist_qn_gap : std::min(rep.empirical_constant, r.dist_qn_gap);
            first = false;
        }
        if (!(r.dist_qn_gap < cfg.thresholds.ac_gap) ||
            !(std::abs(r.lorenz_90_length - real(0.9)) <= 2 / static_cast<real>(r.q_n)))
            rep.ac_like = false;
    }
    rep.median_gap = median(gaps);
    rep.gaps_bounded =
        rep.empirical_constant > 0 && rep.empirical_constant >= cfg.thresholds.gap_floor_fraction * rep.median_gap;
    rep.trend_down = lorenz_trend_down(lorenz, cfg.thresholds);
    if (rep.ac_like) rep.verdict = Verdict::ac_baseline;
    else if (rep.gaps_bounded && rep.trend_down) rep.verdict = Verdict::singular_evidence;
    else rep.verdict = Verdict::no_evidence;
    return rep;
}

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
