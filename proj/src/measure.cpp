#include "denjoy/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "denjoy/io.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

real OrbitMeasure::arc_mass(std::int64_t i, std::int64_t j) const {
    if (i == j) return 0;
    return frac(phi.at(static_cast<std::size_t>(j)) - phi.at(static_cast<std::size_t>(i)));
}

real OrbitMeasure::max_phi_gap() const {
    real gap = 0;
    for (std::size_t k = 0; k < circle_order.size(); ++k) {
        const real a = phi[static_cast<std::size_t>(circle_order[k])];
        const real b = k + 1 < circle_order.size() ? phi[static_cast<std::size_t>(circle_order[k + 1])] : 1;
        gap = std::max(gap, b - a);
    }
    return gap;
}

RotationEstimate rho_for_measure(const CircleMap& map, real width_target, std::int64_t cap) {
    std::optional<RotationEstimate> best;
    for (std::int64_t depth = 8; depth <= 128; depth += 4) {
        try {
            const FareyResult r = rho_farey(map, depth, cap);
            best = r.estimate;
            if (r.estimate.rational || r.estimate.width() <= width_target) break;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::PrecisionBudgetExceeded || !best) throw;
            break;
        }
    }
    return *best;
}

OrbitMeasure conjugacy_values(const CircleMap& map, const RotationEstimate& rho, CirclePoint x0, std::int64_t N,
                              real tol, std::int64_t cap) {
    if (N < 1) fail(ErrorKind::InvalidArgument, "orbit measure needs N >= 1");
    if (static_cast<real>(N) * rho.width() > tol)
        fail(ErrorKind::PrecisionBudgetExceeded, "rho enclosure too wide: N * width = " +
                                                     fmt_real(static_cast<real>(N) * rho.width()) + " > " +
                                                     fmt_real(tol));
    OrbitMeasure om{map, rho, real(0.5) * (rho.lower + rho.upper), x0, {}, {}, {}};
    om.rho_mid = frac(om.rho_mid);
    om.orbit = iterate(map, x0, N, Direction::forward, cap);
    om.phi.resize(om.orbit.size());
    for (std::size_t i = 0; i < om.phi.size(); ++i) om.phi[i] = frac(static_cast<real>(i) * om.rho_mid);

    if (!has_rotation_order(om.orbit, om.rho_mid))
        fail(ErrorKind::OrderViolation, "orbit order differs from the rotation by rho = " + fmt_real(om.rho_mid));

    om.circle_order.resize(om.orbit.size());
    std::iota(om.circle_order.begin(), om.circle_order.end(), 0);
    std::sort(om.circle_order.begin(), om.circle_order.end(), [&](std::int64_t i, std::int64_t j) {
        return om.phi[static_cast<std::size_t>(i)] < om.phi[static_cast<std::size_t>(j)];
    });
    return om;
}

MeasureBounds phi_bracket(const OrbitMeasure& om, CirclePoint x) {
    const real x0 = om.x0.value();
    const real d = ccw_distance(x0, x.value());
    auto pos = [&](std::size_t k) {
        return ccw_distance(x0, om.orbit[static_cast<std::size_t>(om.circle_order[k])].value());
    };
    // last orbit point at or before x
    std::size_t lo = 0, hi = om.circle_order.size();
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (pos(mid) <= d ? lo : hi) = mid;
    }
    const real below = om.phi[static_cast<std::size_t>(om.circle_order[lo])];
    if (pos(lo) == d) return {below, below};
    const real above = lo + 1 < om.circle_order.size()
                           ? om.phi[static_cast<std::size_t>(om.circle_order[lo + 1])]
                           : real(1);
    return {below, above};
}

MeasureBounds measure_interval(const OrbitMeasure& om, const CircleInterval& interval) {
    if (interval.length >= 1) return {1, 1};
    const real dl = ccw_distance(om.x0.value(), interval.left.value());
    const MeasureBounds L = phi_bracket(om, interval.left);
    const MeasureBounds R = phi_bracket(om, interval.right());
    // arcs through x0 pick up a full turn
    const real turn = dl + interval.length >= 1 ? 1 : 0;
    MeasureBounds out{R.lower + turn - L.upper, R.upper + turn - L.lower};
    out.lower = std::clamp(out.lower, real(0), real(1));
    out.upper = std::clamp(out.upper, real(0), real(1));
    return out;
}

std::vector<ElementMass> partition_masses(const OrbitMeasure& om, const DynamicalPartition& part) {
    if (!(part.x0 == om.x0)) fail(ErrorKind::IndexMismatch, "partition and orbit measure use different x0");
    std::vector<ElementMass> out;
    out.reserve(part.elements.size());
    real total = 0;
    for (const PartitionElement& e : part.elements) {
        if (std::max(e.left_orbit, e.right_orbit) > om.size())
            fail(ErrorKind::IndexMismatch, "partition endpoint index beyond the orbit measure");
        const auto i = static_cast<std::size_t>(e.left_orbit);
        if (!(part.orbit.at(i) == om.orbit.at(i)))
            fail(ErrorKind::IndexMismatch, "partition orbit differs from the measure orbit");
        const real m = om.arc_mass(e.left_orbit, e.right_orbit);
        total += m;
        out.push_back({e, m, e.interval.length});
    }
    if (std::abs(total - 1) > 1e-10)
        fail(ErrorKind::InvariantViolation, "partition masses sum to " + fmt_real(total));
    return out;
}

real dist_to_nearest_int(std::int64_t q, real rho) {
    const real x = static_cast<real>(q) * rho;
    return std::abs(x - std::round(x));
}

real mass_identity(const ContinuedFraction& cf, real rho, int n) {
    // |q rho - p| rather than ||q rho||: at n = 1 the rank-0 mass is rho itself
    auto mass = [&](int k) {
        return std::abs(static_cast<real>(cf.q(k)) * rho - static_cast<real>(cf.p(k)));
    };
    return static_cast<real>(cf.q(n)) * mass(n - 1) + static_cast<real>(cf.q(n - 1)) * mass(n);
}

std::string masses_csv(int n, const std::vector<ElementMass>& masses) {
    std::ostringstream out;
    out << "n,rank,index,length,mass,density\n";
    for (const ElementMass& m : masses)
        out << n << ',' << m.element.rank_tag << ',' << m.element.index << ',' << fmt_real(m.length) << ','
            << fmt_real(m.mass) << ',' << fmt_real(m.density()) << '\n';
    return out.str();
}

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
