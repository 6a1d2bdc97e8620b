#include "denjoy/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "denjoy/io.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

namespace {

constexpr real kNudge = real(1e-9);
constexpr int kNudgeRetries = 10;

real break_clearance() { return 1000 * kEps; }

bool orbit_avoids_breaks(const CircleMap& map, const std::vector<CirclePoint>& orbit) {
    if (map.breaks().empty()) return true;
    return std::all_of(orbit.begin(), orbit.end(), [&](CirclePoint x) {
        return map.distance_to_break(x.value()) > break_clearance();
    });
}

// Element with endpoints x_i and x_{i+q}; it points left of x_i for odd rank.
PartitionElement make_element(const std::vector<CirclePoint>& orbit, int rank, std::int64_t i, std::int64_t q,
                              int tag) {
    PartitionElement e;
    e.rank_tag = tag;
    e.index = i;
    if (rank % 2 != 0) {
        e.left_orbit = i + q;
        e.right_orbit = i;
    } else {
        e.left_orbit = i;
        e.right_orbit = i + q;
    }
    e.interval = CircleInterval::between(orbit[static_cast<std::size_t>(e.left_orbit)],
                                         orbit[static_cast<std::size_t>(e.right_orbit)]);
    return e;
}

}  // namespace

real DynamicalPartition::max_length() const {
    real m = 0;
    for (const auto& e : elements) m = std::max(m, e.interval.length);
    return m;
}

real DynamicalPartition::min_length() const {
    real m = 1;
    for (const auto& e : elements) m = std::min(m, e.interval.length);
    return m;
}

const PartitionElement* DynamicalPartition::find(int rank_tag, std::int64_t index) const {
    for (const auto& e : elements)
        if (e.rank_tag == rank_tag && e.index == index) return &e;
    return nullptr;
}

DynamicalPartition build_partition(const CircleMap& map, const ContinuedFraction& cf, CirclePoint x0, int n,
                                   std::int64_t cap) {
    if (n < 1 || static_cast<std::size_t>(n) > cf.depth())
        fail(ErrorKind::InvalidArgument, "rank " + std::to_string(n) + " outside the continued fraction");
    DynamicalPartition part;
    part.n = n;
    part.requested_x0 = x0;
    part.q_n = cf.q(n);
    part.q_prev = cf.q(n - 1);
    const std::int64_t len = part.q_n + part.q_prev;
    if (len > cap) fail(ErrorKind::PrecisionBudgetExceeded, "partition orbit exceeds cap");

    CirclePoint start = x0;
    for (int attempt = 0;; ++attempt) {
        part.orbit = iterate(map, start, len - 1, Direction::forward, cap);
        if (orbit_avoids_breaks(map, part.orbit)) break;
        if (attempt == kNudgeRetries)
            fail(ErrorKind::BreakCollision, "orbit keeps hitting a break after nudging x0");
        start = CirclePoint(start.value() + kNudge);
        ++part.nudges;
    }
    part.x0 = start;

    for (std::int64_t i = 0; i < part.q_n; ++i)
        part.elements.push_back(make_element(part.orbit, n - 1, i, part.q_prev, n - 1));
    for (std::int64_t j = 0; j < part.q_prev; ++j)
        part.elements.push_back(make_element(part.orbit, n, j, part.q_n, n));

    const real origin = part.x0.value();
    std::stable_sort(part.elements.begin(), part.elements.end(), [&](const auto& a, const auto& b) {
        return ccw_distance(origin, a.interval.left.value()) < ccw_distance(origin, b.interval.left.value());
    });

    // each element must end exactly where the next one starts
    const std::size_t m = part.elements.size();
    for (std::size_t k = 0; k < m; ++k) {
        const auto& cur = part.elements[k];
        const auto& next = part.elements[(k + 1) % m];
        if (cur.right_orbit != next.left_orbit)
            fail(ErrorKind::InvariantViolation,
                 "partition rank " + std::to_string(n) + " does not chain at element " + std::to_string(k) +
                     " (rotation number inconsistent with the continued fraction?)");
    }
    if (part.elements.front().left_orbit != 0)
        fail(ErrorKind::InvariantViolation, "partition does not start at x0");

    real total = 0;
    for (const auto& e : part.elements) total += e.interval.length;
    part.total_length = total;
    if (std::abs(total - 1) > static_cast<real>(part.q_n) * 10 * kEps)
        fail(ErrorKind::InvariantViolation, "partition lengths do not sum to 1");
    if (part.min_length() <= 1000 * kEps)
        fail(ErrorKind::PrecisionBudgetExceeded,
             "rank " + std::to_string(n) + " resolves elements below the numeric type; use the extended backend");
    return part;
}

RefinementReport check_refinement(const DynamicalPartition& coarse, const DynamicalPartition& fine,
                                  const ContinuedFraction& cf) {
    if (fine.n != coarse.n + 1) fail(ErrorKind::InvalidArgument, "refinement needs consecutive ranks");
    if (!(fine.x0 == coarse.x0)) fail(ErrorKind::InvalidArgument, "refinement needs the same base point");
    const int n = coarse.n;
    const std::int64_t qn = coarse.q_n, qp = coarse.q_prev;
    const std::int64_t k = cf.k(static_cast<std::size_t>(n) + 1);

    RefinementReport rep;
    for (const auto& e : coarse.elements) {
        if (e.rank_tag == n) {
            const PartitionElement* same = fine.find(n, e.index);
            if (!same || same->left_orbit != e.left_orbit || same->right_orbit != e.right_orbit)
                fail(ErrorKind::RefinementViolation, "rank-n element " + std::to_string(e.index) + " did not persist");
            ++rep.persisted_elements;
            continue;
        }
        const std::int64_t i = e.index;
        std::vector<const PartitionElement*> pieces;
        pieces.push_back(fine.find(n + 1, i));
        for (std::int64_t s = 0; s < k; ++s) pieces.push_back(fine.find(n, i + qp + s * qn));
        if (std::find(pieces.begin(), pieces.end(), nullptr) != pieces.end())
            fail(ErrorKind::RefinementViolation, "missing piece of element " + std::to_string(i));
        const real from = e.interval.left.value();
        std::sort(pieces.begin(), pieces.end(), [&](auto a, auto b) {
            return ccw_distance(from, a->interval.left.value()) < ccw_distance(from, b->interval.left.value());
        });
        std::int64_t at = e.left_orbit;
        for (auto p : pieces) {
            if (p->left_orbit != at)
                fail(ErrorKind::RefinementViolation, "element " + std::to_string(i) + " splits out of order");
            at = p->right_orbit;
        }
        if (at != e.right_orbit)
            fail(ErrorKind::RefinementViolation, "pieces of element " + std::to_string(i) + " do not reach its end");
        rep.pieces.push_back(static_cast<std::int64_t>(pieces.size()));
        ++rep.split_elements;
    }
    return rep;
}

real orbit_derivative(const CircleMap& map, CirclePoint x, std::int64_t l) {
    real log_sum = 0;
    for (std::int64_t i = 0; i < l; ++i) {
        log_sum += std::log(map.derivative(x.value()));
        x = map(x);
    }
    return std::exp(log_sum);
}

real denjoy_product(const CircleMap& map, CirclePoint x0, std::int64_t q, real v) {
    if (q > kDefaultOrbitCap) fail(ErrorKind::PrecisionBudgetExceeded, "orbit exceeds cap");
    real log_sum = 0;
    CirclePoint x = x0;
    for (std::int64_t i = 0; i < q; ++i) {
        if (!map.breaks().empty() && map.distance_to_break(x.value()) <= break_clearance())
            fail(ErrorKind::BreakCollision, "orbit point " + std::to_string(i) + " sits on a break");
        log_sum += std::log(map.derivative(x.value()));
        x = map(x);
    }
    // the bound is exact; allow only rounding in the log sum
    const real slack = 64 * kEps * static_cast<real>(q);
    if (std::abs(log_sum) > v + slack)
        fail(ErrorKind::InvariantViolation, "Denjoy product outside [e^-v, e^v]");
    return std::exp(log_sum);
}

std::vector<DecayRow> max_element_decay(const CircleMap& map, const ContinuedFraction& cf, CirclePoint x0,
                                        int n_max, std::int64_t cap) {
    std::vector<DecayRow> rows;
    for (int n = 1; n <= n_max; ++n) rows.push_back({n, build_partition(map, cf, x0, n, cap).max_length()});
    return rows;
}

LogFit fit_log_decay(const std::vector<DecayRow>& rows, int n_lo, int n_hi) {
    real sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    for (const auto& r : rows) {
        if (r.n < n_lo || r.n > n_hi) continue;
        const real x = r.n, y = std::log(r.max_length);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        cnt += 1;
    }
    if (cnt < 2) fail(ErrorKind::InvalidArgument, "need two ranks to fit a decay rate");
    LogFit fit;
    fit.slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / cnt;
    return fit;
}

bool is_qn_small(const CircleMap& map, const CircleInterval& interval, const ContinuedFraction& cf, int n,
                 std::int64_t cap) {
    if (n < 1 || static_cast<std::size_t>(n) > cf.depth()) fail(ErrorKind::InvalidArgument, "rank outside CF");
    const std::int64_t qn = cf.q(n), qp = cf.q(n - 1);
    if (std::max(qn, qp) > cap) fail(ErrorKind::PrecisionBudgetExceeded, "q_n exceeds orbit cap");
    if (!(interval.length > 0)) fail(ErrorKind::InvalidArgument, "empty interval");
    const real tol = 10 * kEps * static_cast<real>(qn);

    if (interval.length >= 1) return qn < 2;

    bool direct = true;
    {
        struct Image {
            real left;
            real length;
        };
        std::vector<Image> images;
        images.reserve(static_cast<std::size_t>(qn));
        real l = interval.left.value(), r = l + interval.length;
        real total = 0;
        for (std::int64_t i = 0; i < qn; ++i) {
            images.push_back({frac(l), r - l});
            total += r - l;
            const real k = std::floor(l);
            l -= k;
            r -= k;
            l = map.lift(l);
            r = map.lift(r);
        }
        std::sort(images.begin(), images.end(), [](const Image& a, const Image& b) { return a.left < b.left; });
        if (total > 1 + tol) direct = false;
        for (std::size_t k = 0; direct && k < images.size() && images.size() > 1; ++k) {
            const Image& a = images[k];
            const Image& b = images[(k + 1) % images.size()];
            if (ccw_distance(a.left, b.left) < a.length - tol) direct = false;
        }
    }

    // The interval is q_n-small iff it fits inside the rank-(n-1) generator
    // hanging off the appropriate endpoint.
    real bound;
    if (n % 2 != 0) {
        const real img = iterate_lift(map, interval.left.value(), qp, cap);
        bound = ccw_distance(interval.left.value(), img);
    } else {
        const real r = interval.right().value();
        const real img = iterate_lift(map, r, qp, cap);
        bound = ccw_distance(img, r);
    }
    const bool endpoint = interval.length <= bound;
    const bool borderline = std::abs(interval.length - bound) <= tol;
    if (!borderline && endpoint != direct)
        fail(ErrorKind::InvariantViolation, "q_n-smallness: endpoint test disagrees with image disjointness");
    return direct;
}

std::string partition_csv(const DynamicalPartition& part) {
    std::ostringstream out;
    out << "n,rank_tag,index,left,length\n";
    for (const auto& e : part.elements)
        out << part.n << ',' << e.rank_tag << ',' << e.index << ',' << fmt_real(e.interval.left.value()) << ','
            << fmt_real(e.interval.length) << '\n';
    return out.str();
}

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
