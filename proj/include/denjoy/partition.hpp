#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "denjoy/maps.hpp"
#include "denjoy/rotation.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

// Counterclockwise arc [left, left + length]; length 1 is the whole circle.
struct CircleInterval {
    CirclePoint left;
    real length = 0;

    static CircleInterval between(CirclePoint from, CirclePoint to) {
        return {from, ccw_distance(from.value(), to.value())};
    }
    CirclePoint right() const { return CirclePoint(left.value() + length); }
    bool contains(CirclePoint x) const { return length >= 1 || ccw_distance(left.value(), x.value()) <= length; }
};

struct PartitionElement {
    CircleInterval interval;
    int rank_tag = 0;  // n - 1 or n
    std::int64_t index = 0;
    // endpoints as indices into the partition's orbit
    std::int64_t left_orbit = 0;
    std::int64_t right_orbit = 0;
};

struct DynamicalPartition {
    int n = 0;
    CirclePoint requested_x0;
    CirclePoint x0;  // after break-collision nudges
    int nudges = 0;
    std::int64_t q_n = 1;
    std::int64_t q_prev = 1;
    std::vector<CirclePoint> orbit;           // x_0 .. x_{q_n + q_{n-1} - 1}
    std::vector<PartitionElement> elements;   // in circle order starting at x0
    real total_length = 0;

    real max_length() const;
    real min_length() const;
    // element whose index-tag pair matches, or nullptr
    const PartitionElement* find(int rank_tag, std::int64_t index) const;
};

DynamicalPartition build_partition(const CircleMap& map, const ContinuedFraction& cf, CirclePoint x0,
                                   int n, std::int64_t cap = kDefaultOrbitCap);

struct RefinementReport {
    std::int64_t split_elements = 0;
    std::int64_t persisted_elements = 0;
    std::vector<std::int64_t> pieces;  // per rank-(n-1) element of the coarse partition
};

RefinementReport check_refinement(const DynamicalPartition& coarse, const DynamicalPartition& fine,
                                  const ContinuedFraction& cf);

// prod_{i < q} Df(x_i); checked against [e^-v, e^v]
real denjoy_product(const CircleMap& map, CirclePoint x0, std::int64_t q, real v);
// D(f^l)(x) as the product of Df along the orbit (right derivatives at breaks)
real orbit_derivative(const CircleMap& map, CirclePoint x, std::int64_t l);

struct DecayRow {
    int n = 0;
    real max_length = 0;
};

struct LogFit {
    real slope = 0;
    real intercept = 0;
};

std::vector<DecayRow> max_element_decay(const CircleMap& map, const ContinuedFraction& cf, CirclePoint x0,
                                        int n_max, std::int64_t cap = kDefaultOrbitCap);
// least-squares fit of log(max_length) against n over rows with n in [n_lo, n_hi]
LogFit fit_log_decay(const std::vector<DecayRow>& rows, int n_lo, int n_hi);

// True iff T^i(interval), 0 <= i < q_n, are pairwise disjoint. The endpoint
// characterization through T^{q_{n-1}} is evaluated too; disagreement throws.
bool is_qn_small(const CircleMap& map, const CircleInterval& interval, const ContinuedFraction& cf, int n,
                 std::int64_t cap = kDefaultOrbitCap);

// rows: n, rank_tag, index, left, length
std::string partition_csv(const DynamicalPartition& part);

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
