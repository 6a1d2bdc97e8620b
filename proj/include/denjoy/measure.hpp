#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "denjoy/maps.hpp"
#include "denjoy/partition.hpp"
#include "denjoy/rotation.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

// Invariant measure seen through one orbit: phi[i] = mu([x0, x_i]) = {i rho}.
struct OrbitMeasure {
    CircleMap map;
    RotationEstimate rho;
    real rho_mid = 0;
    CirclePoint x0;
    std::vector<CirclePoint> orbit;  // x_0 .. x_N
    std::vector<real> phi;
    // orbit indices sorted by ccw distance from x0 (phi increases along it)
    std::vector<std::int64_t> circle_order;

    std::int64_t size() const { return static_cast<std::int64_t>(orbit.size()) - 1; }
    // mu of the ccw arc from x_i to x_j
    real arc_mass(std::int64_t i, std::int64_t j) const;
    real max_phi_gap() const;
};

struct MeasureBounds {
    real lower = 0;
    real upper = 0;

    real width() const { return upper - lower; }
    bool contains(real x) const { return lower <= x && x <= upper; }
};

// rho enclosure for mass computations: Farey descent on the map until the
// width is below `width_target` or the orbit cap stops it
RotationEstimate rho_for_measure(const CircleMap& map, real width_target, std::int64_t cap = kDefaultOrbitCap);

// Throws OrderViolation if the orbit is not ordered like the rotation, and
// PrecisionBudgetExceeded if N * width(rho) > tol.
OrbitMeasure conjugacy_values(const CircleMap& map, const RotationEstimate& rho, CirclePoint x0, std::int64_t N,
                              real tol = 1e-6, std::int64_t cap = kDefaultOrbitCap);

MeasureBounds measure_interval(const OrbitMeasure& om, const CircleInterval& interval);
// bracket of phi at an arbitrary circle point, i.e. of mu([x0, x])
MeasureBounds phi_bracket(const OrbitMeasure& om, CirclePoint x);

struct ElementMass {
    PartitionElement element;
    real mass = 0;
    real length = 0;

    real density() const { return mass / length; }
};

std::vector<ElementMass> partition_masses(const OrbitMeasure& om, const DynamicalPartition& part);

// q_n |q_{n-1} rho - p_{n-1}| + q_{n-1} |q_n rho - p_n|; the norms ||q rho|| agree from n = 2 on
real mass_identity(const ContinuedFraction& cf, real rho, int n);
// ||q rho||
real dist_to_nearest_int(std::int64_t q, real rho);

// rows: n, rank, index, length, mass, density
std::string masses_csv(int n, const std::vector<ElementMass>& masses);

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
