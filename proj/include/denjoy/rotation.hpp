#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "denjoy/maps.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

struct Convergent {
    std::int64_t p = 0;
    std::int64_t q = 1;
};

// rho = [k1, k2, ...]; convergents[0] = 0/1, convergents[n] = p_n/q_n.
struct ContinuedFraction {
    std::vector<std::int64_t> quotients;
    std::vector<Convergent> convergents{Convergent{0, 1}};
    bool terminates = false;  // the expansion ended exactly (rational input)

    std::size_t depth() const { return quotients.size(); }
    std::int64_t k(std::size_t n) const { return quotients.at(n - 1); }
    // q_{-1} = 0 and p_{-1} = 1 by convention
    std::int64_t q(std::int64_t n) const { return n < 0 ? 0 : convergents.at(static_cast<std::size_t>(n)).q; }
    std::int64_t p(std::int64_t n) const { return n < 0 ? 1 : convergents.at(static_cast<std::size_t>(n)).p; }
    real value() const;
    void push(std::int64_t k);
    bool recursion_holds() const;
};

ContinuedFraction cf_from_quotients(const std::vector<std::int64_t>& quotients);

enum class RotationMethod { iterate, farey };

// Rotation number with a certified enclosure. All three numbers share one
// integer shift; value is reduced to [0, 1).
struct RotationEstimate {
    real value = 0;
    real lower = 0;
    real upper = 0;
    RotationMethod method = RotationMethod::farey;
    bool rational = false;
    Convergent fraction;  // the detected p/q when rational

    real width() const { return upper - lower; }
    bool contains(real rho) const;
};

bool enclosures_intersect(const RotationEstimate& a, const RotationEstimate& b);

struct FareyResult {
    RotationEstimate estimate;
    ContinuedFraction cf;
    Convergent left;   // Farey neighbours bracketing rho
    Convergent right;
    std::int64_t orbit_evaluations = 0;
};

RotationEstimate rho_iterate_estimate(const CircleMap& map, std::int64_t n,
                                      std::int64_t cap = kDefaultOrbitCap);
FareyResult rho_farey(const CircleMap& map, std::int64_t depth, std::int64_t cap = kDefaultOrbitCap);
ContinuedFraction cf_expand_convergents(real rho, std::size_t n_max);

struct TuneResult {
    real translation = 0;
    RotationEstimate enclosure;
    ContinuedFraction target;
    std::size_t bracket_index = 0;  // enclosure is [p_N/q_N, p_{N+1}/q_{N+1}] for this N
    int bisections = 0;
    real achieved_tol = 0;
};

TuneResult tune_translation(const CircleMap& family, const ContinuedFraction& target, real tol,
                            std::int64_t cap = kDefaultOrbitCap);
TuneResult tune_translation(const CircleMap& family, real target_rho, real tol,
                            std::int64_t cap = kDefaultOrbitCap);

// CF table rows: n, k_n, p_n, q_n, |rho - p_n/q_n|
std::string cf_table_csv(const ContinuedFraction& cf, real rho);

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
