#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "denjoy/crossratio.hpp"
#include "denjoy/maps.hpp"
#include "denjoy/measure.hpp"
#include "denjoy/partition.hpp"
#include "denjoy/rotation.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

struct RegularCoverParams {
    real C0 = 1;
    real zeta0 = 1;
    real v = 0;
    real sigma_a = 1;
    real sigma_c = 1;
    real r6_hat = 0;    // calibrated expansion constant behind C0, 0 when unused
    bool regular = false;  // sigma_a * sigma_c != 1

    real gap_bound() const { return std::abs(sigma_a * sigma_c - 1) / 4; }
};

real zeta0_value(real sigma_a, real sigma_c, real v);
// 2 x max over a fixed grid (xi >= 10) of |Phi2 - 1| / (1/xi_l + 1/xi_p)
real calibrate_r6(real sigma_a, real sigma_c);
RegularCoverParams cover_params(real sigma_a, real sigma_c, real v);
// sigma_a, sigma_c from the map's two breaks (in construction order), v from validate_p_homeo
RegularCoverParams cover_params(const CircleMap& map);

enum class CoverCase { a_only, c_outside_U, c_in_U_left, c_in_U_right };
std::string to_string(CoverCase c);

struct CoverTriple {
    Quadruple z;
    CoverCase case_tag = CoverCase::a_only;
    int n = 0;
    std::int64_t q_n = 0;
    std::int64_t l_index = -1;  // a_b = T^l(abar); -1 for maps without breaks
    std::int64_t p_index = -1;  // c_b = T^p(cbar) when cbar is in V
    real abar = 0;              // lift coordinate, z sits around it
    std::optional<real> cbar;
    real d_n = 0;
    real l_V = 0;
    real l_U = 0;

    // audit
    bool qn_small = false;
    std::vector<std::int64_t> a_hits;  // j < q_n with a_b in T^j[z1, z4]
    std::vector<std::int64_t> c_hits;
    real ratio0 = 0;     // xi(0), or eta(0) in the right-hand case
    real position0 = 0;  // z(0), or theta(0); 0 when c is not covered
    real r1 = 0;         // comparability constant of the sub-intervals and their T^{q_n} images
    bool certified = false;  // cover hypotheses hold: both breaks once, ratio0 >= C0, position0 <= zeta0
};

// Triple around the preimage of a_b in the generator hull of xi_n(x0).
// Maps without breaks get the same construction anchored at x0.
CoverTriple regular_cover_triple(const CircleMap& map, const ContinuedFraction& cf, CirclePoint x0, int n,
                                 const RegularCoverParams& params, std::int64_t cap = kDefaultOrbitCap);

// |G(xi_l) F(xi_p, z_p) - 1|. For regular params the caller must certify the
// hypotheses and the result is checked against |sigma_a sigma_c - 1| / 4.
real gf_gap(const RegularCoverParams& params, real xi_l, real xi_p, real z_p, bool certified = true);
// mirrored form for a_b at z3: G(eta_l; 1/sigma_a) F_right(eta_p, theta_p; sigma_c)
real gf_gap_right(const RegularCoverParams& params, real eta_l, real eta_p, real theta_p, bool certified = true);

struct GapEvaluation {
    real ratio_l = 0;     // xi(l) or eta(l)
    real ratio_p = 0;
    real position_p = 0;  // z(p) or theta(p)
    real gap = 0;
    real bound = 0;
};

// Normalized coordinates at the two break hits of a certified triple and the
// resulting G F gap.
GapEvaluation triple_gf_gap(const CircleMap& map, const CoverTriple& triple, const RegularCoverParams& params);
// Closed-form prediction for the break factors of any triple: G F for
// certified triples, the single G factor when only a_b is covered.
real predicted_break_gap(const CircleMap& map, const CoverTriple& triple, const RegularCoverParams& params);

struct DistortionRow {
    int n = 0;
    std::int64_t q_n = 0;
    CoverCase case_tag = CoverCase::a_only;
    real gap = 0;             // |Dist(z; f^{q_n}) - 1|
    real chain = 1;
    real direct = 1;
    real off_break_max = 0;   // max |factor - 1| over steps without a break hit
};

struct DistortionExperiment {
    std::vector<DistortionRow> rows;
    real empirical_constant = 0;  // min gap over the upper half of the n range
};

// Throws InvariantViolation if chain and direct values differ by more than 1e-10 (relative).
DistortionRow qn_distortion_row(const CircleMap& map, const CoverTriple& triple);
DistortionExperiment qn_distortion_experiment(const CircleMap& map, const ContinuedFraction& cf, CirclePoint x0,
                                              int n_lo, int n_hi, const RegularCoverParams& params,
                                              std::int64_t cap = kDefaultOrbitCap);

struct ProbeResult {
    MeasureBounds dist_phi;     // Dist(z; T_phi)
    MeasureBounds dist_phi_qn;  // Dist(T^{q_n} z; T_phi)
    real dist_fqn = 1;          // Dist(z; f^{q_n})
    real shift_identity_error = 0;  // |Cr(phi(z) + q_n rho) - Cr(phi(z))|
    bool consistent = false;    // dist_fqn inside dist_phi / dist_phi_qn
};

// Throws BracketingTooCoarse when orbit points do not separate the endpoints.
ProbeResult conjugacy_distortion_probe(const OrbitMeasure& om, const CoverTriple& triple);

struct LorenzCurve {
    std::vector<std::pair<real, real>> points;  // (length fraction, mass fraction), starts at (0, 0)
    real lorenz_90_length = 0;
};

LorenzCurve mass_length_curve(const std::vector<ElementMass>& masses);
LorenzCurve mass_length_curve(const OrbitMeasure& om, const DynamicalPartition& part);

// Break position c with c = f^m(a) for the pq or pl family, translation
// re-tuned to the target at every step.
struct SameOrbitSolution {
    CircleMap map;
    real c = 0;
    real residual = 0;  // circle distance between f^m(a) and c
    int steps = 0;
};

SameOrbitSolution solve_same_orbit(const MapParams& family, const ContinuedFraction& target, int m, real tune_tol,
                                   std::int64_t cap = kDefaultOrbitCap);

struct VerdictThresholds {
    real gap_floor_fraction = 0.5;  // min upper-half gap >= fraction * median
    int trend_violations = 1;       // non-decreasing steps allowed in the Lorenz trend
    real trend_violation_size = 0.05;
    real ac_gap = 1e-10;
};

struct SingularityConfig {
    MapParams map;
    ContinuedFraction target;
    real tune_tol = 1e-10;
    bool tune = true;
    int same_orbit_m = 0;  // > 0: place c on the orbit of a first
    CirclePoint x0;
    int n_lo = 6;
    int n_hi = 12;
    real measure_tol = 1e-6;
    std::int64_t probe_orbit = 200000;
    VerdictThresholds thresholds;
    bool parallel = true;
    std::int64_t cap = kDefaultOrbitCap;
};

struct SingularityRow {
    int n = 0;
    std::int64_t q_n = 0;
    CoverCase case_tag = CoverCase::a_only;
    bool certified = false;
    real gf_gap = 0;
    real dist_qn_gap = 0;
    real lorenz_90_length = 0;
    real max_length = 0;
    std::optional<ProbeResult> probe;  // absent when the probe orbit is too coarse
    LorenzCurve curve;
};

enum class Verdict { singular_evidence, ac_baseline, no_evidence };
std::string to_string(Verdict v);

struct SingularityReport {
    MapParams map;
    real translation = 0;
    MapStats stats;
    RegularCoverParams params;
    std::vector<std::int64_t> cf_prefix;
    RotationEstimate rho;
    CirclePoint x0;
    std::vector<SingularityRow> rows;
    real empirical_constant = 0;
    real median_gap = 0;
    bool gaps_bounded = false;
    bool trend_down = false;
    bool ac_like = false;
    Verdict verdict = Verdict::no_evidence;
};

bool lorenz_trend_down(const std::vector<real>& values, const VerdictThresholds& t);

SingularityReport singularity_report(const SingularityConfig& config);

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
