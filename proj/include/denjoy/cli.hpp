#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "denjoy/error.hpp"
#include "denjoy/maps.hpp"
#include "denjoy/rotation.hpp"
#include "denjoy/singularity.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

// One JSON document; see README for keys and defaults.
struct ExperimentConfig {
    MapParams map;
    std::optional<ContinuedFraction> target;  // from "target_rho"
    bool tune = false;                         // defaults to true when a target is given
    int same_orbit_m = 0;
    int n_lo = 6;
    int n_hi = 12;
    real x0 = 0;
    real tune_tol = 1e-10;
    real measure_tol = 1e-6;
    std::int64_t rotnum_depth = 30;
    std::int64_t rotnum_iterations = 100000;
    int base_points = 20;
    int quadruples = 100;
    std::int64_t probe_orbit = 200000;
    std::int64_t orbit_cap = kDefaultOrbitCap;
    VerdictThresholds thresholds;
    bool parallel = true;
    std::string precision = kBackendName;
    std::string output_dir = "out";
};

// Quotients of a CF-list target are padded with 1s up to this depth.
inline constexpr std::size_t kTargetDepth = 40;

// Throws ConfigError on malformed JSON, unknown keys or bad values.
ExperimentConfig parse_config(const std::string& text);

struct Artifact {
    std::string name;
    std::string contents;
};

struct CommandOutput {
    std::vector<Artifact> files;
    std::string summary;
};

const std::vector<std::string>& commands();

// Everything in memory; nothing touches the disk.
CommandOutput run_command(const std::string& command, const ExperimentConfig& cfg, std::uint64_t seed);

// 2 config, 3 precision budget, 4 invariant failure, 1 anything else
int exit_code(ErrorKind kind);

// Parse, run, write atomically into out_dir (config output_dir when empty).
int run(const std::string& command, const std::string& config_text, const std::string& out_dir, std::uint64_t seed,
        std::ostream& out, std::ostream& err);

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
