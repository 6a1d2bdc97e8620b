#include "denjoy/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"

#include "denjoy/crossratio.hpp"
#include "denjoy/io.hpp"
#include "denjoy/measure.hpp"
#include "denjoy/partition.hpp"

namespace denjoy {
inline namespace DENJOY_BACKEND_NS {

namespace {

// numbers parse straight into the active real type
using config_json = nlohmann::basic_json<std::map, std::vector, std::string, bool, std::int64_t, std::uint64_t, real>;
using nlohmann::ordered_json;

[[noreturn]] void config_error(const std::string& msg) { fail(ErrorKind::ConfigError, msg); }

void only_keys(const config_json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) config_error(where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
            config_error("unknown key '" + key + "' in " + where);
    }
}

real get_real(const config_json& obj, const char* key, real fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) config_error(std::string("'") + key + "' must be a number");
    const real x = v.get<real>();
    if (!std::isfinite(x)) config_error(std::string("'") + key + "' must be finite");
    return x;
}

std::int64_t get_int(const config_json& obj, const char* key, std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) config_error(std::string("'") + key + "' must be an integer");
    return v.get<std::int64_t>();
}

bool get_bool(const config_json& obj, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) config_error(std::string("'") + key + "' must be true or false");
    return obj.at(key).get<bool>();
}

std::string get_string(const config_json& obj, const char* key, const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) config_error(std::string("'") + key + "' must be a string");
    return obj.at(key).get<std::string>();
}

ContinuedFraction parse_target(const config_json& v) {
    if (v.is_number()) {
        const real rho = v.get<real>();
        if (!(rho > 0 && rho < 1)) config_error("target_rho must lie in (0, 1)");
        return cf_expand_convergents(rho, kTargetDepth);
    }
    if (!v.is_array() || v.empty()) config_error("target_rho must be a number or a non-empty list of quotients");
    std::vector<std::int64_t> ks;
    for (const auto& k : v) {
        if (!k.is_number_integer() || k.get<std::int64_t>() < 1) config_error("CF quotients must be integers >= 1");
        ks.push_back(k.get<std::int64_t>());
    }
    // bounded-type tail so the target stays irrational
    while (ks.size() < kTargetDepth) ks.push_back(1);
    return cf_from_quotients(ks);
}

ordered_json num(real x) { return static_cast<double>(x); }

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json map_json(const MapParams& p) {
    return {{"kind", to_string(p.kind)}, {"a", num(p.a)},
            {"c", num(p.c)},             {"slope_ratio", num(p.slope_ratio)},
            {"sigma_a", num(p.sigma_a)}, {"sigma_c", num(p.sigma_c)},
            {"translation", num(p.translation)}};
}

ordered_json estimate_json(const RotationEstimate& e) {
    ordered_json j{{"method", e.method == RotationMethod::farey ? "farey" : "iterate"},
                   {"value", num(e.value)},
                   {"lower", num(e.lower)},
                   {"upper", num(e.upper)},
                   {"rational", e.rational}};
    if (e.rational) j["fraction"] = {e.fraction.p, e.fraction.q};
    return j;
}

ordered_json header(const std::string& command) {
    return {{"schema", 1}, {"command", command}, {"precision", kBackendName}};
}

// map after tuning or the same-orbit solve, with the CF its partitions use
struct Prepared {
    CircleMap map;
    ContinuedFraction cf;
    MapStats stats;
    std::optional<TuneResult> tune;
};

Prepared prepare(const ExperimentConfig& cfg) {
    Prepared p{make_map(cfg.map), {}, {}, {}};
    if (cfg.same_orbit_m > 0) {
        p.map = solve_same_orbit(cfg.map, *cfg.target, cfg.same_orbit_m, cfg.tune_tol, cfg.orbit_cap).map;
        p.cf = *cfg.target;
    } else if (cfg.tune) {
        p.tune = tune_translation(p.map, *cfg.target, cfg.tune_tol, cfg.orbit_cap);
        p.map = p.map.with_translation(p.tune->translation);
        p.cf = *cfg.target;
    } else {
        p.cf = cf_expand_convergents(rho_for_measure(p.map, 1e-14, cfg.orbit_cap).value, kTargetDepth);
    }
    p.stats = validate_p_homeo(p.map);
    if (p.cf.depth() < static_cast<std::size_t>(cfg.n_hi) + 1)
        fail(ErrorKind::RankTooShallow, "rotation number CF has depth " + std::to_string(p.cf.depth()) +
                                            ", the n range needs " + std::to_string(cfg.n_hi + 1));
    return p;
}

std::vector<std::int64_t> cf_prefix(const ContinuedFraction& cf, std::size_t n) {
    std::vector<std::int64_t> out;
    for (std::size_t i = 1; i <= std::min(n, cf.depth()); ++i) out.push_back(cf.k(i));
    return out;
}

// ---- commands

CommandOutput cmd_rotnum(const ExperimentConfig& cfg) {
    const CircleMap map = make_map(cfg.map);
    const FareyResult fr = rho_farey(map, cfg.rotnum_depth, cfg.orbit_cap);
    const RotationEstimate it = rho_iterate_estimate(map, cfg.rotnum_iterations, cfg.orbit_cap);
    if (!enclosures_intersect(fr.estimate, it))
        fail(ErrorKind::InvariantViolation, "Farey and iterate enclosures are disjoint");

    const RotationEstimate& e = fr.estimate;
    std::ostringstream csv;
    csv << "method,value,lower,upper,rational,p,q\n"
        << "farey," << fmt_real(e.value) << ',' << fmt_real(e.lower) << ',' << fmt_real(e.upper) << ','
        << (e.rational ? 1 : 0) << ',' << (e.rational ? e.fraction.p : 0) << ',' << (e.rational ? e.fraction.q : 0)
        << '\n';

    ordered_json j = header("rotnum");
    j["map"] = map_json(cfg.map);
    j["farey"] = estimate_json(e);
    j["farey"]["orbit_evaluations"] = fr.orbit_evaluations;
    j["iterate"] = estimate_json(it);
    j["cf"] = cf_prefix(fr.cf, fr.cf.depth());

    std::string summary = e.rational ? "rational " + std::to_string(e.fraction.p) + "/" + std::to_string(e.fraction.q)
                                     : "rho in [" + fmt_real(e.lower) + ", " + fmt_real(e.upper) + "]";
    return {{{"rotnum.csv", csv.str()}, {"cf_table.csv", cf_table_csv(fr.cf, e.value)}, {"rotnum.json", dump(j)}},
            summary};
}

CommandOutput cmd_tune(const ExperimentConfig& cfg) {
    if (!cfg.target) config_error("tune needs target_rho");
    const TuneResult t = tune_translation(make_map(cfg.map), *cfg.target, cfg.tune_tol, cfg.orbit_cap);
    if (!t.enclosure.contains(cfg.target->value()))
        fail(ErrorKind::InvariantViolation, "tuned enclosure misses the target");
    ordered_json j = header("tune");
    j["map"] = map_json(cfg.map);
    j["target"] = {{"cf", cf_prefix(*cfg.target, 16)}, {"value", num(cfg.target->value())}};
    j["translation"] = num(t.translation);
    j["enclosure"] = estimate_json(t.enclosure);
    j["bracket_index"] = t.bracket_index;
    j["bisections"] = t.bisections;
    j["achieved_tol"] = num(t.achieved_tol);
    return {{{"tune.json", dump(j)}}, "t* = " + fmt_real(t.translation)};
}

std::vector<real> sample_points(std::uint64_t seed, int count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0, 1);
    std::vector<real> xs;
    for (int i = 0; i < count; ++i) xs.push_back(static_cast<real>(unit(rng)));
    return xs;
}

CommandOutput cmd_partition(const ExperimentConfig& cfg, std::uint64_t seed) {
    const Prepared p = prepare(cfg);
    const CirclePoint x0(cfg.x0);
    std::ostringstream csv;
    csv << "n,rank_tag,index,left,length\n";
    ordered_json rows = ordered_json::array();
    std::optional<DynamicalPartition> prev;
    const std::vector<real> bases = sample_points(seed, cfg.base_points);
    real worst_log = 0;

    for (int n = cfg.n_lo; n <= cfg.n_hi; ++n) {
        DynamicalPartition part = build_partition(p.map, p.cf, x0, n, cfg.orbit_cap);
        const std::int64_t expected = part.q_n + part.q_prev;
        if (static_cast<std::int64_t>(part.elements.size()) != expected)
            fail(ErrorKind::InvariantViolation, "partition of rank " + std::to_string(n) + " has " +
                                                    std::to_string(part.elements.size()) + " elements");
        const real total_err = std::abs(part.total_length - 1);
        if (total_err > static_cast<real>(part.q_n) * 10 * kEps)
            fail(ErrorKind::InvariantViolation, "partition lengths sum to 1 + " + fmt_real(total_err));
        const std::string body = partition_csv(part);
        csv << body.substr(body.find('\n') + 1);

        ordered_json row{{"n", n}, {"q_n", part.q_n}, {"elements", expected}, {"nudges", part.nudges},
                         {"total_length_error", num(total_err)}, {"max_length", num(part.max_length())},
                         {"min_length", num(part.min_length())}};
        if (prev && prev->x0 == part.x0) {
            const RefinementReport r = check_refinement(*prev, part, p.cf);
            row["split_elements"] = r.split_elements;
        }
        real log_max = 0;
        for (real b : bases) {
            const real d = denjoy_product(p.map, CirclePoint(b), part.q_n, p.stats.v);
            log_max = std::max(log_max, std::abs(std::log(d)));
        }
        worst_log = std::max(worst_log, log_max);
        row["denjoy_max_abs_log"] = num(log_max);
        rows.push_back(row);
        prev = std::move(part);
    }

    const std::vector<DecayRow> decay = max_element_decay(p.map, p.cf, x0, cfg.n_hi, cfg.orbit_cap);
    const LogFit fit = fit_log_decay(decay, cfg.n_lo, cfg.n_hi);

    ordered_json j = header("partition");
    j["map"] = map_json(p.map.params());
    j["cf"] = cf_prefix(p.cf, static_cast<std::size_t>(cfg.n_hi) + 1);
    j["x0"] = num(cfg.x0);
    j["v"] = num(p.stats.v);
    j["base_points"] = cfg.base_points;
    j["denjoy_max_abs_log"] = num(worst_log);
    j["decay"] = {{"slope", num(fit.slope)}, {"intercept", num(fit.intercept)},
                  {"log_lambda", num(std::log(p.stats.lambda))}};
    j["rows"] = rows;
    return {{{"partition.csv", csv.str()}, {"partition.json", dump(j)}},
            "ranks " + std::to_string(cfg.n_lo) + ".." + std::to_string(cfg.n_hi) + ", decay slope " +
                fmt_real(fit.slope)};
}

CommandOutput cmd_distortion(const ExperimentConfig& cfg, std::uint64_t seed) {
    const Prepared p = prepare(cfg);
    const Calibration cal = calibrate_constants(p.map, seed, cfg.quadruples);

    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> unit(0, 1), share(0.2, 1), logh(-4, -1);
    auto gaps = [&] {
        std::array<real, 3> g{share(rng), share(rng), share(rng)};
        const real h = std::pow(real(10), static_cast<real>(logh(rng)));
        const real s = g[0] + g[1] + g[2];
        for (auto& x : g) x *= h / s;
        return g;
    };

    std::ostringstream csv;
    csv << quadruple_csv_header();
    int within = 0, total = 0;
    const auto& breaks = p.map.breaks();
    for (int i = 0; i < cfg.quadruples && !breaks.empty(); ++i) {
        const BreakPoint& b = breaks[static_cast<std::size_t>(i) % breaks.size()];
        const BreakSide side = i % 4 < 2 ? BreakSide::left : BreakSide::right;
        const auto g = gaps();
        const real u = 0.05 + 0.9 * unit(rng);
        const real bp = b.location.value();
        const real z1 = side == BreakSide::left ? bp - u * g[0] : bp - g[0] - g[1] - u * g[2];
        const Quadruple q{z1, z1 + g[0], z1 + g[0] + g[1], z1 + g[0] + g[1] + g[2]};
        if (p.map.breaks_in(q.z1, q.z4).size() != 1) continue;
        const ClosedFormResult r = single_break_closed_form(q, p.map, side, cal.k1_hat);
        ++total;
        if (r.residual <= r.residual_bound + 64 * kEps) ++within;
        csv << quadruple_csv_row(q, cross_ratio(q), r.actual, r.predicted, r.residual, r.residual_bound);
    }
    for (int i = 0; i < cfg.quadruples; ++i) {
        const auto g = gaps();
        const real z1 = unit(rng);
        const Quadruple q{z1, z1 + g[0], z1 + g[0] + g[1], z1 + g[0] + g[1] + g[2]};
        if (!p.map.breaks_in(q.z1, q.z4).empty()) continue;
        const real d = distortion(q, p.map);
        const real bound = cal.c1_hat * smooth_bound_term(q, p.map);
        ++total;
        if (std::abs(d - 1) <= bound + 64 * kEps) ++within;
        csv << quadruple_csv_row(q, cross_ratio(q), d, 1, std::abs(d - 1), bound);
    }

    const RegularCoverParams params =
        breaks.size() == 2 ? cover_params(p.map) : cover_params(1, 1, p.stats.v);
    const DistortionExperiment e =
        qn_distortion_experiment(p.map, p.cf, CirclePoint(cfg.x0), cfg.n_lo, cfg.n_hi, params, cfg.orbit_cap);
    std::ostringstream qcsv;
    qcsv << "n,q_n,case,gap,chain,direct,off_break_max\n";
    for (const auto& r : e.rows)
        qcsv << r.n << ',' << r.q_n << ',' << to_string(r.case_tag) << ',' << fmt_real(r.gap) << ','
             << fmt_real(r.chain) << ',' << fmt_real(r.direct) << ',' << fmt_real(r.off_break_max) << '\n';

    ordered_json j = header("distortion");
    j["map"] = map_json(p.map.params());
    j["k1_hat"] = num(cal.k1_hat);
    j["c1_hat"] = num(cal.c1_hat);
    j["quadruples"] = total;
    j["within_bound"] = within;
    j["empirical_constant"] = num(e.empirical_constant);
    return {{{"distortion.csv", csv.str()}, {"qn_distortion.csv", qcsv.str()}, {"distortion.json", dump(j)}},
            std::to_string(within) + "/" + std::to_string(total) + " quadruples within bound, q_n gap constant " +
                fmt_real(e.empirical_constant)};
}

CommandOutput cmd_measure(const ExperimentConfig& cfg) {
    const Prepared p = prepare(cfg);
    const RotationEstimate rho = rho_for_measure(p.map, 1e-14, cfg.orbit_cap);
    std::ostringstream csv;
    csv << "n,rank,index,length,mass,density\n";
    ordered_json rows = ordered_json::array();
    for (int n = cfg.n_lo; n <= cfg.n_hi; ++n) {
        const DynamicalPartition part = build_partition(p.map, p.cf, CirclePoint(cfg.x0), n, cfg.orbit_cap);
        const OrbitMeasure om =
            conjugacy_values(p.map, rho, part.x0, part.q_n + part.q_prev, cfg.measure_tol, cfg.orbit_cap);
        const std::vector<ElementMass> masses = partition_masses(om, part);
        const std::string body = masses_csv(n, masses);
        csv << body.substr(body.find('\n') + 1);

        std::map<int, std::pair<real, real>> range;  // rank -> (min, max)
        for (const auto& m : masses) {
            auto [it, fresh] = range.try_emplace(m.element.rank_tag, m.mass, m.mass);
            if (!fresh) it->second = {std::min(it->second.first, m.mass), std::max(it->second.second, m.mass)};
        }
        real spread = 0;
        for (const auto& [rank, mm] : range) spread = std::max(spread, mm.second - mm.first);
        if (spread >= 1e-10)
            fail(ErrorKind::InvariantViolation, "masses of one rank differ by " + fmt_real(spread));
        const real identity = mass_identity(p.cf, rho.value, n);
        if (std::abs(identity - 1) > 1e-9)
            fail(ErrorKind::InvariantViolation, "mass identity off by " + fmt_real(identity - 1));
        rows.push_back({{"n", n}, {"elements", masses.size()}, {"rank_spread", num(spread)},
                        {"mass_identity", num(identity)}});
    }
    ordered_json j = header("measure");
    j["map"] = map_json(p.map.params());
    j["rho"] = estimate_json(rho);
    j["rows"] = rows;
    return {{{"masses.csv", csv.str()}, {"measure.json", dump(j)}},
            "masses for ranks " + std::to_string(cfg.n_lo) + ".." + std::to_string(cfg.n_hi)};
}

ordered_json bounds_json(const MeasureBounds& b) { return {num(b.lower), num(b.upper)}; }

CommandOutput cmd_singularity(const ExperimentConfig& cfg) {
    SingularityConfig sc;
    sc.map = cfg.map;
    sc.tune = cfg.tune;
    sc.same_orbit_m = cfg.same_orbit_m;
    if (cfg.target) sc.target = *cfg.target;
    sc.tune_tol = cfg.tune_tol;
    sc.x0 = CirclePoint(cfg.x0);
    sc.n_lo = cfg.n_lo;
    sc.n_hi = cfg.n_hi;
    sc.measure_tol = cfg.measure_tol;
    sc.probe_orbit = cfg.probe_orbit;
    sc.thresholds = cfg.thresholds;
    sc.parallel = cfg.parallel;
    sc.cap = cfg.orbit_cap;
    const SingularityReport rep = singularity_report(sc);

    std::vector<Artifact> files;
    ordered_json rows = ordered_json::array();
    for (const auto& r : rep.rows) {
        ordered_json row{{"n", r.n},
                         {"q_n", r.q_n},
                         {"case", to_string(r.case_tag)},
                         {"certified", r.certified},
                         {"gf_gap", num(r.gf_gap)},
                         {"dist_qn_gap", num(r.dist_qn_gap)},
                         {"lorenz_90_length", num(r.lorenz_90_length)},
                         {"max_length", num(r.max_length)}};
        if (r.probe) {
            row["probe"] = {{"dist_phi", bounds_json(r.probe->dist_phi)},
                            {"dist_phi_qn", bounds_json(r.probe->dist_phi_qn)},
                            {"dist_fqn", num(r.probe->dist_fqn)},
                            {"shift_identity_error", num(r.probe->shift_identity_error)},
                            {"consistent", r.probe->consistent}};
        } else {
            row["probe"] = nullptr;
        }
        rows.push_back(row);

        std::ostringstream curve;
        curve << "length_fraction,mass_fraction\n";
        for (const auto& [x, y] : r.curve.points) curve << fmt_real(x) << ',' << fmt_real(y) << '\n';
        files.push_back({"lorenz_n" + std::to_string(r.n) + ".csv", curve.str()});
    }

    ordered_json j = header("singularity");
    j["metadata"] = {{"map", map_json(rep.map)},
                     {"translation", num(rep.translation)},
                     {"v", num(rep.stats.v)},
                     {"lambda", num(rep.stats.lambda)},
                     {"sigma_product", num(rep.stats.sigma_product)},
                     {"cover", {{"C0", num(rep.params.C0)},
                                {"zeta0", num(rep.params.zeta0)},
                                {"r6_hat", num(rep.params.r6_hat)},
                                {"regular", rep.params.regular},
                                {"gap_bound", num(rep.params.gap_bound())}}},
                     {"cf_prefix", rep.cf_prefix},
                     {"rho", estimate_json(rep.rho)},
                     {"x0", num(rep.x0.value())},
                     {"n_range", {cfg.n_lo, cfg.n_hi}},
                     {"thresholds", {{"gap_floor_fraction", num(cfg.thresholds.gap_floor_fraction)},
                                     {"trend_violations", cfg.thresholds.trend_violations},
                                     {"trend_violation_size", num(cfg.thresholds.trend_violation_size)},
                                     {"ac_gap", num(cfg.thresholds.ac_gap)}}}};
    j["rows"] = rows;
    j["empirical_constant"] = num(rep.empirical_constant);
    j["median_gap"] = num(rep.median_gap);
    j["gaps_bounded"] = rep.gaps_bounded;
    j["trend_down"] = rep.trend_down;
    j["ac_like"] = rep.ac_like;
    j["verdict"] = to_string(rep.verdict);
    files.insert(files.begin(), {"singularity.json", dump(j)});
    return {files, to_string(rep.verdict)};
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    config_json doc;
    try {
        doc = config_json::parse(text);
    } catch (const config_json::parse_error& e) {
        config_error(std::string("malformed JSON: ") + e.what());
    }
    only_keys(doc,
              {"precision", "map", "target_rho", "tune", "same_orbit_m", "n_range", "x0", "tolerances", "rotnum",
               "samples", "probe_orbit", "orbit_cap", "thresholds", "parallel", "output_dir"},
              "config");
    ExperimentConfig c;
    try {
        if (!doc.contains("map")) config_error("'map' is required");
        const auto& m = doc.at("map");
        only_keys(m, {"kind", "a", "c", "slope_ratio", "sigma_a", "sigma_c", "translation"}, "map");
        if (!m.contains("kind")) config_error("'map.kind' is required");
        c.map.kind = map_kind_from_string(get_string(m, "kind", ""));
        c.map.a = get_real(m, "a", c.map.a);
        c.map.c = get_real(m, "c", c.map.c);
        c.map.slope_ratio = get_real(m, "slope_ratio", c.map.slope_ratio);
        c.map.sigma_a = get_real(m, "sigma_a", c.map.sigma_a);
        c.map.sigma_c = get_real(m, "sigma_c", c.map.sigma_c);
        c.map.translation = get_real(m, "translation", c.map.translation);

        if (doc.contains("target_rho")) c.target = parse_target(doc.at("target_rho"));
        c.tune = get_bool(doc, "tune", c.target.has_value());
        c.same_orbit_m = static_cast<int>(get_int(doc, "same_orbit_m", 0));
        if (c.same_orbit_m < 0) config_error("same_orbit_m must be >= 0");
        if ((c.tune || c.same_orbit_m > 0) && !c.target) config_error("tuning needs target_rho");

        if (doc.contains("n_range")) {
            const auto& r = doc.at("n_range");
            if (!r.is_array() || r.size() != 2 || !r[0].is_number_integer() || !r[1].is_number_integer())
                config_error("n_range must be [n_lo, n_hi]");
            c.n_lo = static_cast<int>(r[0].get<std::int64_t>());
            c.n_hi = static_cast<int>(r[1].get<std::int64_t>());
        }
        if (c.n_lo < 2 || c.n_hi < c.n_lo || c.n_hi > 30) config_error("n_range needs 2 <= n_lo <= n_hi <= 30");
        c.x0 = get_real(doc, "x0", c.x0);

        if (doc.contains("tolerances")) {
            const auto& t = doc.at("tolerances");
            only_keys(t, {"tune", "measure"}, "tolerances");
            c.tune_tol = get_real(t, "tune", c.tune_tol);
            c.measure_tol = get_real(t, "measure", c.measure_tol);
        }
        if (!(c.tune_tol > 0) || !(c.measure_tol > 0)) config_error("tolerances must be positive");
        if (doc.contains("rotnum")) {
            const auto& r = doc.at("rotnum");
            only_keys(r, {"depth", "iterations"}, "rotnum");
            c.rotnum_depth = get_int(r, "depth", c.rotnum_depth);
            c.rotnum_iterations = get_int(r, "iterations", c.rotnum_iterations);
        }
        if (c.rotnum_depth < 1 || c.rotnum_iterations < 1) config_error("rotnum depth and iterations must be >= 1");
        if (doc.contains("samples")) {
            const auto& s = doc.at("samples");
            only_keys(s, {"base_points", "quadruples"}, "samples");
            c.base_points = static_cast<int>(get_int(s, "base_points", c.base_points));
            c.quadruples = static_cast<int>(get_int(s, "quadruples", c.quadruples));
        }
        if (c.base_points < 0 || c.quadruples < 0) config_error("sample counts must be >= 0");
        c.probe_orbit = get_int(doc, "probe_orbit", c.probe_orbit);
        c.orbit_cap = get_int(doc, "orbit_cap", c.orbit_cap);
        if (c.probe_orbit < 1 || c.orbit_cap < 1) config_error("probe_orbit and orbit_cap must be >= 1");
        if (doc.contains("thresholds")) {
            const auto& t = doc.at("thresholds");
            only_keys(t, {"gap_floor_fraction", "trend_violations", "trend_violation_size", "ac_gap"}, "thresholds");
            c.thresholds.gap_floor_fraction = get_real(t, "gap_floor_fraction", c.thresholds.gap_floor_fraction);
            c.thresholds.trend_violations =
                static_cast<int>(get_int(t, "trend_violations", c.thresholds.trend_violations));
            c.thresholds.trend_violation_size =
                get_real(t, "trend_violation_size", c.thresholds.trend_violation_size);
            c.thresholds.ac_gap = get_real(t, "ac_gap", c.thresholds.ac_gap);
        }
        c.parallel = get_bool(doc, "parallel", c.parallel);
        c.precision = get_string(doc, "precision", c.precision);
        if (c.precision != "double" && c.precision != "extended")
            config_error("precision must be \"double\" or \"extended\"");
        c.output_dir = get_string(doc, "output_dir", c.output_dir);
    } catch (const config_json::exception& e) {
        config_error(e.what());
    }
    // the map itself has to be constructible
    try {
        make_map(c.map);
    } catch (const Error& e) {
        config_error("map: " + e.detail());
    }
    return c;
}

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"rotnum", "tune", "partition", "distortion", "measure", "singularity"};
    return names;
}

CommandOutput run_command(const std::string& command, const ExperimentConfig& cfg, std::uint64_t seed) {
    if (command == "rotnum") return cmd_rotnum(cfg);
    if (command == "tune") return cmd_tune(cfg);
    if (command == "partition") return cmd_partition(cfg, seed);
    if (command == "distortion") return cmd_distortion(cfg, seed);
    if (command == "measure") return cmd_measure(cfg);
    if (command == "singularity") return cmd_singularity(cfg);
    config_error("unknown command '" + command + "'");
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConfigError:
            return 2;
        case ErrorKind::PrecisionBudgetExceeded:
        case ErrorKind::TolUnreachable:
        case ErrorKind::RankTooShallow:
        case ErrorKind::BracketingTooCoarse:
            return 3;
        case ErrorKind::InvariantViolation:
        case ErrorKind::OrderViolation:
        case ErrorKind::RefinementViolation:
        case ErrorKind::IndexMismatch:
        case ErrorKind::HypothesisNotCertified:
        case ErrorKind::NotHomeomorphism:
        case ErrorKind::NotClassP:
            return 4;
        default:
            return 1;
    }
}

int run(const std::string& command, const std::string& config_text, const std::string& out_dir, std::uint64_t seed,
        std::ostream& out, std::ostream& err) {
    try {
        const ExperimentConfig cfg = parse_config(config_text);
        const CommandOutput result = run_command(command, cfg, seed);
        const std::filesystem::path dir = out_dir.empty() ? cfg.output_dir : out_dir;
        std::filesystem::create_directories(dir);
        std::vector<std::pair<std::filesystem::path, std::string>> files;
        for (const auto& a : result.files) files.emplace_back(dir / a.name, a.contents);
        write_files_atomically(files);
        out << command << ": " << result.summary << '\n';
        for (const auto& a : result.files) out << "  " << (dir / a.name).string() << '\n';
        return 0;
    } catch (const Error& e) {
        err << command << " failed: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << command << " failed: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace DENJOY_BACKEND_NS
}  // namespace denjoy
