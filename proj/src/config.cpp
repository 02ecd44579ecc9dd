#include "spatiofd/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace spatiofd {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw ValidationError(where + " must be a JSON object");
    }
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ValidationError("unknown config key '" + item.key() + "' in " + where);
        }
    }
}

double real(const json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number()) {
        throw ValidationError(std::string("config key '") + key + "' must be a number");
    }
    return v.get<double>();
}

std::uint64_t count(const json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        throw ValidationError(std::string("config key '") + key + "' must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::string text(const json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_string()) {
        throw ValidationError(std::string("config key '") + key + "' must be a string");
    }
    return v.get<std::string>();
}

bool flag(const json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_boolean()) {
        throw ValidationError(std::string("config key '") + key + "' must be true or false");
    }
    return v.get<bool>();
}

std::vector<double> reals(const json& obj, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_array()) {
        throw ValidationError(std::string("config key '") + key + "' must be an array of numbers");
    }
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) {
            throw ValidationError(std::string("config key '") + key + "' must be an array of numbers");
        }
        out.push_back(x.get<double>());
    }
    return out;
}

const std::set<std::string> kSimulationKeys{"n",     "p",   "scheme",      "nu",       "phi",
                                            "delta", "r_s", "sigma_omega", "tau_star", "T"};

} // namespace

SimulationConfig parse_simulation(const json& obj, SimulationConfig base) {
    auto keys = kSimulationKeys;
    keys.insert("name");
    check_keys(obj, keys, "simulation");
    if (obj.contains("n")) base.n = count(obj, "n");
    if (obj.contains("p")) base.p = count(obj, "p");
    if (obj.contains("scheme")) base.scheme = parse_scheme(text(obj, "scheme"));
    if (obj.contains("nu")) base.nu = reals(obj, "nu");
    if (obj.contains("phi")) base.phi = reals(obj, "phi");
    if (obj.contains("delta")) base.delta = real(obj, "delta");
    if (obj.contains("r_s")) base.r_s = real(obj, "r_s");
    if (obj.contains("sigma_omega")) base.sigma_omega = real(obj, "sigma_omega");
    if (obj.contains("tau_star")) base.tau_star = count(obj, "tau_star");
    if (obj.contains("T")) base.t = count(obj, "T");
    return base;
}

json to_json(const SimulationConfig& sim) {
    json out = {{"n", sim.n},         {"p", sim.p},         {"scheme", to_string(sim.scheme)},
                {"nu", sim.nu},       {"phi", sim.phi},     {"delta", sim.delta},
                {"r_s", sim.r_s},     {"T", sim.t},         {"tau_star", sim.change_index()},
                {"sigma_omega", sim.bump_scale()}};
    return out;
}

void parse_stat_list(const std::string& list, DetectionConfig& config) {
    config.stat_max = false;
    config.stat_sum = false;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "max") {
            config.stat_max = true;
        } else if (item == "sum") {
            config.stat_sum = true;
        } else if (item == "none" || item.empty()) {
        } else {
            throw ValidationError("unknown statistic '" + item + "' (expected max, sum or none)");
        }
    }
}

RunConfig parse_run_config(const json& doc) {
    check_keys(doc,
               {"seed", "fve", "varrho", "mc_reps", "alpha", "stat", "statistic", "null_correlation",
                "interior_knots", "bandwidth", "truncation", "method", "log10", "tau", "values",
                "locations", "report", "out", "simulation", "benchmark"},
               "config");
    RunConfig cfg;
    try {
        if (doc.contains("seed")) cfg.seed = count(doc, "seed");
        if (doc.contains("fve")) cfg.detection.fve_target = real(doc, "fve");
        if (doc.contains("varrho")) cfg.detection.varrho = real(doc, "varrho");
        if (doc.contains("mc_reps")) cfg.detection.mc_reps = count(doc, "mc_reps");
        if (doc.contains("alpha")) cfg.recovery.alpha = real(doc, "alpha");
        if (doc.contains("stat")) {
            const auto& s = doc.at("stat");
            if (s.is_string()) {
                parse_stat_list(s.get<std::string>(), cfg.detection);
            } else if (s.is_array()) {
                std::string joined;
                for (const auto& x : s) {
                    if (!x.is_string()) {
                        throw ValidationError("config key 'stat' must list strings");
                    }
                    joined += (joined.empty() ? "" : ",") + x.get<std::string>();
                }
                parse_stat_list(joined, cfg.detection);
            } else {
                throw ValidationError("config key 'stat' must be a string or an array");
            }
        }
        if (doc.contains("statistic")) {
            const auto s = text(doc, "statistic");
            if (s != "kernel" && s != "plain") {
                throw ValidationError("statistic must be 'kernel' or 'plain'");
            }
            cfg.detection.kernel = s == "kernel";
        }
        if (doc.contains("null_correlation")) {
            const auto s = text(doc, "null_correlation");
            if (s != "raw" && s != "smoothed") {
                throw ValidationError("null_correlation must be 'raw' or 'smoothed'");
            }
            cfg.detection.null_correlation = s == "raw" ? NullCorrelation::Raw : NullCorrelation::Smoothed;
        }
        if (doc.contains("interior_knots")) {
            cfg.detection.interior_knots = static_cast<int>(count(doc, "interior_knots"));
        }
        if (doc.contains("bandwidth")) cfg.detection.bandwidth = real(doc, "bandwidth");
        if (doc.contains("truncation")) cfg.detection.truncation = count(doc, "truncation");
        if (doc.contains("method")) cfg.recovery.method = parse_recovery_method(text(doc, "method"));
        if (doc.contains("log10")) cfg.log10 = flag(doc, "log10");
        if (doc.contains("tau")) cfg.tau = count(doc, "tau");
        if (doc.contains("values")) cfg.values_path = text(doc, "values");
        if (doc.contains("locations")) cfg.locations_path = text(doc, "locations");
        if (doc.contains("report")) cfg.report_path = text(doc, "report");
        if (doc.contains("out")) cfg.out_dir = text(doc, "out");
        if (doc.contains("simulation")) {
            cfg.simulation = parse_simulation(doc.at("simulation"));
        }
        if (doc.contains("benchmark")) {
            const auto& b = doc.at("benchmark");
            check_keys(b, {"reps", "level", "methods", "scenarios"}, "benchmark");
            if (b.contains("reps")) cfg.benchmark.reps = count(b, "reps");
            if (b.contains("level")) cfg.benchmark.level = real(b, "level");
            if (b.contains("methods")) {
                for (const auto& m : b.at("methods")) {
                    if (!m.is_string()) {
                        throw ValidationError("benchmark methods must be strings");
                    }
                    cfg.benchmark.methods.push_back(parse_bench_method(m.get<std::string>()));
                }
            }
            if (b.contains("scenarios")) {
                std::size_t k = 0;
                for (const auto& s : b.at("scenarios")) {
                    ++k;
                    Scenario sc;
                    sc.name = s.contains("name") ? text(s, "name") : "scenario" + std::to_string(k);
                    sc.sim = parse_simulation(s, cfg.simulation);
                    cfg.benchmark.scenarios.push_back(std::move(sc));
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    cfg.sync();
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open config " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_run_config(doc);
}

void RunConfig::sync() {
    detection.seed = seed;
    simulation.seed = seed;
    benchmark.seed = seed;
    recovery.fve_target = detection.fve_target;
    recovery.varrho = detection.varrho;
    recovery.interior_knots = detection.interior_knots;
    recovery.bandwidth = detection.bandwidth;
    benchmark.fve_target = detection.fve_target;
    benchmark.varrho = detection.varrho;
    benchmark.mc_reps = detection.mc_reps;
    benchmark.alpha = recovery.alpha;
}

void RunConfig::validate() const {
    detection.validate();
    recovery.validate();
    if (tau && *tau < 1) {
        throw ValidationError("tau must be at least 1");
    }
}

json to_json(const RunConfig& c) {
    const auto& d = c.detection;
    json stats = json::array();
    if (d.stat_max) stats.push_back("max");
    if (d.stat_sum) stats.push_back("sum");
    json out = {{"seed", c.seed},
                {"fve", d.fve_target},
                {"varrho", d.varrho},
                {"mc_reps", d.mc_reps},
                {"alpha", c.recovery.alpha},
                {"stat", stats},
                {"statistic", d.kernel ? "kernel" : "plain"},
                {"null_correlation", d.null_correlation == NullCorrelation::Raw ? "raw" : "smoothed"},
                {"interior_knots", d.interior_knots},
                {"method", to_string(c.recovery.method)},
                {"log10", c.log10},
                {"simulation", to_json(c.simulation)}};
    // Unset optionals are left out so the canonical form parses back.
    if (d.bandwidth) out["bandwidth"] = *d.bandwidth;
    if (d.truncation) out["truncation"] = *d.truncation;
    if (c.tau) out["tau"] = *c.tau;
    return out;
}

} // namespace spatiofd
