#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "spatiofd/benchmark.hpp"
#include "spatiofd/changepoint.hpp"
#include "spatiofd/recovery.hpp"
#include "spatiofd/simgen.hpp"

namespace spatiofd {

/// Everything a CLI run can be told, from a JSON file and/or flags.
///
/// Top-level keys: seed, fve, varrho, mc_reps, alpha, stat, statistic,
/// null_correlation, interior_knots, bandwidth, truncation, method, log10,
/// tau, values, locations, report, out, simulation{...}, benchmark{...}.
/// Unknown keys are rejected at every level.
struct RunConfig {
    std::uint64_t seed = 1;
    DetectionConfig detection;
    RecoveryConfig recovery;
    SimulationConfig simulation;
    BenchmarkConfig benchmark;
    bool log10 = false;
    std::optional<std::size_t> tau;
    std::optional<std::string> values_path;
    std::optional<std::string> locations_path;
    std::optional<std::string> report_path;
    std::optional<std::string> out_dir;

    /// Pushes `seed` and the shared tunables down into the sub-configs.
    void sync();
    void validate() const;
};

RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical JSON of the effective settings (paths excluded), used for the
/// provenance hash.
nlohmann::json to_json(const RunConfig& config);

SimulationConfig parse_simulation(const nlohmann::json& obj, SimulationConfig base = {});
nlohmann::json to_json(const SimulationConfig& sim);

/// "max,sum" style list -> stat flags.
void parse_stat_list(const std::string& list, DetectionConfig& config);

} // namespace spatiofd
