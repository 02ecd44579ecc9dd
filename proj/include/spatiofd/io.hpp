#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "spatiofd/benchmark.hpp"
#include "spatiofd/changepoint.hpp"
#include "spatiofd/core.hpp"
#include "spatiofd/recovery.hpp"
#include "spatiofd/simgen.hpp"

namespace spatiofd {

inline constexpr const char* kVersion = "0.1.0";

/// Shortest decimal form that parses back to the same double.
std::string format_double(double x);

struct IngestOptions {
    bool log10 = false; // v -> log10(v + 1)
};

/// Long CSV: replicate,location_id,time_index,value (1-based replicate and
/// time index). Locations CSV: location_id,x[,y]. The time grid is taken as
/// T equally spaced points on [0, 1].
SpatialFunctionalDataset ingest(std::istream& values, std::istream& locations,
                                const IngestOptions& options = {});
SpatialFunctionalDataset ingest(const std::filesystem::path& values,
                                const std::filesystem::path& locations,
                                const IngestOptions& options = {});

void export_values(const SpatialFunctionalDataset& data, std::ostream& out);
void export_locations(const SpatialDomain& domain, std::ostream& out);
void export_dataset(const SpatialFunctionalDataset& data, const std::filesystem::path& values,
                    const std::filesystem::path& locations);

void write_ground_truth(const GroundTruth& truth, const SpatialDomain& domain, std::ostream& out);
void write_q_profile(const QProfile& profile, std::ostream& out);
/// location_id,W,selected (1/0), in location order.
void write_recovery(const RecoveryResult& result, const SpatialDomain& domain, std::ostream& out);

/// One row per (cell, method, metric).
void write_benchmark_csv(const BenchmarkReport& report, std::ostream& out);
nlohmann::json benchmark_to_json(const BenchmarkReport& report);

struct DetectionBlock {
    std::string statistic = "Qh"; // "Qh" or "Q0"
    double q_max = 0.0;
    double q_sum = 0.0;
    std::optional<double> p_max;
    std::optional<double> p_sum;
    std::size_t tau_hat = 0;
    double bandwidth = 0.0;
    std::size_t truncation = 0;
    std::size_t mc_reps = 0;
    std::size_t n = 0;
    std::vector<double> profile;

    static DetectionBlock from(const ChangePointResult& result);
    bool operator==(const DetectionBlock&) const = default;
};

struct RecoveryBlock {
    std::string method = "fsda";
    double alpha = 0.0;
    std::size_t tau_hat = 0;
    std::size_t tau_split = 0;
    std::size_t truncation = 0;
    double bandwidth = 0.0;
    std::optional<double> threshold; // empty when nothing is selected
    std::vector<std::string> location_ids;
    std::vector<double> w;
    std::vector<double> pvalues;
    std::vector<std::string> selected;

    static RecoveryBlock from(const RecoveryResult& result, const SpatialDomain& domain);
    bool operator==(const RecoveryBlock&) const = default;
};

struct Provenance {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string version = kVersion;
    std::string eigen_version;

    bool operator==(const Provenance&) const = default;
};

struct Report {
    std::optional<DetectionBlock> detection;
    std::optional<RecoveryBlock> recovery;
    Provenance provenance;

    bool operator==(const Report&) const = default;
};

nlohmann::json to_json(const Report& report);
Report report_from_json(const nlohmann::json& doc);
Report read_report(const std::filesystem::path& path);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);
Provenance make_provenance(const std::string& canonical_config, std::uint64_t seed);

/// Opens for writing, throwing ValidationError when the file cannot be created.
std::ofstream open_output(const std::filesystem::path& path);

} // namespace spatiofd
