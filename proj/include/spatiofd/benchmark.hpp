#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spatiofd/changepoint.hpp"
#include "spatiofd/simgen.hpp"

namespace spatiofd {

enum class BenchMethod { Q0Sum, Q0Max, QhSum, QhMax, Fsda, Fsda0, BH };

std::string to_string(BenchMethod method);
BenchMethod parse_bench_method(const std::string& name);
bool is_test_method(BenchMethod method);

struct Scenario {
    std::string name;
    SimulationConfig sim;
};

struct BenchmarkConfig {
    std::vector<Scenario> scenarios;
    std::vector<BenchMethod> methods;
    std::size_t reps = 1;
    std::uint64_t seed = 1;
    std::size_t mc_reps = 500;
    double level = 0.05;  // rejection level for the tests
    double alpha = 0.2;   // target FDR for recovery
    double fve_target = 0.90;
    double varrho = 0.05;

    void validate() const;
};

enum class RunStatus { Ok, Failed, Skipped };
std::string to_string(RunStatus status);

struct RunRecord {
    std::size_t cell = 0;
    std::size_t rep = 0;
    BenchMethod method = BenchMethod::QhSum;
    RunStatus status = RunStatus::Ok;
    std::string message;
    // tests
    std::optional<double> pvalue;
    std::optional<bool> rejected;
    std::optional<std::size_t> tau_hat;
    // recovery
    std::optional<double> fdp;
    std::optional<double> tdp;
    std::optional<std::size_t> selected;
};

struct AggregateRow {
    std::size_t cell = 0;
    BenchMethod method = BenchMethod::QhSum;
    std::vector<std::pair<std::string, double>> metrics; // fixed order per method kind
};

struct BenchmarkReport {
    BenchmarkConfig config;
    std::vector<RunRecord> runs;          // ordered by (cell, rep, method)
    std::vector<AggregateRow> aggregates; // ordered by (cell, method)
};

/// simulate -> detect -> (alternatives only) recover, for every scenario,
/// replicate and method. Failures are recorded per run.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

} // namespace spatiofd
