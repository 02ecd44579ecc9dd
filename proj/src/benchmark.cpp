#include "spatiofd/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "spatiofd/recovery.hpp"

namespace spatiofd {

std::string to_string(BenchMethod method) {
    switch (method) {
    case BenchMethod::Q0Sum:
        return "Q0_sum";
    case BenchMethod::Q0Max:
        return "Q0_max";
    case BenchMethod::QhSum:
        return "Qh_sum";
    case BenchMethod::QhMax:
        return "Qh_max";
    case BenchMethod::Fsda:
        return "fsda";
    case BenchMethod::Fsda0:
        return "fsda0";
    case BenchMethod::BH:
        return "bh";
    }
    return "unknown";
}

BenchMethod parse_bench_method(const std::string& name) {
    for (auto m : {BenchMethod::Q0Sum, BenchMethod::Q0Max, BenchMethod::QhSum, BenchMethod::QhMax,
                   BenchMethod::Fsda, BenchMethod::Fsda0, BenchMethod::BH}) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw ValidationError("unknown benchmark method '" + name + "'");
}

bool is_test_method(BenchMethod method) {
    return method == BenchMethod::Q0Sum || method == BenchMethod::Q0Max ||
           method == BenchMethod::QhSum || method == BenchMethod::QhMax;
}

std::string to_string(RunStatus status) {
    switch (status) {
    case RunStatus::Ok:
        return "ok";
    case RunStatus::Failed:
        return "failed";
    case RunStatus::Skipped:
        return "skipped";
    }
    return "unknown";
}

void BenchmarkConfig::validate() const {
    if (reps < 1) {
        throw ValidationError("benchmark needs reps >= 1");
    }
    if (scenarios.empty() || methods.empty()) {
        throw ValidationError("benchmark needs at least one scenario and one method");
    }
    if (!(level > 0.0 && level < 1.0) || !(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("level and alpha must lie in (0, 1)");
    }
    for (const auto& s : scenarios) {
        s.sim.validate();
    }
    bool tests = false;
    for (auto m : methods) {
        tests = tests || is_test_method(m);
    }
    if (tests && mc_reps < 100) {
        throw ValidationError("mc_reps must be at least 100");
    }
}

namespace {

struct Unit {
    std::vector<RunRecord> records; // one per method, in config order
};

Unit run_unit(const BenchmarkConfig& config, std::size_t cell, std::size_t rep) {
    const Scenario& scenario = config.scenarios[cell];
    Rng seeds = make_stream(config.seed, {static_cast<std::uint64_t>(cell), static_cast<std::uint64_t>(rep)});
    SimulationConfig sim = scenario.sim;
    sim.seed = seeds();
    const std::uint64_t mc_seed = seeds();

    bool want_plain = false;
    bool want_kernel = false;
    bool want_max = false;
    bool want_sum = false;
    bool want_recovery = false;
    for (auto m : config.methods) {
        want_plain = want_plain || m == BenchMethod::Q0Sum || m == BenchMethod::Q0Max;
        want_kernel = want_kernel || m == BenchMethod::QhSum || m == BenchMethod::QhMax;
        want_max = want_max || m == BenchMethod::Q0Max || m == BenchMethod::QhMax;
        want_sum = want_sum || m == BenchMethod::Q0Sum || m == BenchMethod::QhSum;
        want_recovery = want_recovery || !is_test_method(m);
    }
    const bool alternative = sim.delta > 0.0;
    // Recovery is scored at the kernel estimate of the change point.
    want_kernel = want_kernel || (want_recovery && alternative);

    Unit unit;
    for (auto m : config.methods) {
        RunRecord rec;
        rec.cell = cell;
        rec.rep = rep;
        rec.method = m;
        unit.records.push_back(rec);
    }
    auto fail_all = [&](const std::string& message) {
        for (auto& rec : unit.records) {
            rec.status = RunStatus::Failed;
            rec.message = message;
        }
    };

    std::optional<SimulatedData> sample;
    std::optional<DetectionSet> detection;
    try {
        sample = simulate(sim);
        DetectionConfig dc;
        dc.fve_target = config.fve_target;
        dc.varrho = config.varrho;
        dc.mc_reps = config.mc_reps;
        dc.seed = mc_seed;
        dc.stat_max = want_max;
        dc.stat_sum = want_sum;
        if (want_plain || want_kernel) {
            detection = detect_all(sample->data, dc, want_kernel, want_plain);
        }
    } catch (const Error& e) {
        fail_all(e.what());
        return unit;
    }

    for (auto& rec : unit.records) {
        if (is_test_method(rec.method)) {
            const bool kernel = rec.method == BenchMethod::QhSum || rec.method == BenchMethod::QhMax;
            const bool sum = rec.method == BenchMethod::Q0Sum || rec.method == BenchMethod::QhSum;
            const auto& res = kernel ? detection->kernel : detection->plain;
            rec.pvalue = sum ? res->p_sum : res->p_max;
            rec.rejected = *rec.pvalue <= config.level;
            rec.tau_hat = res->tau_hat;
            continue;
        }
        if (!alternative) {
            rec.status = RunStatus::Skipped;
            rec.message = "no change under the null scenario";
            continue;
        }
        try {
            RecoveryConfig rc;
            rc.alpha = config.alpha;
            rc.fve_target = config.fve_target;
            rc.varrho = config.varrho;
            rc.bandwidth = detection->bandwidth.bandwidth;
            rc.method = rec.method == BenchMethod::Fsda    ? RecoveryMethod::Fsda
                        : rec.method == BenchMethod::Fsda0 ? RecoveryMethod::Fsda0
                                                           : RecoveryMethod::BH;
            const auto out = recover(sample->data, detection->kernel->tau_hat, rc);
            const auto s = score(out.selected, sample->truth);
            rec.tau_hat = detection->kernel->tau_hat;
            rec.fdp = s.fdp;
            rec.tdp = s.tdp;
            rec.selected = out.selected.size();
        } catch (const Error& e) {
            rec.status = RunStatus::Failed;
            rec.message = e.what();
        }
    }
    return unit;
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) {
        return std::nan("");
    }
    double acc = 0.0;
    for (double x : xs) {
        acc += x;
    }
    return acc / static_cast<double>(xs.size());
}

double sd_of(const std::vector<double>& xs) {
    if (xs.size() < 2) {
        return xs.empty() ? std::nan("") : 0.0;
    }
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) {
        acc += (x - m) * (x - m);
    }
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

AggregateRow aggregate(const BenchmarkConfig& config, std::size_t cell, BenchMethod method,
                       const std::vector<const RunRecord*>& runs) {
    AggregateRow row;
    row.cell = cell;
    row.method = method;
    std::size_t ok = 0;
    std::size_t failed = 0;
    std::vector<double> rejections;
    std::vector<double> errors;
    std::vector<double> fdp;
    std::vector<double> tdp;
    std::vector<double> selected;
    const double tau_star = static_cast<double>(config.scenarios[cell].sim.change_index());
    for (const RunRecord* r : runs) {
        if (r->status == RunStatus::Failed) {
            ++failed;
        }
        if (r->status != RunStatus::Ok) {
            continue;
        }
        ++ok;
        if (r->rejected) {
            rejections.push_back(*r->rejected ? 1.0 : 0.0);
        }
        if (r->tau_hat && is_test_method(method)) {
            errors.push_back(std::abs(static_cast<double>(*r->tau_hat) - tau_star));
        }
        if (r->fdp) {
            fdp.push_back(*r->fdp);
            tdp.push_back(*r->tdp);
            selected.push_back(static_cast<double>(*r->selected));
        }
    }
    row.metrics.emplace_back("completed", static_cast<double>(ok));
    row.metrics.emplace_back("failed", static_cast<double>(failed));
    if (is_test_method(method)) {
        row.metrics.emplace_back("rejection_rate", mean_of(rejections));
        row.metrics.emplace_back("mean_abs_tau_error", mean_of(errors));
        row.metrics.emplace_back("sd_abs_tau_error", sd_of(errors));
    } else {
        row.metrics.emplace_back("fdr", mean_of(fdp));
        row.metrics.emplace_back("ap", mean_of(tdp));
        row.metrics.emplace_back("mean_selected", mean_of(selected));
    }
    return row;
}

} // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
    config.validate();
    const std::size_t cells = config.scenarios.size();
    const std::size_t units = cells * config.reps;
    std::vector<Unit> results(units);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t u = 0; u < static_cast<std::ptrdiff_t>(units); ++u) {
        const auto idx = static_cast<std::size_t>(u);
        results[idx] = run_unit(config, idx / config.reps, idx % config.reps);
    }

    BenchmarkReport report;
    report.config = config;
    for (auto& unit : results) {
        for (auto& rec : unit.records) {
            report.runs.push_back(std::move(rec));
        }
    }
    const std::size_t methods = config.methods.size();
    for (std::size_t c = 0; c < cells; ++c) {
        for (std::size_t m = 0; m < methods; ++m) {
            std::vector<const RunRecord*> runs;
            for (std::size_t r = 0; r < config.reps; ++r) {
                runs.push_back(&report.runs[(c * config.reps + r) * methods + m]);
            }
            report.aggregates.push_back(aggregate(config, c, config.methods[m], runs));
        }
    }
    return report;
}

} // namespace spatiofd
