// spatiofd command-line driver.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "spatiofd/benchmark.hpp"
#include "spatiofd/changepoint.hpp"
#include "spatiofd/config.hpp"
#include "spatiofd/io.hpp"
#include "spatiofd/parallel.hpp"
#include "spatiofd/recovery.hpp"
#include "spatiofd/simgen.hpp"

namespace fs = std::filesystem;
using namespace spatiofd;

namespace {

struct Flags {
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<double> fve;
    std::optional<double> varrho;
    std::optional<std::size_t> mc_reps;
    std::optional<double> alpha;
    std::optional<std::string> method;
    std::optional<std::string> stat;
    std::optional<std::string> statistic;
    std::optional<std::string> null_correlation;
    std::optional<double> bandwidth;
    bool log10 = false;
    std::optional<std::size_t> tau;
    std::optional<std::string> out;
    std::optional<std::string> values;
    std::optional<std::string> locations;
    std::optional<std::string> report;
    // simulation / benchmark
    std::optional<std::size_t> n;
    std::optional<std::size_t> p;
    std::optional<std::string> scheme;
    std::optional<double> delta;
    std::optional<double> r_s;
    std::optional<double> sigma_omega;
    std::optional<std::size_t> tau_star;
    std::optional<std::size_t> t;
    std::optional<std::size_t> reps;
    std::optional<std::string> methods;
};

// Stage label for error messages.
std::string g_stage = "startup";

RunConfig effective_config(const Flags& f) {
    g_stage = "config";
    RunConfig cfg = f.config ? load_run_config(*f.config) : RunConfig{};
    if (f.seed) cfg.seed = *f.seed;
    if (f.fve) cfg.detection.fve_target = *f.fve;
    if (f.varrho) cfg.detection.varrho = *f.varrho;
    if (f.mc_reps) cfg.detection.mc_reps = *f.mc_reps;
    if (f.alpha) cfg.recovery.alpha = *f.alpha;
    if (f.method) cfg.recovery.method = parse_recovery_method(*f.method);
    if (f.stat) parse_stat_list(*f.stat, cfg.detection);
    if (f.statistic) {
        if (*f.statistic != "kernel" && *f.statistic != "plain") {
            throw ValidationError("--statistic must be kernel or plain");
        }
        cfg.detection.kernel = *f.statistic == "kernel";
    }
    if (f.null_correlation) {
        if (*f.null_correlation != "raw" && *f.null_correlation != "smoothed") {
            throw ValidationError("--null-correlation must be raw or smoothed");
        }
        cfg.detection.null_correlation =
            *f.null_correlation == "raw" ? NullCorrelation::Raw : NullCorrelation::Smoothed;
    }
    if (f.bandwidth) cfg.detection.bandwidth = *f.bandwidth;
    if (f.log10) cfg.log10 = true;
    if (f.tau) cfg.tau = *f.tau;
    if (f.out) cfg.out_dir = *f.out;
    if (f.values) cfg.values_path = *f.values;
    if (f.locations) cfg.locations_path = *f.locations;
    if (f.report) cfg.report_path = *f.report;
    auto& sim = cfg.simulation;
    if (f.n) sim.n = *f.n;
    if (f.p) sim.p = *f.p;
    if (f.scheme) sim.scheme = parse_scheme(*f.scheme);
    if (f.delta) sim.delta = *f.delta;
    if (f.r_s) sim.r_s = *f.r_s;
    if (f.sigma_omega) sim.sigma_omega = *f.sigma_omega;
    if (f.tau_star) sim.tau_star = *f.tau_star;
    if (f.t) sim.t = *f.t;
    if (f.reps) cfg.benchmark.reps = *f.reps;
    if (f.methods) {
        cfg.benchmark.methods.clear();
        std::stringstream ss(*f.methods);
        std::string item;
        while (std::getline(ss, item, ',')) {
            cfg.benchmark.methods.push_back(parse_bench_method(item));
        }
    }
    cfg.sync();
    cfg.validate();
    return cfg;
}

fs::path out_dir(const RunConfig& cfg) {
    const fs::path dir = cfg.out_dir.value_or(".");
    std::error_code ec;
    fs::create_directories(dir, ec);
    return dir;
}

SpatialFunctionalDataset load_data(const RunConfig& cfg) {
    g_stage = "ingest";
    if (!cfg.values_path || !cfg.locations_path) {
        throw ValidationError("both --values and --locations are required");
    }
    return ingest(fs::path(*cfg.values_path), fs::path(*cfg.locations_path), IngestOptions{cfg.log10});
}

void write_json(const fs::path& path, const nlohmann::json& doc) {
    auto out = open_output(path);
    out << doc.dump(2) << '\n';
}

int cmd_ingest(const Flags& f) {
    const auto cfg = effective_config(f);
    const auto data = load_data(cfg);
    std::printf("n=%zu p=%zu T=%zu\n", data.n(), data.p(), data.t());
    if (cfg.out_dir) {
        g_stage = "write";
        const auto dir = out_dir(cfg);
        export_dataset(data, dir / "values.csv", dir / "locations.csv");
    }
    return 0;
}

int cmd_detect(const Flags& f) {
    const auto cfg = effective_config(f);
    const auto data = load_data(cfg);
    g_stage = "detect";
    const auto result = detect(data, cfg.detection);

    g_stage = "write";
    Report report;
    report.detection = DetectionBlock::from(result);
    report.provenance = make_provenance(to_json(cfg).dump(), cfg.seed);
    const auto dir = out_dir(cfg);
    write_json(dir / "report.json", to_json(report));
    auto q = open_output(dir / "q_profile.csv");
    write_q_profile(result.profile, q);

    std::printf("tau_hat=%zu q_max=%s q_sum=%s", result.tau_hat, format_double(result.q_max).c_str(),
                format_double(result.q_sum).c_str());
    if (result.p_max) std::printf(" p_max=%s", format_double(*result.p_max).c_str());
    if (result.p_sum) std::printf(" p_sum=%s", format_double(*result.p_sum).c_str());
    std::printf("\n");
    return 0;
}

int cmd_recover(const Flags& f) {
    auto cfg = effective_config(f);
    std::optional<Report> previous;
    if (cfg.report_path) {
        g_stage = "report";
        previous = read_report(*cfg.report_path);
    }
    std::optional<std::size_t> tau = cfg.tau;
    if (!tau && previous && previous->detection) {
        tau = previous->detection->tau_hat;
    }
    if (!tau) {
        g_stage = "config";
        throw ValidationError("no change point: pass --tau or a detection --report");
    }
    const auto data = load_data(cfg);
    if (!cfg.recovery.bandwidth && previous && previous->detection && previous->detection->statistic == "Qh") {
        cfg.recovery.bandwidth = previous->detection->bandwidth;
    }
    g_stage = "recover";
    const auto result = recover(data, *tau, cfg.recovery);

    g_stage = "write";
    Report report = previous.value_or(Report{});
    report.recovery = RecoveryBlock::from(result, data.domain());
    report.provenance = make_provenance(to_json(cfg).dump(), cfg.seed);
    const auto dir = out_dir(cfg);
    write_json(dir / "report.json", to_json(report));
    auto csv = open_output(dir / "recovery.csv");
    write_recovery(result, data.domain(), csv);
    std::printf("method=%s selected=%zu threshold=%s\n", to_string(result.method).c_str(),
                result.selected.size(), format_double(result.threshold).c_str());
    return 0;
}

int cmd_simulate(const Flags& f) {
    const auto cfg = effective_config(f);
    g_stage = "simulate";
    const auto sample = simulate(cfg.simulation);
    g_stage = "write";
    const auto dir = out_dir(cfg);
    export_dataset(sample.data, dir / "values.csv", dir / "locations.csv");
    auto truth = open_output(dir / "truth.csv");
    write_ground_truth(sample.truth, sample.data.domain(), truth);
    std::printf("n=%zu p=%zu T=%zu tau_star=%zu support=%zu\n", sample.data.n(), sample.data.p(),
                sample.data.t(), sample.truth.tau_star, sample.truth.support_size());
    return 0;
}

int cmd_benchmark(const Flags& f) {
    auto cfg = effective_config(f);
    g_stage = "benchmark";
    auto bench = cfg.benchmark;
    if (bench.scenarios.empty()) {
        bench.scenarios.push_back({"cli", cfg.simulation});
    }
    if (bench.methods.empty()) {
        bench.methods = {BenchMethod::Q0Sum, BenchMethod::Q0Max, BenchMethod::QhSum, BenchMethod::QhMax,
                         BenchMethod::Fsda,  BenchMethod::Fsda0, BenchMethod::BH};
    }
    const auto report = run_benchmark(bench);
    g_stage = "write";
    const auto dir = out_dir(cfg);
    auto csv = open_output(dir / "benchmark.csv");
    write_benchmark_csv(report, csv);
    write_json(dir / "benchmark.json", benchmark_to_json(report));
    std::size_t failed = 0;
    for (const auto& r : report.runs) {
        failed += r.status == RunStatus::Failed ? 1 : 0;
    }
    std::printf("runs=%zu failed=%zu aggregates=%zu\n", report.runs.size(), failed, report.aggregates.size());
    return 0;
}

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--out", f.out, "output directory");
}

void add_data(CLI::App* cmd, Flags& f) {
    cmd->add_option("--values", f.values, "long CSV: replicate,location_id,time_index,value");
    cmd->add_option("--locations", f.locations, "locations CSV: location_id,x[,y]");
    cmd->add_flag("--log10", f.log10, "map values v -> log10(v + 1)");
}

void add_detection(CLI::App* cmd, Flags& f) {
    cmd->add_option("--fve", f.fve, "FVE target for the FPCA truncation");
    cmd->add_option("--varrho", f.varrho, "correlation level for the bandwidth rule");
    cmd->add_option("--bandwidth", f.bandwidth, "fixed kernel bandwidth");
}

void add_simulation(CLI::App* cmd, Flags& f) {
    cmd->add_option("--n", f.n, "replicates");
    cmd->add_option("--p", f.p, "locations");
    cmd->add_option("--scheme", f.scheme, "grid1d, grid2d or poisson");
    cmd->add_option("--delta", f.delta, "mean-shift strength");
    cmd->add_option("--r-s", f.r_s, "shift radius");
    cmd->add_option("--sigma-omega", f.sigma_omega, "Gaussian bump scale (default r_s/2)");
    cmd->add_option("--tau-star", f.tau_star, "change index (default n/2)");
    cmd->add_option("--T", f.t, "time points");
}

} // namespace

int main(int argc, char** argv) {
    configure_threads_from_env();
    CLI::App app{"Change-point detection and support recovery for spatial functional data"};
    app.require_subcommand(1);
    Flags f;

    auto* ingest_cmd = app.add_subcommand("ingest", "validate and normalize a dataset");
    add_common(ingest_cmd, f);
    add_data(ingest_cmd, f);

    auto* detect_cmd = app.add_subcommand("detect", "test for a global change point");
    add_common(detect_cmd, f);
    add_data(detect_cmd, f);
    add_detection(detect_cmd, f);
    detect_cmd->add_option("--mc-reps", f.mc_reps, "Monte Carlo replicates for the null");
    detect_cmd->add_option("--stat", f.stat, "statistics to calibrate: max,sum");
    detect_cmd->add_option("--statistic", f.statistic, "kernel (Q_h) or plain (Q_0)");
    detect_cmd->add_option("--null-correlation", f.null_correlation, "raw or smoothed");

    auto* recover_cmd = app.add_subcommand("recover", "recover the locations that changed");
    add_common(recover_cmd, f);
    add_data(recover_cmd, f);
    add_detection(recover_cmd, f);
    recover_cmd->add_option("--method", f.method, "fsda, fsda0 or bh");
    recover_cmd->add_option("--alpha", f.alpha, "target FDR");
    recover_cmd->add_option("--tau", f.tau, "change point (overrides --report)");
    recover_cmd->add_option("--report", f.report, "detection report supplying tau");

    auto* simulate_cmd = app.add_subcommand("simulate", "generate a synthetic dataset");
    add_common(simulate_cmd, f);
    add_simulation(simulate_cmd, f);

    auto* bench_cmd = app.add_subcommand("benchmark", "run the simulation benchmark");
    add_common(bench_cmd, f);
    add_simulation(bench_cmd, f);
    bench_cmd->add_option("--fve", f.fve, "FVE target");
    bench_cmd->add_option("--varrho", f.varrho, "bandwidth correlation level");
    bench_cmd->add_option("--mc-reps", f.mc_reps, "Monte Carlo replicates");
    bench_cmd->add_option("--alpha", f.alpha, "target FDR for recovery");
    bench_cmd->add_option("--reps", f.reps, "replications per scenario");
    bench_cmd->add_option("--methods", f.methods, "comma list of Q0_sum,Q0_max,Qh_sum,Qh_max,fsda,fsda0,bh");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        if (name == "ingest") return cmd_ingest(f);
        if (name == "detect") return cmd_detect(f);
        if (name == "recover") return cmd_recover(f);
        if (name == "simulate") return cmd_simulate(f);
        return cmd_benchmark(f);
    } catch (const ValidationError& e) {
        std::cerr << "spatiofd " << name << " [" << g_stage << "]: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "spatiofd " << name << " [" << g_stage << "]: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "spatiofd " << name << " [" << g_stage << "]: " << e.what() << '\n';
        return 1;
    }
}
