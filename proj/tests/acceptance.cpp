// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fail. Pass criterion numbers as arguments to run a
// subset.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "spatiofd/benchmark.hpp"
#include "spatiofd/changepoint.hpp"
#include "spatiofd/fpca.hpp"
#include "spatiofd/kernels.hpp"
#include "spatiofd/recovery.hpp"
#include "spatiofd/reference.hpp"
#include "spatiofd/simgen.hpp"

using namespace spatiofd;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 4) {
    std::ostringstream s;
    s.precision(digits);
    s << x;
    return s.str();
}

double rate(const AggregateRow& row, const std::string& name) {
    for (const auto& [k, v] : row.metrics) {
        if (k == name) {
            return v;
        }
    }
    throw std::runtime_error("missing metric " + name);
}

const AggregateRow& row_for(const BenchmarkReport& rep, std::size_t cell, BenchMethod m) {
    for (const auto& r : rep.aggregates) {
        if (r.cell == cell && r.method == m) {
            return r;
        }
    }
    throw std::runtime_error("missing aggregate row");
}

SimulationConfig scenario_iii(std::size_t p, double delta, double r_s) {
    SimulationConfig s;
    s.n = 100;
    s.p = p;
    s.scheme = Scheme::Poisson;
    s.delta = delta;
    s.r_s = r_s;
    return s;
}

// 1. Kernel quadratic form against the brute-force double sum.
Outcome oracle_equivalence() {
    Rng rng = make_stream(101, {});
    std::uniform_int_distribution<std::size_t> pick_p(1, 30), pick_r(1, 5), pick_tau(1, 20);
    std::uniform_real_distribution<double> unit(0.0, 1.0), bw(0.05, 0.5);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    for (int instance = 0; instance < 100; ++instance) {
        const std::size_t p = pick_p(rng), r = pick_r(rng), taus = pick_tau(rng);
        Matrix coords(static_cast<Eigen::Index>(p), 2);
        for (Eigen::Index i = 0; i < coords.size(); ++i) {
            coords.data()[i] = unit(rng);
        }
        const auto k = build_kernel_matrix(SpatialDomain::with_default_ids(coords), bw(rng));
        RowMatrix eta(static_cast<Eigen::Index>(taus * r), static_cast<Eigen::Index>(p));
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            eta.data()[i] = normal(rng);
        }
        const Vector fast = kernels::quadratic_profile(eta, r, &k.entries);
        const Vector slow = reference::quadratic_profile(eta, r, &k.entries);
        worst = std::max(worst, (fast - slow).cwiseAbs().maxCoeff() / slow.cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-10, "max relative difference " + fmt(worst, 3) + " over 100 instances (tol 1e-10)"};
}

// 95th percentile of sup B^2 from the Kolmogorov distribution of sup |B|.
double kolmogorov_sup_square_quantile(double level) {
    auto cdf = [](double x) {
        double s = 0.0;
        for (int k = 1; k <= 100; ++k) {
            s += ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
        }
        return 1.0 - 2.0 * s;
    };
    double lo = 0.5, hi = 3.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < level ? lo : hi) = mid;
    }
    const double x = 0.5 * (lo + hi);
    return x * x;
}

// 2. Brownian-bridge null with p = 1.
Outcome bridge_fidelity() {
    const std::size_t reps = 50000;
    const std::size_t n = 4000; // grid x_k = k/n
    Vector at_half(static_cast<Eigen::Index>(reps)), average(static_cast<Eigen::Index>(reps)),
        sup(static_cast<Eigen::Index>(reps));
    for (std::size_t b = 0; b < reps; ++b) {
        Rng rng = make_stream(202, {b});
        const Matrix path = draw_standard_bridges(rng, 1, n);
        const auto sq = path.row(0).array().square();
        at_half(static_cast<Eigen::Index>(b)) = path(0, static_cast<Eigen::Index>(n / 2 - 1));
        average(static_cast<Eigen::Index>(b)) = sq.sum() / static_cast<double>(n);
        sup(static_cast<Eigen::Index>(b)) = sq.maxCoeff();
    }
    const double var = (at_half.array() - at_half.mean()).square().sum() / (reps - 1);
    const double mean_sum = average.mean();
    std::vector<double> s(sup.data(), sup.data() + sup.size());
    std::sort(s.begin(), s.end());
    const double q95 = s[static_cast<std::size_t>(std::ceil(0.95 * reps)) - 1];
    const double oracle = kolmogorov_sup_square_quantile(0.95);
    const bool ok = std::abs(var - 0.25) <= 0.01 && std::abs(mean_sum - 1.0 / 6.0) <= 0.01 &&
                    std::abs(q95 - 1.844) <= 0.05 && std::abs(oracle - 1.844) <= 0.005;
    return {ok, "Var B(0.5)=" + fmt(var) + " (0.25±0.01), mean sum=" + fmt(mean_sum) +
                    " (1/6±0.01), q95 sup B^2=" + fmt(q95) + " (1.844±0.05; Kolmogorov " + fmt(oracle) + ")"};
}

// 3. Size of the four tests under the null.
Outcome size_calibration() {
    BenchmarkConfig cfg;
    cfg.scenarios = {{"size", scenario_iii(50, 0.0, 0.4)}};
    cfg.methods = {BenchMethod::Q0Sum, BenchMethod::Q0Max, BenchMethod::QhSum, BenchMethod::QhMax};
    cfg.reps = 200;
    cfg.mc_reps = 500;
    cfg.seed = 303;
    const auto rep = run_benchmark(cfg);
    bool ok = true;
    std::string detail;
    for (auto m : cfg.methods) {
        const auto& row = row_for(rep, 0, m);
        const double r = rate(row, "rejection_rate");
        ok = ok && r >= 0.02 && r <= 0.10 && rate(row, "failed") == 0.0;
        detail += to_string(m) + "=" + fmt(r, 3) + " ";
    }
    return {ok, detail + "(each within [0.02, 0.10])"};
}

// 4. Power ordering and monotonicity in delta.
Outcome power_ordering() {
    BenchmarkConfig cfg;
    cfg.scenarios = {{"d0.3", scenario_iii(100, 0.3, 0.6)}, {"d0.2", scenario_iii(100, 0.2, 0.6)}};
    cfg.methods = {BenchMethod::Q0Sum, BenchMethod::QhSum};
    cfg.reps = 100;
    cfg.mc_reps = 500;
    cfg.seed = 404;
    const auto rep = run_benchmark(cfg);
    const double qh3 = rate(row_for(rep, 0, BenchMethod::QhSum), "rejection_rate");
    const double q03 = rate(row_for(rep, 0, BenchMethod::Q0Sum), "rejection_rate");
    const double qh2 = rate(row_for(rep, 1, BenchMethod::QhSum), "rejection_rate");
    const double q02 = rate(row_for(rep, 1, BenchMethod::Q0Sum), "rejection_rate");
    const bool ok = qh3 > q03 && qh3 > qh2 && q03 > q02;
    return {ok, "delta=0.3: Qh_sum=" + fmt(qh3, 3) + " Q0_sum=" + fmt(q03, 3) + "; delta=0.2: Qh_sum=" +
                    fmt(qh2, 3) + " Q0_sum=" + fmt(q02, 3)};
}

// 5. Change-point estimation error with a strong shift.
Outcome change_point_consistency() {
    const int runs = 100;
    double total = 0.0, total_sq = 0.0;
    for (int run = 0; run < runs; ++run) {
        auto sim = scenario_iii(100, 1.0, 0.4);
        sim.seed = make_stream(505, {static_cast<std::uint64_t>(run)})();
        const auto sample = simulate(sim);
        DetectionConfig cfg;
        cfg.stat_max = cfg.stat_sum = false;
        const auto res = detect(sample.data, cfg);
        const double err = std::abs(static_cast<double>(res.tau_hat) - static_cast<double>(sample.truth.tau_star));
        total += err;
        total_sq += err * err;
    }
    const double mean = total / runs;
    const double sd = std::sqrt(std::max(total_sq / runs - mean * mean, 0.0));
    return {mean <= 0.6, "mean |tau_hat - tau*| = " + fmt(mean, 3) + " (SD " + fmt(sd, 3) + "; bound 0.6)"};
}

// 6. False discovery rate and power of the recovery procedures.
Outcome fdr_control() {
    BenchmarkConfig cfg;
    cfg.scenarios = {{"fdr", scenario_iii(100, 0.4, 0.4)}};
    cfg.methods = {BenchMethod::QhSum, BenchMethod::Fsda, BenchMethod::Fsda0};
    cfg.reps = 100;
    cfg.mc_reps = 100;
    cfg.alpha = 0.2;
    cfg.seed = 606;
    const auto rep = run_benchmark(cfg);
    const auto& f = row_for(rep, 0, BenchMethod::Fsda);
    const auto& f0 = row_for(rep, 0, BenchMethod::Fsda0);
    const bool ok = rate(f, "fdr") <= 0.25 && rate(f0, "fdr") <= 0.25 && rate(f, "ap") >= rate(f0, "ap") &&
                    rate(f, "failed") == 0.0 && rate(f0, "failed") == 0.0;
    return {ok, "fSDA FDR=" + fmt(rate(f, "fdr"), 3) + " AP=" + fmt(rate(f, "ap"), 3) + "; fSDA0 FDR=" +
                    fmt(rate(f0, "fdr"), 3) + " AP=" + fmt(rate(f0, "ap"), 3) + " (FDR <= 0.25, AP ordered)"};
}

struct Tail {
    double pos = 0.0;
    double neg = 0.0;
};

// Counts beyond +-t, t the 70th percentile of |W|.
Tail tail_counts(const Vector& w) {
    std::vector<double> a(static_cast<std::size_t>(w.size()));
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        a[static_cast<std::size_t>(j)] = std::abs(w(j));
    }
    std::sort(a.begin(), a.end());
    const double t = a[static_cast<std::size_t>(std::floor(0.7 * static_cast<double>(a.size() - 1)))];
    return {static_cast<double>((w.array() >= t).count()), static_cast<double>((w.array() <= -t).count())};
}

double asymmetry(const Tail& c) { return std::abs(c.pos - c.neg) / std::max(c.neg, 1.0); }

// 7. Null symmetry of the ranking statistics.
Outcome null_symmetry() {
    const int runs = 50;
    double smooth = 0.0, plain = 0.0;
    Tail pooled;
    for (int run = 0; run < runs; ++run) {
        auto sim = scenario_iii(200, 0.0, 0.4);
        sim.seed = make_stream(707, {static_cast<std::uint64_t>(run)})();
        const auto sample = simulate(sim);
        RecoveryConfig cfg;
        cfg.method = RecoveryMethod::Fsda;
        const Tail c = tail_counts(recover(sample.data, sim.n / 2, cfg).w);
        smooth += asymmetry(c);
        pooled.pos += c.pos;
        pooled.neg += c.neg;
        cfg.method = RecoveryMethod::Fsda0;
        plain += asymmetry(tail_counts(recover(sample.data, sim.n / 2, cfg).w));
    }
    smooth /= runs;
    plain /= runs;
    return {smooth < 0.3, "mean relative asymmetry at the 70th percentile of |W|: fSDA " + fmt(smooth, 3) +
                              " (bound 0.3); fSDA0 " + fmt(plain, 3) + "; fSDA pooled counts " +
                              fmt(pooled.pos / runs, 4) + " vs " + fmt(pooled.neg / runs, 4)};
}

// 8. FPCA recovers the generating eigenfunctions and eigenvalues.
Outcome fpca_consistency() {
    auto sim = scenario_iii(20, 0.0, 0.4);
    sim.n = 2000;
    sim.seed = 808;
    const auto sample = simulate(sim);
    const auto model = fit_fpca(sample.data, 0.999, std::size_t{3});
    const auto& grid = sample.data.grid();
    bool ok = true;
    std::string detail;
    for (int r = 1; r <= 3; ++r) {
        const Vector psi = fourier_eigenfunction(r, grid);
        const Vector est = model.eigenfunctions.row(r - 1).transpose();
        const double ip = std::abs(inner_product({est.data(), grid.size()}, {psi.data(), grid.size()}, grid));
        const double lambda = model.eigenvalues(r - 1);
        const double omega = SimulationConfig::omega(r);
        const double rel = std::abs(lambda - omega) / omega;
        ok = ok && ip > 0.95 && rel <= 0.10;
        detail += "r=" + std::to_string(r) + ": |<psi_hat,psi>|=" + fmt(ip, 4) + " lambda=" + fmt(lambda, 4) +
                  " vs " + fmt(omega, 4) + "; ";
    }
    return {ok, detail};
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 9. Byte-identical benchmark output across thread caps.
Outcome determinism() {
    const auto root = fs::temp_directory_path() / "spatiofd_acceptance_determinism";
    fs::remove_all(root);
    const std::string args = std::string(" benchmark --n 60 --p 36 --scheme poisson --delta 1 --reps 6 ") +
                             "--mc-reps 200 --seed 909 --out ";
    std::vector<std::string> csv, json;
    for (int threads : {1, 2, 4}) {
        const auto out = root / ("t" + std::to_string(threads));
        for (int repeat = 0; repeat < 2; ++repeat) {
            const std::string cmd = "SPATIOFD_THREADS=" + std::to_string(threads) + " " + SPATIOFD_CLI + args +
                                    out.string() + " >/dev/null 2>&1";
            const int status = std::system(cmd.c_str());
            if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
                return {false, "benchmark command failed with SPATIOFD_THREADS=" + std::to_string(threads)};
            }
            csv.push_back(slurp(out / "benchmark.csv"));
            json.push_back(slurp(out / "benchmark.json"));
        }
    }
    const bool ok = !csv[0].empty() && std::all_of(csv.begin(), csv.end(), [&](auto& s) { return s == csv[0]; }) &&
                    std::all_of(json.begin(), json.end(), [&](auto& s) { return s == json[0]; });
    fs::remove_all(root);
    return {ok, std::to_string(csv.size()) + " runs at SPATIOFD_THREADS=1,2,4; outputs " +
                    (ok ? "byte-identical" : "differ")};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
};

} // namespace

int main(int argc, char** argv) {
    configure_threads_from_env();
    const std::vector<Criterion> all = {
        {1, "kernel quadratic form oracle", 5, oracle_equivalence},
        {2, "Brownian-bridge null fidelity", 30, bridge_fidelity},
        {3, "size calibration", 1800, size_calibration},
        {4, "power ordering", 1800, power_ordering},
        {5, "change-point consistency", 1200, change_point_consistency},
        {6, "FDR control", 1800, fdr_control},
        {7, "null symmetry of W", 600, null_symmetry},
        {8, "FPCA consistency", 120, fpca_consistency},
        {9, "determinism across thread counts", 300, determinism},
    };
    std::set<int> wanted;
    for (int k = 1; k < argc; ++k) {
        wanted.insert(std::atoi(argv[k]));
    }
    int failures = 0;
    for (const auto& c : all) {
        if (!wanted.empty() && !wanted.count(c.id)) {
            continue;
        }
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_seconds;
        const bool pass = out.pass && in_time;
        failures += pass ? 0 : 1;
        std::printf("%s criterion %d (%s): %s [%.1fs, budget %.0fs%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    out.detail.c_str(), secs, c.budget_seconds, in_time ? "" : ", OVER BUDGET");
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
