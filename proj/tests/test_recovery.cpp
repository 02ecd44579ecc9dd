#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "spatiofd/recovery.hpp"
#include "spatiofd/simgen.hpp"

using namespace spatiofd;
using doctest::Approx;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) {
        v(k++) = x;
    }
    return v;
}

// Brute-force ratio of the threshold rule at t.
double sda_ratio(const Vector& w, double t) {
    const double neg = static_cast<double>((w.array() <= -t).count());
    const double pos = static_cast<double>((w.array() >= t).count());
    return (1.0 + neg) / std::max(pos, 1.0);
}

} // namespace

TEST_CASE("order-preserving split") {
    const auto d8 = testutil::noise_dataset(8, 3, 5, 1);
    const auto s8 = split_dataset(d8);
    CHECK(s8.m == 4);
    CHECK(s8.odd.n() == 4);
    CHECK(s8.even.n() == 4);
    CHECK(s8.odd_index == std::vector<std::size_t>{1, 3, 5, 7});
    CHECK(s8.even_index == std::vector<std::size_t>{2, 4, 6, 8});
    CHECK(s8.odd.replicate(1) == d8.replicate(2));
    CHECK(s8.even.replicate(3) == d8.replicate(7));
    CHECK(s8.odd.domain() == d8.domain());
    CHECK(s8.odd.grid() == d8.grid());

    const auto d9 = testutil::noise_dataset(9, 2, 4, 2);
    const auto s9 = split_dataset(d9);
    CHECK(s9.m == 4);
    CHECK(s9.odd_index == std::vector<std::size_t>{1, 3, 5, 7});
    CHECK(s9.even_index == std::vector<std::size_t>{2, 4, 6, 8});

    CHECK_THROWS_AS(split_dataset(testutil::noise_dataset(4, 2, 4, 3)), ValidationError);
    CHECK_THROWS_AS(split_dataset(testutil::noise_dataset(7, 2, 4, 3)), ValidationError);
}

TEST_CASE("kernel smoothing") {
    Matrix one(1, 1);
    one << 0.3;
    const auto d1 = SpatialDomain::with_default_ids(one);
    Matrix eta1(2, 1);
    eta1 << 1.5, -2.0;
    CHECK(kernel_smooth(eta1, build_kernel_matrix(d1, 0.1)) == eta1);

    Matrix same(2, 2);
    same << 0.2, 0.2, 0.2, 0.2;
    const SpatialDomain d2(same, {"a", "b"});
    Matrix eta2(1, 2);
    eta2 << 1.0, 4.0;
    const Matrix s2 = kernel_smooth(eta2, build_kernel_matrix(d2, 0.5));
    CHECK(s2(0, 0) == Approx(2.5));
    CHECK(s2(0, 1) == Approx(2.5));

    Rng rng = make_stream(4, {});
    const auto dom = testutil::random_domain(20, rng);
    const Matrix flat = Matrix::Constant(3, 20, -1.25);
    const Matrix sf = kernel_smooth(flat, build_kernel_matrix(dom, 0.2));
    CHECK((sf.array() + 1.25).abs().maxCoeff() < 1e-14);

    // Brute-force Nadaraya-Watson.
    const Matrix eta = testutil::random_matrix(2, 20, rng);
    const auto k = build_kernel_matrix(dom, 0.15);
    const Matrix fast = kernel_smooth(eta, k);
    for (Eigen::Index r = 0; r < 2; ++r) {
        for (Eigen::Index j = 0; j < 20; ++j) {
            double num = 0.0, den = 0.0;
            for (Eigen::Index q = 0; q < 20; ++q) {
                num += k.entries(q, j) * eta(r, q);
                den += k.entries(q, j);
            }
            CHECK(fast(r, j) == Approx(num / den).epsilon(1e-12));
        }
    }
}

TEST_CASE("ranking statistics") {
    Matrix a(1, 1), b(1, 1);
    a << 2;
    b << 3;
    CHECK(ranking_statistics(a, b)(0) == 6.0);
    a << -2;
    CHECK(ranking_statistics(a, b)(0) == -6.0);
    Matrix c(2, 1), d(2, 1);
    c << 1, 2;
    d << 1, 1;
    CHECK(ranking_statistics(c, d)(0) == 3.0);
    CHECK_THROWS_AS(ranking_statistics(c, b), ValidationError);
}

TEST_CASE("symmetrized threshold examples") {
    auto t = sda_threshold(vec({5, 4, 3, -1}), 0.5);
    CHECK(t.threshold == 3.0);
    CHECK(t.selected == std::vector<std::size_t>{0, 1, 2});

    t = sda_threshold(vec({-1, -2, -0.5}), 0.4);
    CHECK(std::isinf(t.threshold));
    CHECK(t.selected.empty());

    t = sda_threshold(vec({10}), 0.2);
    CHECK(std::isinf(t.threshold));
    CHECK(t.selected.empty());
}

TEST_CASE("symmetrized threshold properties on random W") {
    Rng rng = make_stream(5, {});
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 200; ++trial) {
        Vector w(60);
        for (Eigen::Index j = 0; j < 60; ++j) {
            w(j) = normal(rng) + (j < 20 ? 2.5 : 0.0);
        }
        double previous_l = std::numeric_limits<double>::infinity();
        std::size_t previous_count = 0;
        for (double alpha : {0.05, 0.1, 0.2, 0.3, 0.5}) {
            const auto t = sda_threshold(w, alpha);
            if (std::isfinite(t.threshold)) {
                CHECK(sda_ratio(w, t.threshold) <= alpha);
                for (Eigen::Index j = 0; j < 60; ++j) {
                    const double c = std::abs(w(j));
                    if (c > 0.0 && c < t.threshold) {
                        CHECK(sda_ratio(w, c) > alpha);
                    }
                }
                for (std::size_t j : t.selected) {
                    CHECK(w(static_cast<Eigen::Index>(j)) >= t.threshold);
                }
                CHECK(t.selected.size() == static_cast<std::size_t>((w.array() >= t.threshold).count()));
            } else {
                CHECK(t.selected.empty());
            }
            CHECK(t.threshold <= previous_l);
            CHECK(t.selected.size() >= previous_count);
            previous_l = t.threshold;
            previous_count = t.selected.size();
        }
    }
}

TEST_CASE("Benjamini-Hochberg step-up") {
    CHECK(benjamini_hochberg(vec({0.01, 0.02, 0.04, 0.5}), 0.1) == std::vector<std::size_t>{0, 1, 2});
    CHECK(benjamini_hochberg(vec({1, 1, 1}), 0.1).empty());
    CHECK(benjamini_hochberg(vec({0.01}), 0.05) == std::vector<std::size_t>{0});
    // Step-up: rank 2 qualifies although rank 1 does not.
    CHECK(benjamini_hochberg(vec({0.045, 0.03, 0.5, 0.9}), 0.1) == std::vector<std::size_t>{0, 1});
    CHECK(benjamini_hochberg(vec({0.5, 0.03, 0.035, 0.04}), 0.2) == std::vector<std::size_t>{1, 2, 3});
}

TEST_CASE("method names") {
    CHECK(parse_recovery_method("fsda") == RecoveryMethod::Fsda);
    CHECK(parse_recovery_method("fsda0") == RecoveryMethod::Fsda0);
    CHECK(parse_recovery_method("bh") == RecoveryMethod::BH);
    CHECK_THROWS_AS(parse_recovery_method("laws"), ValidationError);
    CHECK(to_string(RecoveryMethod::Fsda0) == "fsda0");
}

TEST_CASE("recovery configuration checks") {
    const auto data = testutil::noise_dataset(20, 4, 8, 6);
    RecoveryConfig cfg;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(recover(data, 10, cfg), ValidationError);
    cfg.alpha = 1.0;
    CHECK_THROWS_AS(recover(data, 10, cfg), ValidationError);
    cfg.alpha = 0.2;
    CHECK_THROWS_AS(recover(data, 0, cfg), ValidationError);
    CHECK_THROWS_AS(recover(data, 20, cfg), ValidationError);
    CHECK_NOTHROW(recover(data, 10, cfg));
}

TEST_CASE("fsda and fsda0 coincide at a single location") {
    SimulationConfig sim;
    sim.n = 40;
    sim.p = 1;
    sim.scheme = Scheme::Grid1d;
    sim.delta = 1.0;
    sim.r_s = 1.0;
    sim.seed = 3;
    const auto sample = simulate(sim);
    RecoveryConfig cfg;
    cfg.method = RecoveryMethod::Fsda;
    const auto a = recover(sample.data, 20, cfg);
    cfg.method = RecoveryMethod::Fsda0;
    const auto b = recover(sample.data, 20, cfg);
    CHECK(a.w == b.w);
    CHECK(a.selected == b.selected);
    CHECK(a.threshold == b.threshold);
}

TEST_CASE("fsda with a vanishing bandwidth is fsda0") {
    SimulationConfig sim;
    sim.n = 60;
    sim.p = 40;
    sim.delta = 1.0;
    sim.seed = 4;
    const auto sample = simulate(sim);
    const Matrix dist = sample.data.domain().distance_matrix() +
                        Matrix::Identity(40, 40) * 1e9;
    RecoveryConfig cfg;
    cfg.method = RecoveryMethod::Fsda;
    cfg.bandwidth = 1e-6 * dist.minCoeff();
    const auto a = recover(sample.data, 30, cfg);
    cfg.method = RecoveryMethod::Fsda0;
    const auto b = recover(sample.data, 30, cfg);
    CHECK((a.w - b.w).cwiseAbs().maxCoeff() <= 1e-6 * b.w.cwiseAbs().maxCoeff());
    CHECK(a.selected == b.selected);
}

TEST_CASE("recovery is equivariant under location permutation") {
    SimulationConfig sim;
    sim.n = 60;
    sim.p = 50;
    sim.delta = 1.0;
    sim.seed = 5;
    const auto sample = simulate(sim);
    std::vector<std::size_t> order(50);
    for (std::size_t j = 0; j < 50; ++j) {
        order[j] = (j * 17 + 3) % 50;
    }
    const auto permuted = sample.data.permute_locations(order);
    for (auto method : {RecoveryMethod::Fsda, RecoveryMethod::Fsda0, RecoveryMethod::BH}) {
        RecoveryConfig cfg;
        cfg.method = method;
        const auto a = recover(sample.data, 30, cfg);
        const auto b = recover(permuted, 30, cfg);
        for (std::size_t j = 0; j < 50; ++j) {
            CHECK(b.w(static_cast<Eigen::Index>(j)) ==
                  Approx(a.w(static_cast<Eigen::Index>(order[j]))).epsilon(1e-9));
        }
        std::vector<std::size_t> mapped;
        for (std::size_t j : b.selected) {
            mapped.push_back(order[j]);
        }
        std::sort(mapped.begin(), mapped.end());
        CHECK(mapped == a.selected);
    }
}

TEST_CASE("BH baseline statistics") {
    SimulationConfig sim;
    sim.n = 80;
    sim.p = 60;
    sim.delta = 1.5;
    sim.seed = 6;
    const auto sample = simulate(sim);
    RecoveryConfig cfg;
    cfg.method = RecoveryMethod::BH;
    const auto res = recover(sample.data, 40, cfg);
    CHECK(res.pvalues.size() == 60);
    CHECK(res.pvalues.minCoeff() >= 0.0);
    CHECK(res.pvalues.maxCoeff() <= 1.0);
    // Larger statistics, smaller p-values.
    for (Eigen::Index j = 0; j < 60; ++j) {
        for (Eigen::Index k = 0; k < 60; ++k) {
            if (res.w(j) > res.w(k)) {
                CHECK(res.pvalues(j) <= res.pvalues(k));
            }
        }
    }
    CHECK(res.selected == benjamini_hochberg(res.pvalues, 0.2));
    const auto s = score(res.selected, sample.truth);
    CHECK(s.tdp > 0.5);
}

TEST_CASE("fsda on a one-dimensional domain with a strong shift") {
    // Regular grid on [0, 1], flat shift of 0.5 on [0.2, 0.8].
    SimulationConfig sim;
    sim.n = 100;
    sim.p = 200;
    sim.scheme = Scheme::Grid1d;
    sim.delta = 0.5;
    sim.r_s = 0.3;
    sim.sigma_omega = 1e9;
    sim.seed = 42;
    const auto sample = simulate(sim);
    RecoveryConfig cfg;
    cfg.alpha = 0.2;
    cfg.method = RecoveryMethod::Fsda;
    const auto smooth = recover(sample.data, sample.truth.tau_star, cfg);
    cfg.method = RecoveryMethod::Fsda0;
    const auto plain = recover(sample.data, sample.truth.tau_star, cfg);
    const auto s1 = score(smooth.selected, sample.truth);
    const auto s0 = score(plain.selected, sample.truth);
    MESSAGE("fSDA TDP " << s1.tdp << " FDP " << s1.fdp << " L " << smooth.threshold << "; fSDA0 TDP "
                        << s0.tdp << " FDP " << s0.fdp << " L " << plain.threshold);
    CHECK(std::abs(s1.tdp - 0.98) <= 0.10);
    CHECK(std::abs(s0.tdp - 0.84) <= 0.10);
}

TEST_CASE("null data rarely yields discoveries") {
    const int runs = 50;
    int any = 0;
    for (int run = 0; run < runs; ++run) {
        SimulationConfig sim;
        sim.n = 60;
        sim.p = 60;
        sim.t = 40;
        sim.seed = 500 + static_cast<std::uint64_t>(run);
        const auto sample = simulate(sim);
        RecoveryConfig cfg;
        any += recover(sample.data, 30, cfg).selected.empty() ? 0 : 1;
    }
    MESSAGE("runs with any discovery: " << any << "/" << runs);
    CHECK(static_cast<double>(any) / runs <= 0.2);
}
