#include "spatiofd/simgen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace spatiofd {

std::string to_string(Scheme scheme) {
    switch (scheme) {
    case Scheme::Grid1d:
        return "grid1d";
    case Scheme::Grid2d:
        return "grid2d";
    case Scheme::Poisson:
        return "poisson";
    }
    return "unknown";
}

Scheme parse_scheme(const std::string& name) {
    if (name == "grid1d") {
        return Scheme::Grid1d;
    }
    if (name == "grid2d") {
        return Scheme::Grid2d;
    }
    if (name == "poisson") {
        return Scheme::Poisson;
    }
    throw ValidationError("unknown spatial scheme '" + name + "' (expected grid1d, grid2d or poisson)");
}

double matern(double d, double nu, double phi) {
    if (!(d >= 0.0) || !(phi >= 0.0)) {
        throw ValidationError("matern: distance and range must be nonnegative");
    }
    if (nu != 0.5 && nu != 1.0 && nu != 1.5) {
        throw ValidationError("matern: smoothness must be 0.5, 1 or 1.5");
    }
    if (d == 0.0) {
        return 1.0;
    }
    if (phi == 0.0) {
        return 0.0;
    }
    const double x = d / phi;
    if (x > 700.0) {
        return 0.0;
    }
    if (nu == 0.5) {
        return std::exp(-x);
    }
    if (nu == 1.5) {
        return (1.0 + x) * std::exp(-x);
    }
    // 2^{1-nu} / Gamma(nu) = 1 at nu = 1.
    return x * std::cyl_bessel_k(1.0, x);
}

SpatialDomain sample_domain(Scheme scheme, std::size_t p, std::uint64_t seed) {
    if (p < 1) {
        throw ValidationError("sample_domain: need p >= 1");
    }
    const auto rows = static_cast<Eigen::Index>(p);
    switch (scheme) {
    case Scheme::Grid1d: {
        Matrix coords(rows, 1);
        for (Eigen::Index j = 0; j < rows; ++j) {
            coords(j, 0) = static_cast<double>(j + 1) / static_cast<double>(p);
        }
        return SpatialDomain::with_default_ids(std::move(coords));
    }
    case Scheme::Grid2d: {
        const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(p))));
        if (side * side != p) {
            throw ValidationError("grid2d needs p to be a perfect square");
        }
        Matrix coords(rows, 2);
        Eigen::Index j = 0;
        for (std::size_t a = 1; a <= side; ++a) {
            for (std::size_t b = 1; b <= side; ++b, ++j) {
                coords(j, 0) = static_cast<double>(a) / static_cast<double>(side);
                coords(j, 1) = static_cast<double>(b) / static_cast<double>(side);
            }
        }
        return SpatialDomain::with_default_ids(std::move(coords));
    }
    case Scheme::Poisson: {
        Rng rng = make_stream(seed, {0});
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Matrix coords(rows, 2);
        for (Eigen::Index j = 0; j < rows; ++j) {
            coords(j, 0) = unit(rng);
            coords(j, 1) = unit(rng);
        }
        return SpatialDomain::with_default_ids(std::move(coords));
    }
    }
    throw ValidationError("unknown spatial scheme");
}

Vector fourier_eigenfunction(int r, const TimeGrid& grid) {
    if (r < 1) {
        throw ValidationError("eigenfunction index is 1-based");
    }
    const Vector& t = grid.points();
    const double k = static_cast<double>(r % 2 == 1 ? r : r - 1) * std::numbers::pi;
    if (r % 2 == 1) {
        return std::numbers::sqrt2 * (k * t.array()).cos();
    }
    return std::numbers::sqrt2 * (k * t.array()).sin();
}

double SimulationConfig::omega(int r) { return 4.0 * std::pow(static_cast<double>(r), -1.6); }

void SimulationConfig::validate() const {
    if (n < 8) {
        throw ValidationError("simulation needs n >= 8");
    }
    if (p < 1) {
        throw ValidationError("simulation needs p >= 1");
    }
    if (t < 2) {
        throw ValidationError("simulation needs at least 2 time points");
    }
    if (!(delta >= 0.0) || !(r_s >= 0.0)) {
        throw ValidationError("delta and r_s must be nonnegative");
    }
    if (sigma_omega && !(*sigma_omega > 0.0)) {
        throw ValidationError("sigma_omega must be positive");
    }
    const std::size_t tau = change_index();
    if (tau < 1 || tau >= n) {
        throw ValidationError("tau_star must lie in [1, n-1]");
    }
    if (nu.size() != kComponents || phi.size() != kComponents) {
        throw ValidationError("nu and phi need one entry per component (6)");
    }
}

std::size_t GroundTruth::support_size() const {
    std::size_t count = 0;
    for (bool b : support) {
        count += b ? 1 : 0;
    }
    return count;
}

Matrix draw_scores(const SpatialDomain& domain, double omega, double nu, double phi, std::size_t n,
                   Rng& rng) {
    const auto p = static_cast<Eigen::Index>(domain.size());
    Matrix cov(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        cov(j, j) = omega + 1e-10;
        for (Eigen::Index k = j + 1; k < p; ++k) {
            cov(j, k) = cov(k, j) = omega * matern(domain.distance(static_cast<std::size_t>(j),
                                                                   static_cast<std::size_t>(k)),
                                                   nu, phi);
        }
    }
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericError("covariance: Matern covariance is not positive definite after jitter");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix z(static_cast<Eigen::Index>(n), p);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            z(i, j) = normal(rng);
        }
    }
    return z * llt.matrixL().transpose();
}

SimulatedData simulate_on(const SimulationConfig& config, const SpatialDomain& domain) {
    config.validate();
    if (domain.size() != config.p) {
        throw ValidationError("simulation domain size does not match p");
    }
    const std::size_t n = config.n;
    const auto p = static_cast<Eigen::Index>(config.p);
    const auto grid = TimeGrid::uniform(config.t);
    const auto t = static_cast<Eigen::Index>(config.t);

    RowMatrix basis(SimulationConfig::kComponents, t);
    for (int r = 0; r < SimulationConfig::kComponents; ++r) {
        basis.row(r) = fourier_eigenfunction(r + 1, grid).transpose();
    }

    GroundTruth truth;
    truth.tau_star = config.change_index();
    truth.support.assign(config.p, false);
    truth.mu1 = Vector::Zero(p);
    const Eigen::RowVectorXd center = Eigen::RowVectorXd::Constant(domain.dim(), 0.5);
    const double sigma = config.bump_scale();
    if (config.delta > 0.0) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const double dist = (domain.coords().row(j) - center).norm();
            if (dist <= config.r_s) {
                truth.support[static_cast<std::size_t>(j)] = true;
                truth.mu1(j) = config.delta * std::exp(-dist * dist / (2.0 * sigma * sigma));
            }
        }
    }

    Rng rng = make_stream(config.seed, {1});
    std::vector<Matrix> scores; // per component, n x p
    for (int r = 0; r < SimulationConfig::kComponents; ++r) {
        scores.push_back(draw_scores(domain, SimulationConfig::omega(r + 1),
                                     config.nu[static_cast<std::size_t>(r)],
                                     config.phi[static_cast<std::size_t>(r)], n, rng));
    }

    RowMatrix values(static_cast<Eigen::Index>(n) * p, t);
    Matrix local(p, SimulationConfig::kComponents);
    for (std::size_t i = 0; i < n; ++i) {
        for (int r = 0; r < SimulationConfig::kComponents; ++r) {
            local.col(r) = scores[static_cast<std::size_t>(r)].row(static_cast<Eigen::Index>(i)).transpose();
        }
        auto block = values.middleRows(static_cast<Eigen::Index>(i) * p, p);
        block = local * basis;
        if (i >= truth.tau_star) {
            block.colwise() += truth.mu1;
        }
    }
    return {SpatialFunctionalDataset(std::move(values), n, grid, domain), std::move(truth)};
}

SimulatedData simulate(const SimulationConfig& config) {
    config.validate();
    return simulate_on(config, sample_domain(config.scheme, config.p, config.seed));
}

DiscoveryScore score(const std::vector<std::size_t>& selected, const GroundTruth& truth) {
    std::set<std::size_t> unique;
    for (std::size_t j : selected) {
        if (j >= truth.support.size()) {
            throw ValidationError("selected index out of range");
        }
        unique.insert(j);
    }
    std::size_t true_hits = 0;
    for (std::size_t j : unique) {
        true_hits += truth.support[j] ? 1 : 0;
    }
    const double chosen = static_cast<double>(unique.size());
    DiscoveryScore out;
    out.fdp = static_cast<double>(unique.size() - true_hits) / std::max(chosen, 1.0);
    out.tdp = static_cast<double>(true_hits) / std::max(static_cast<double>(truth.support_size()), 1.0);
    return out;
}

} // namespace spatiofd
