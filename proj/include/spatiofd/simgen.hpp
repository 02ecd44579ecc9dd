#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spatiofd/core.hpp"
#include "spatiofd/parallel.hpp"

namespace spatiofd {

enum class Scheme { Grid1d, Grid2d, Poisson };

std::string to_string(Scheme scheme);
Scheme parse_scheme(const std::string& name);

/// Matern correlation M(d; nu, phi) for nu in {0.5, 1, 1.5}; phi = 0 means
/// no correlation beyond zero lag.
double matern(double d, double nu, double phi);

/// grid1d: {1/p, ..., 1}; grid2d: {1/sqrt(p), ..., 1}^2; poisson: p uniform
/// points on the unit square.
SpatialDomain sample_domain(Scheme scheme, std::size_t p, std::uint64_t seed);

/// r-th (1-based) Fourier eigenfunction: sqrt(2) cos(r pi t) for odd r,
/// sqrt(2) sin((r-1) pi t) for even r.
Vector fourier_eigenfunction(int r, const TimeGrid& grid);

struct SimulationConfig {
    std::size_t n = 100;
    std::size_t p = 100;
    Scheme scheme = Scheme::Poisson;
    std::vector<double> nu{1.0, 0.5, 0.5, 0.5, 0.5, 0.5};
    std::vector<double> phi{0.1, 0.05, 0.075, 0.02, 0.0, 0.0};
    double delta = 0.0;
    double r_s = 0.4;
    std::optional<double> sigma_omega; // Gaussian bump scale, default r_s / 2
    std::optional<std::size_t> tau_star; // default n / 2
    std::size_t t = 100;
    std::uint64_t seed = 1;

    static constexpr int kComponents = 6;

    /// 4 r^{-1.6}, r 1-based.
    static double omega(int r);
    std::size_t change_index() const { return tau_star.value_or(n / 2); }
    double bump_scale() const { return sigma_omega.value_or(0.5 * r_s); }
    void validate() const;
};

struct GroundTruth {
    std::size_t tau_star = 0;
    std::vector<bool> support; // theta_j
    Vector mu1;                // post-change mean at each location (constant in t)
    std::size_t support_size() const;
};

struct SimulatedData {
    SpatialFunctionalDataset data;
    GroundTruth truth;
};

SimulatedData simulate(const SimulationConfig& config);

/// Same as simulate() but on a caller-supplied domain.
SimulatedData simulate_on(const SimulationConfig& config, const SpatialDomain& domain);

/// Mean-zero Gaussian scores, n x p, covariance omega * M(|s_j - s_k|; nu, phi).
Matrix draw_scores(const SpatialDomain& domain, double omega, double nu, double phi, std::size_t n,
                   Rng& rng);

struct DiscoveryScore {
    double fdp = 0.0;
    double tdp = 0.0;
};

/// `selected` holds 0-based location indices.
DiscoveryScore score(const std::vector<std::size_t>& selected, const GroundTruth& truth);

} // namespace spatiofd
