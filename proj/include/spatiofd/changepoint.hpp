#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spatiofd/core.hpp"
#include "spatiofd/fpca.hpp"
#include "spatiofd/kernels.hpp"

namespace spatiofd {

/// Standardized CUSUM projections eta_{tau,r}(s_j) for tau = 1..n-1.
struct CusumTensor {
    RowMatrix eta; // row (tau-1)*components + r, column j
    std::size_t n = 0;
    std::size_t components = 0;
    std::size_t p = 0;

    /// tau is 1-based, r and j are 0-based.
    double operator()(std::size_t tau, std::size_t r, std::size_t j) const {
        return eta(static_cast<Eigen::Index>((tau - 1) * components + r), static_cast<Eigen::Index>(j));
    }
    /// components x p slice at tau (1-based).
    Matrix at(std::size_t tau) const {
        return eta.middleRows(static_cast<Eigen::Index>((tau - 1) * components),
                              static_cast<Eigen::Index>(components));
    }
};

CusumTensor cusum_projections(const SpatialFunctionalDataset& data, const RowMatrix& psi,
                              const Matrix& per_location_var);
CusumTensor cusum_projections(const SpatialFunctionalDataset& data, const FpcaModel& model);

struct QProfile {
    Vector values;          // Q(tau) for tau = 1..n-1
    double bandwidth = 0.0; // 0 for the kernel-free statistic
    std::size_t components = 0;
};

/// Kernel quadratic form per tau; `kernel == nullptr` gives the plain sum of
/// squares (identity kernel).
QProfile q_profile(const CusumTensor& eta, const KernelMatrix* kernel);

struct QStatistics {
    double max = 0.0;
    double sum = 0.0; // divided by n, not n - 1
};

QStatistics q_statistics(const QProfile& profile);

/// 1-based argmax; ties go to the smallest tau.
std::size_t estimate_change_point(const QProfile& profile);

/// Null distribution of the max and sum statistics from correlated Brownian
/// bridges, B~_r = corr_r^{1/2} B*_r on x_k = k/n.
NullSamples simulate_null(const std::vector<Matrix>& corr, const KernelMatrix* kernel,
                          std::size_t n, std::size_t reps, std::uint64_t seed);

/// Same draws shared across several kernels (nullptr = identity).
std::vector<NullSamples> simulate_null_variants(const std::vector<Matrix>& corr,
                                                const std::vector<const KernelMatrix*>& kernels,
                                                std::size_t n, std::size_t reps,
                                                std::uint64_t seed);

/// B~ = root * B* sampled on x_k = k/n, p x (n-1).
Matrix sample_correlated_bridges(const Matrix& root, std::size_t n, Rng& rng);

/// (1 + #{samples >= observed}) / (reps + 1)
double monte_carlo_pvalue(double observed, const Vector& samples);

enum class NullCorrelation { Raw, Smoothed };

struct DetectionConfig {
    double fve_target = 0.90;
    double varrho = 0.05;
    std::size_t mc_reps = 1000;
    std::uint64_t seed = 1;
    bool stat_max = true;
    bool stat_sum = true;
    bool kernel = true;
    NullCorrelation null_correlation = NullCorrelation::Raw;
    int interior_knots = 8;
    std::optional<double> bandwidth;
    std::optional<std::size_t> truncation;

    void validate() const;
    bool wants_pvalues() const { return stat_max || stat_sum; }
};

struct ChangePointResult {
    bool kernel = true;
    double q_max = 0.0;
    double q_sum = 0.0;
    std::optional<double> p_max;
    std::optional<double> p_sum;
    std::size_t tau_hat = 0;
    double bandwidth = 0.0;
    std::size_t truncation = 0;
    std::size_t mc_reps = 0;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    QProfile profile;
};

struct BandwidthChoice {
    double bandwidth = 0.0;
    bool from_curve = false;            // false when supplied or p < 3
    std::optional<CorrelationCurve> curve;
};

/// Fits the pooled correlation curve and applies the varrho rule. For p < 3
/// there is no curve to fit and the largest pairwise distance (or 1 for a
/// single location) is used.
BandwidthChoice choose_bandwidth(const FpcaModel& model, const SpatialDomain& domain, double varrho,
                                 int interior_knots);

struct DetectionSet {
    FpcaModel model;
    BandwidthChoice bandwidth;
    std::optional<ChangePointResult> kernel;
    std::optional<ChangePointResult> plain;
};

/// The full detection pipeline, evaluating the kernel statistic, the plain
/// statistic, or both from one FPCA fit and one set of Monte Carlo draws.
DetectionSet detect_all(const SpatialFunctionalDataset& data, const DetectionConfig& config,
                        bool with_kernel, bool with_plain);

/// Detection for the variant selected by `config.kernel`.
ChangePointResult detect(const SpatialFunctionalDataset& data, const DetectionConfig& config);

} // namespace spatiofd
