#include "spatiofd/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

namespace spatiofd {

SplitPair split_dataset(const SpatialFunctionalDataset& data) {
    if (data.n() < 8) {
        throw ValidationError("insufficient replicates: sample splitting needs n >= 8");
    }
    const std::size_t m = data.n() / 2;
    std::vector<std::size_t> odd(m);
    std::vector<std::size_t> even(m);
    for (std::size_t i = 0; i < m; ++i) {
        odd[i] = 2 * i;      // 1-based 2i+1
        even[i] = 2 * i + 1; // 1-based 2i+2
    }
    SplitPair out{data.select_replicates(odd), data.select_replicates(even), m, {}, {}};
    for (std::size_t i = 0; i < m; ++i) {
        out.odd_index.push_back(odd[i] + 1);
        out.even_index.push_back(even[i] + 1);
    }
    return out;
}

Matrix kernel_smooth(const Matrix& eta, const KernelMatrix& kernel) {
    if (kernel.entries.rows() != eta.cols()) {
        throw ValidationError("kernel_smooth: kernel dimension does not match location count");
    }
    const Vector mass = kernel.entries.rowwise().sum();
    // K is symmetric, so column k of K holds K_h(s_k - s_j) over j.
    Matrix out = eta * kernel.entries;
    return out * mass.cwiseInverse().asDiagonal();
}

Vector ranking_statistics(const Matrix& eta_odd, const Matrix& eta_even) {
    if (eta_odd.rows() != eta_even.rows() || eta_odd.cols() != eta_even.cols()) {
        throw ValidationError("ranking_statistics: shape mismatch");
    }
    return eta_odd.cwiseProduct(eta_even).colwise().sum().transpose();
}

SdaThreshold sda_threshold(const Vector& w, double alpha) {
    std::vector<double> candidates;
    candidates.reserve(static_cast<std::size_t>(w.size()));
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        const double a = std::abs(w(j));
        if (a > 0.0) {
            candidates.push_back(a);
        }
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    SdaThreshold out;
    for (double t : candidates) {
        const auto negatives = (w.array() <= -t).count();
        const auto positives = (w.array() >= t).count();
        const double ratio = (1.0 + static_cast<double>(negatives)) /
                             static_cast<double>(std::max<Eigen::Index>(positives, 1));
        if (ratio <= alpha) {
            out.threshold = t;
            break;
        }
    }
    if (std::isfinite(out.threshold)) {
        for (Eigen::Index j = 0; j < w.size(); ++j) {
            if (w(j) >= out.threshold) {
                out.selected.push_back(static_cast<std::size_t>(j));
            }
        }
    }
    return out;
}

std::vector<std::size_t> benjamini_hochberg(const Vector& pvalues, double alpha) {
    const auto p = static_cast<std::size_t>(pvalues.size());
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return pvalues(static_cast<Eigen::Index>(a)) < pvalues(static_cast<Eigen::Index>(b));
    });
    std::size_t cutoff = 0;
    for (std::size_t k = 1; k <= p; ++k) {
        if (pvalues(static_cast<Eigen::Index>(order[k - 1])) <=
            static_cast<double>(k) * alpha / static_cast<double>(p)) {
            cutoff = k;
        }
    }
    std::vector<std::size_t> rejected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cutoff));
    std::sort(rejected.begin(), rejected.end());
    return rejected;
}

std::string to_string(RecoveryMethod method) {
    switch (method) {
    case RecoveryMethod::Fsda:
        return "fsda";
    case RecoveryMethod::Fsda0:
        return "fsda0";
    case RecoveryMethod::BH:
        return "bh";
    }
    return "unknown";
}

RecoveryMethod parse_recovery_method(const std::string& name) {
    if (name == "fsda") {
        return RecoveryMethod::Fsda;
    }
    if (name == "fsda0") {
        return RecoveryMethod::Fsda0;
    }
    if (name == "bh") {
        return RecoveryMethod::BH;
    }
    throw ValidationError("unknown recovery method '" + name + "' (expected fsda, fsda0 or bh)");
}

void RecoveryConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw ValidationError("alpha must lie in (0, 1)");
    }
    if (!(fve_target > 0.0 && fve_target <= 1.0)) {
        throw ValidationError("fve_target must lie in (0, 1]");
    }
    if (!(varrho > 0.0 && varrho < 1.0)) {
        throw ValidationError("varrho must lie in (0, 1)");
    }
    if (bandwidth && !(*bandwidth > 0.0)) {
        throw ValidationError("bandwidth must be positive");
    }
}

namespace {

void check_tau(const SpatialFunctionalDataset& data, std::size_t tau_hat) {
    if (tau_hat < 1 || tau_hat >= data.n()) {
        throw ValidationError("change point must lie in [1, n-1]");
    }
}

Matrix cusum_at(const SpatialFunctionalDataset& data, const RowMatrix& psi, const Matrix& var,
                std::size_t tau) {
    return cusum_projections(data, psi, var).at(tau);
}

} // namespace

RecoveryResult fsda(const SpatialFunctionalDataset& data, std::size_t tau_hat,
                    const RecoveryConfig& config) {
    config.validate();
    check_tau(data, tau_hat);
    if (config.method == RecoveryMethod::BH) {
        throw ValidationError("fsda called with method bh");
    }
    const bool smooth = config.method == RecoveryMethod::Fsda;
    const auto split = split_dataset(data);

    std::optional<FpcaModel> full;
    auto full_model = [&]() -> const FpcaModel& {
        if (!full) {
            full = fit_fpca(data, config.fve_target);
        }
        return *full;
    };

    RecoveryResult out;
    out.method = config.method;
    out.alpha = config.alpha;
    out.tau_hat = tau_hat;

    if (smooth) {
        out.bandwidth = config.bandwidth
                            ? *config.bandwidth
                            : choose_bandwidth(full_model(), data.domain(), config.varrho,
                                               config.interior_knots)
                                  .bandwidth;
    }

    std::optional<std::size_t> shared;
    if (config.shared_truncation) {
        shared = full_model().truncation;
    }
    const auto odd = fit_fpca(split.odd, config.fve_target, shared);
    const auto even = fit_fpca(split.even, config.fve_target, shared);
    const std::size_t rcount = std::min(odd.truncation, even.truncation);
    const auto rows = static_cast<Eigen::Index>(rcount);

    RowMatrix psi_odd = odd.eigenfunctions.topRows(rows);
    RowMatrix psi_even = even.eigenfunctions.topRows(rows);
    // Each half fixes its own eigenfunction signs; line the even half up
    // with the odd half so the products in W_j compare like with like.
    const Vector& w = data.grid().weights();
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double agreement = (psi_odd.row(r).transpose().cwiseProduct(w)).dot(psi_even.row(r).transpose());
        if (agreement < 0.0) {
            psi_even.row(r) *= -1.0;
        }
    }

    const std::size_t tau_split =
        std::clamp<std::size_t>((tau_hat + 1) / 2, 1, split.m - 1);
    const Matrix eta_odd = cusum_at(split.odd, psi_odd, odd.per_location_var.topRows(rows), tau_split);
    Matrix eta_even = cusum_at(split.even, psi_even, even.per_location_var.topRows(rows), tau_split);
    if (smooth) {
        eta_even = kernel_smooth(eta_even, build_kernel_matrix(data.domain(), out.bandwidth));
    }

    out.w = ranking_statistics(eta_odd, eta_even);
    const auto thr = sda_threshold(out.w, config.alpha);
    out.threshold = thr.threshold;
    out.selected = thr.selected;
    out.tau_split = tau_split;
    out.truncation = rcount;
    return out;
}

RecoveryResult bh_baseline(const SpatialFunctionalDataset& data, std::size_t tau_hat,
                           const RecoveryConfig& config) {
    config.validate();
    check_tau(data, tau_hat);
    const auto model = fit_fpca(data, config.fve_target);
    const Matrix eta = cusum_projections(data, model).at(tau_hat);
    const double theta = static_cast<double>(tau_hat) / static_cast<double>(data.n());
    const double variance = theta * (1.0 - theta);
    if (!(variance > 0.0)) {
        throw NumericError("degenerate null variance for the BH statistic");
    }

    RecoveryResult out;
    out.method = RecoveryMethod::BH;
    out.alpha = config.alpha;
    out.tau_hat = tau_hat;
    out.tau_split = tau_hat;
    out.truncation = model.truncation;
    out.w = eta.colwise().squaredNorm().transpose() / variance;
    out.pvalues.resize(out.w.size());
    const double dof = static_cast<double>(model.truncation);
    for (Eigen::Index j = 0; j < out.w.size(); ++j) {
        out.pvalues(j) = boost::math::gamma_q(0.5 * dof, 0.5 * out.w(j));
    }
    out.selected = benjamini_hochberg(out.pvalues, config.alpha);
    for (std::size_t j : out.selected) {
        out.threshold = std::min(out.threshold, out.w(static_cast<Eigen::Index>(j)));
    }
    return out;
}

RecoveryResult recover(const SpatialFunctionalDataset& data, std::size_t tau_hat,
                       const RecoveryConfig& config) {
    if (config.method == RecoveryMethod::BH) {
        return bh_baseline(data, tau_hat, config);
    }
    return fsda(data, tau_hat, config);
}

} // namespace spatiofd
