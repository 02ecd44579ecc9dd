#include "spatiofd/changepoint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spatiofd {

CusumTensor cusum_projections(const SpatialFunctionalDataset& data, const RowMatrix& psi,
                              const Matrix& per_location_var) {
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    const auto rcount = static_cast<std::size_t>(psi.rows());
    if (rcount == 0) {
        throw ValidationError("cusum_projections: need at least one eigenfunction");
    }
    if (static_cast<std::size_t>(per_location_var.rows()) != rcount ||
        static_cast<std::size_t>(per_location_var.cols()) != p) {
        throw ValidationError("cusum_projections: variance table must be R x p");
    }
    for (Eigen::Index r = 0; r < per_location_var.rows(); ++r) {
        for (Eigen::Index j = 0; j < per_location_var.cols(); ++j) {
            if (!(per_location_var(r, j) > 1e-12)) {
                std::ostringstream msg;
                msg << "component " << r + 1 << " has no variance at location index " << j + 1;
                throw ZeroVarianceError(msg.str());
            }
        }
    }

    const RowMatrix scores = kernels::project_replicates(data, psi); // n x (R*p)
    Eigen::Matrix<double, 1, Eigen::Dynamic> inv_sd(static_cast<Eigen::Index>(rcount * p));
    for (std::size_t r = 0; r < rcount; ++r) {
        for (std::size_t j = 0; j < p; ++j) {
            inv_sd(static_cast<Eigen::Index>(r * p + j)) =
                1.0 / std::sqrt(per_location_var(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)));
        }
    }

    const Eigen::Matrix<double, 1, Eigen::Dynamic> total = scores.colwise().sum();
    const double root_n = std::sqrt(static_cast<double>(n));
    CusumTensor out;
    out.n = n;
    out.components = rcount;
    out.p = p;
    out.eta.resize(static_cast<Eigen::Index>((n - 1) * rcount), static_cast<Eigen::Index>(p));
    Eigen::Matrix<double, 1, Eigen::Dynamic> partial =
        Eigen::Matrix<double, 1, Eigen::Dynamic>::Zero(scores.cols());
    for (std::size_t tau = 1; tau < n; ++tau) {
        partial += scores.row(static_cast<Eigen::Index>(tau - 1));
        const double share = static_cast<double>(tau) / static_cast<double>(n);
        const auto scaled = ((partial - share * total) / root_n).cwiseProduct(inv_sd);
        for (std::size_t r = 0; r < rcount; ++r) {
            out.eta.row(static_cast<Eigen::Index>((tau - 1) * rcount + r)) =
                scaled.segment(static_cast<Eigen::Index>(r * p), static_cast<Eigen::Index>(p));
        }
    }
    return out;
}

CusumTensor cusum_projections(const SpatialFunctionalDataset& data, const FpcaModel& model) {
    return cusum_projections(data, model.eigenfunctions, model.per_location_var);
}

QProfile q_profile(const CusumTensor& eta, const KernelMatrix* kernel) {
    if (kernel != nullptr && static_cast<std::size_t>(kernel->entries.rows()) != eta.p) {
        throw ValidationError("q_profile: kernel dimension does not match location count");
    }
    QProfile out;
    out.values = kernels::quadratic_profile(eta.eta, eta.components,
                                            kernel != nullptr ? &kernel->entries : nullptr);
    out.bandwidth = kernel != nullptr ? kernel->bandwidth : 0.0;
    out.components = eta.components;
    return out;
}

QStatistics q_statistics(const QProfile& profile) {
    if (profile.values.size() == 0) {
        throw ValidationError("q_statistics: empty profile");
    }
    const double n = static_cast<double>(profile.values.size() + 1);
    return {profile.values.maxCoeff(), profile.values.sum() / n};
}

std::size_t estimate_change_point(const QProfile& profile) {
    if (profile.values.size() == 0) {
        throw ValidationError("estimate_change_point: empty profile");
    }
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < profile.values.size(); ++k) {
        if (profile.values(k) > profile.values(best)) {
            best = k;
        }
    }
    return static_cast<std::size_t>(best) + 1;
}

namespace {

void check_correlation(const Matrix& c, std::size_t p) {
    if (static_cast<std::size_t>(c.rows()) != p || static_cast<std::size_t>(c.cols()) != p) {
        throw ValidationError("correlation matrices must all be p x p");
    }
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
        if (std::abs(c(j, j) - 1.0) > 1e-8) {
            throw ValidationError("correlation matrix must have unit diagonal");
        }
    }
}

} // namespace

std::vector<NullSamples> simulate_null_variants(const std::vector<Matrix>& corr,
                                                const std::vector<const KernelMatrix*>& kernels,
                                                std::size_t n, std::size_t reps,
                                                std::uint64_t seed) {
    if (reps < 100) {
        throw ValidationError("simulate_null: need at least 100 Monte Carlo replicates");
    }
    if (n < 2) {
        throw ValidationError("simulate_null: need n >= 2");
    }
    if (corr.empty() || kernels.empty()) {
        throw ValidationError("simulate_null: need correlation matrices and at least one kernel");
    }
    const auto p = static_cast<std::size_t>(corr.front().rows());
    std::vector<Matrix> roots;
    roots.reserve(corr.size());
    for (const auto& c : corr) {
        check_correlation(c, p);
        roots.push_back(psd_sqrt(c));
    }
    std::vector<std::vector<Matrix>> forms(kernels.size());
    for (std::size_t v = 0; v < kernels.size(); ++v) {
        const KernelMatrix* k = kernels[v];
        if (k != nullptr && static_cast<std::size_t>(k->entries.rows()) != p) {
            throw ValidationError("simulate_null: kernel dimension does not match correlation size");
        }
        for (const auto& root : roots) {
            Matrix form = k != nullptr ? Matrix(root * k->entries * root) : Matrix(root * root);
            forms[v].push_back(0.5 * (form + form.transpose()));
        }
    }
    return kernels::simulate_bridge_functionals(forms, n, reps, seed);
}

NullSamples simulate_null(const std::vector<Matrix>& corr, const KernelMatrix* kernel,
                          std::size_t n, std::size_t reps, std::uint64_t seed) {
    return simulate_null_variants(corr, {kernel}, n, reps, seed).front();
}

Matrix sample_correlated_bridges(const Matrix& root, std::size_t n, Rng& rng) {
    return root * draw_standard_bridges(rng, static_cast<std::size_t>(root.rows()), n);
}

double monte_carlo_pvalue(double observed, const Vector& samples) {
    const auto exceed = (samples.array() >= observed).count();
    return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(samples.size()) + 1.0);
}

void DetectionConfig::validate() const {
    if (!(fve_target > 0.0 && fve_target <= 1.0)) {
        throw ValidationError("fve_target must lie in (0, 1]");
    }
    if (!(varrho > 0.0 && varrho < 1.0)) {
        throw ValidationError("varrho must lie in (0, 1)");
    }
    if (wants_pvalues() && mc_reps < 100) {
        throw ValidationError("mc_reps must be at least 100");
    }
    if (interior_knots < 1) {
        throw ValidationError("interior_knots must be positive");
    }
    if (bandwidth && !(*bandwidth > 0.0)) {
        throw ValidationError("bandwidth must be positive");
    }
}

BandwidthChoice choose_bandwidth(const FpcaModel& model, const SpatialDomain& domain, double varrho,
                                 int interior_knots) {
    BandwidthChoice out;
    if (domain.size() < 3) {
        const double d = domain.max_distance();
        out.bandwidth = d > 0.0 ? d : 1.0;
        return out;
    }
    out.curve = fit_correlation_curve(model.corr, domain, interior_knots);
    out.bandwidth = select_bandwidth(*out.curve, varrho);
    out.from_curve = true;
    return out;
}

namespace {

// Stationary fit per component plugged back in at the observed distances,
// then projected to the nearest PSD matrix with unit diagonal.
std::vector<Matrix> smoothed_correlations(const FpcaModel& model, const SpatialDomain& domain,
                                          int interior_knots) {
    std::vector<Matrix> out;
    const auto p = static_cast<Eigen::Index>(domain.size());
    const Matrix dist = domain.distance_matrix();
    for (const auto& raw : model.corr) {
        const auto curve = fit_correlation_curve(std::span<const Matrix>(&raw, 1), domain, interior_knots);
        Matrix c(p, p);
        for (Eigen::Index j = 0; j < p; ++j) {
            c(j, j) = 1.0;
            for (Eigen::Index k = j + 1; k < p; ++k) {
                c(j, k) = c(k, j) = curve(dist(j, k));
            }
        }
        const auto eig = sym_eigen(c);
        Matrix proj = eig.vectors * eig.values.cwiseMax(0.0).asDiagonal() * eig.vectors.transpose();
        const Vector inv_sd = proj.diagonal().cwiseMax(1e-12).cwiseSqrt().cwiseInverse();
        proj = inv_sd.asDiagonal() * proj * inv_sd.asDiagonal();
        proj = (0.5 * (proj + proj.transpose())).eval();
        proj.diagonal().setOnes();
        out.push_back(std::move(proj));
    }
    return out;
}

ChangePointResult make_result(bool kernel, const QProfile& profile, const FpcaModel& model,
                              const DetectionConfig& config, std::size_t n) {
    ChangePointResult res;
    res.kernel = kernel;
    const auto stats = q_statistics(profile);
    res.q_max = stats.max;
    res.q_sum = stats.sum;
    res.tau_hat = estimate_change_point(profile);
    res.bandwidth = profile.bandwidth;
    res.truncation = model.truncation;
    res.mc_reps = config.wants_pvalues() ? config.mc_reps : 0;
    res.seed = config.seed;
    res.n = n;
    res.profile = profile;
    return res;
}

} // namespace

DetectionSet detect_all(const SpatialFunctionalDataset& data, const DetectionConfig& config,
                        bool with_kernel, bool with_plain) {
    config.validate();
    if (data.n() < 4) {
        throw ValidationError("insufficient replicates: detection needs n >= 4");
    }
    if (!with_kernel && !with_plain) {
        throw ValidationError("detect_all: no statistic requested");
    }

    DetectionSet out;
    out.model = fit_fpca(data, config.fve_target, config.truncation);
    if (config.bandwidth) {
        out.bandwidth.bandwidth = *config.bandwidth;
    } else if (with_kernel) {
        out.bandwidth = choose_bandwidth(out.model, data.domain(), config.varrho, config.interior_knots);
    }

    std::optional<KernelMatrix> kernel;
    if (with_kernel) {
        kernel = build_kernel_matrix(data.domain(), out.bandwidth.bandwidth);
    }
    const auto eta = cusum_projections(data, out.model);
    if (with_kernel) {
        out.kernel = make_result(true, q_profile(eta, &*kernel), out.model, config, data.n());
    }
    if (with_plain) {
        out.plain = make_result(false, q_profile(eta, nullptr), out.model, config, data.n());
    }

    if (config.wants_pvalues()) {
        const std::vector<Matrix> corr = config.null_correlation == NullCorrelation::Raw
                                             ? out.model.corr
                                             : smoothed_correlations(out.model, data.domain(),
                                                                     config.interior_knots);
        std::vector<const KernelMatrix*> kernels;
        std::vector<ChangePointResult*> targets;
        if (with_kernel) {
            kernels.push_back(&*kernel);
            targets.push_back(&*out.kernel);
        }
        if (with_plain) {
            kernels.push_back(nullptr);
            targets.push_back(&*out.plain);
        }
        const auto null = simulate_null_variants(corr, kernels, data.n(), config.mc_reps, config.seed);
        for (std::size_t v = 0; v < targets.size(); ++v) {
            if (config.stat_max) {
                targets[v]->p_max = monte_carlo_pvalue(targets[v]->q_max, null[v].sup);
            }
            if (config.stat_sum) {
                targets[v]->p_sum = monte_carlo_pvalue(targets[v]->q_sum, null[v].average);
            }
        }
    }
    return out;
}

ChangePointResult detect(const SpatialFunctionalDataset& data, const DetectionConfig& config) {
    auto set = detect_all(data, config, config.kernel, !config.kernel);
    return config.kernel ? *set.kernel : *set.plain;
}

} // namespace spatiofd
