#include "spatiofd/fpca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "spatiofd/kernels.hpp"

namespace spatiofd {

MarginalCovariance differenced_marginal_covariance(const SpatialFunctionalDataset& data) {
    if (data.n() < 2) {
        throw ValidationError("insufficient replicates: differencing needs n >= 2");
    }
    Matrix gram = kernels::difference_gram(data);
    const double scale = 1.0 / (2.0 * static_cast<double>(data.p()) * static_cast<double>(data.n() - 1));
    gram *= scale;
    return {0.5 * (gram + gram.transpose()), data.grid()};
}

FpcaBasis fpca_decompose(const MarginalCovariance& h) {
    const auto t = static_cast<Eigen::Index>(h.grid.size());
    if (h.matrix.rows() != t || h.matrix.cols() != t) {
        throw ValidationError("fpca_decompose: covariance size does not match grid");
    }
    const Vector root_w = h.grid.weights().cwiseSqrt();
    Matrix sym = root_w.asDiagonal() * h.matrix * root_w.asDiagonal();
    sym = (0.5 * (sym + sym.transpose())).eval();
    const auto eig = sym_eigen(sym);

    FpcaBasis out;
    out.eigenvalues = eig.values.cwiseMax(0.0);
    out.eigenfunctions.resize(t, t);
    for (Eigen::Index r = 0; r < t; ++r) {
        Vector psi = eig.vectors.col(r).cwiseQuotient(root_w);
        Eigen::Index top = 0;
        psi.cwiseAbs().maxCoeff(&top);
        if (psi(top) < 0.0) {
            psi = -psi;
        }
        out.eigenfunctions.row(r) = psi.transpose();
    }
    return out;
}

std::size_t select_truncation_fve(const Vector& eigenvalues, double fve_target) {
    if (!(fve_target > 0.0 && fve_target <= 1.0)) {
        throw ValidationError("FVE target must lie in (0, 1]");
    }
    const double total = eigenvalues.cwiseMax(0.0).sum();
    std::size_t positive = 0;
    for (Eigen::Index r = 0; r < eigenvalues.size(); ++r) {
        if (eigenvalues(r) > 0.0) {
            ++positive;
        }
    }
    if (!(total > 0.0) || positive == 0) {
        throw ZeroVarianceError("degenerate spectrum, all eigenvalues are zero");
    }
    double cumulative = 0.0;
    for (std::size_t r = 0; r < positive; ++r) {
        cumulative += std::max(eigenvalues(static_cast<Eigen::Index>(r)), 0.0);
        if (cumulative / total >= fve_target) {
            return r + 1;
        }
    }
    return positive;
}

CrossCovariance cross_covariance(const SpatialFunctionalDataset& data, const RowMatrix& psi,
                                 std::size_t components) {
    if (components == 0) {
        throw ValidationError("cross_covariance: need at least one component");
    }
    if (static_cast<std::size_t>(psi.rows()) < components) {
        throw ValidationError("cross_covariance: fewer eigenfunctions than requested components");
    }
    const RowMatrix basis = psi.topRows(static_cast<Eigen::Index>(components));
    const RowMatrix scores = kernels::projected_differences(data, basis);
    const auto p = static_cast<Eigen::Index>(data.p());
    const double scale = 1.0 / (2.0 * static_cast<double>(data.n() - 1));

    CrossCovariance out;
    out.per_location_var.resize(static_cast<Eigen::Index>(components), p);
    for (std::size_t r = 0; r < components; ++r) {
        const auto block = scores.middleCols(static_cast<Eigen::Index>(r) * p, p);
        Matrix sigma = scale * (block.transpose() * block);
        sigma = (0.5 * (sigma + sigma.transpose())).eval();
        const Vector var = sigma.diagonal();
        for (Eigen::Index j = 0; j < p; ++j) {
            if (!(var(j) > 1e-12)) {
                std::ostringstream msg;
                msg << "component " << r + 1 << " has variance " << var(j) << " at location '"
                    << data.domain().ids()[static_cast<std::size_t>(j)] << "' (index " << j + 1
                    << ")";
                throw ZeroVarianceError(msg.str());
            }
        }
        const Vector inv_sd = var.cwiseSqrt().cwiseInverse();
        Matrix corr = inv_sd.asDiagonal() * sigma * inv_sd.asDiagonal();
        corr.diagonal().setOnes();
        out.per_location_var.row(static_cast<Eigen::Index>(r)) = var.transpose();
        out.sigma.push_back(std::move(sigma));
        out.corr.push_back(std::move(corr));
    }
    return out;
}

FpcaModel fit_fpca(const SpatialFunctionalDataset& data, double fve_target,
                   std::optional<std::size_t> fixed_truncation) {
    const auto h = differenced_marginal_covariance(data);
    auto basis = fpca_decompose(h);
    std::size_t r = fixed_truncation ? *fixed_truncation
                                     : select_truncation_fve(basis.eigenvalues, fve_target);
    if (fixed_truncation) {
        if (r == 0 || r > static_cast<std::size_t>(basis.eigenvalues.size())) {
            throw ValidationError("fixed truncation out of range");
        }
        if (!(basis.eigenvalues(0) > 0.0)) {
            throw ZeroVarianceError("degenerate spectrum, all eigenvalues are zero");
        }
    }
    auto cov = cross_covariance(data, basis.eigenfunctions, r);

    FpcaModel model;
    model.eigenvalues = std::move(basis.eigenvalues);
    model.eigenfunctions = basis.eigenfunctions.topRows(static_cast<Eigen::Index>(r));
    model.per_location_var = std::move(cov.per_location_var);
    model.sigma = std::move(cov.sigma);
    model.corr = std::move(cov.corr);
    model.truncation = r;
    return model;
}

CorrelationCurve CorrelationCurve::fit(std::span<const double> distances,
                                       std::span<const double> values, double d_max,
                                       int interior_knots) {
    if (distances.size() != values.size() || distances.empty()) {
        throw ValidationError("correlation fit: need matching, nonempty distance/value lists");
    }
    if (!(d_max > 0.0)) {
        throw ValidationError("correlation fit: all locations coincide (zero maximum distance)");
    }
    CorrelationCurve curve;
    curve.d_max_ = d_max;

    std::vector<std::size_t> order(distances.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });

    // Group equal distances (up to rounding) for the distinct count and the
    // fallback means.
    const double tol = 1e-12 * d_max;
    std::vector<double> group_x;
    std::vector<double> group_sum;
    std::vector<double> group_count;
    for (std::size_t idx : order) {
        const double d = distances[idx];
        if (group_x.empty() || d - group_x.back() > tol) {
            group_x.push_back(d);
            group_sum.push_back(0.0);
            group_count.push_back(0.0);
        }
        group_sum.back() += values[idx];
        group_count.back() += 1.0;
    }

    BSplineBasis basis(0.0, d_max, interior_knots);
    const int nb = basis.size();
    if (static_cast<int>(group_x.size()) < nb) {
        curve.fallback_ = true;
        curve.fallback_x_ = group_x;
        curve.fallback_y_.resize(group_x.size());
        for (std::size_t g = 0; g < group_x.size(); ++g) {
            curve.fallback_y_[g] = group_sum[g] / group_count[g];
        }
        return curve;
    }

    Matrix gram = Matrix::Zero(nb, nb);
    Vector rhs = Vector::Zero(nb);
    std::vector<double> local(static_cast<std::size_t>(basis.degree() + 1));
    for (std::size_t i = 0; i < distances.size(); ++i) {
        const int first = basis.evaluate_nonzero(distances[i], local);
        for (int a = 0; a <= basis.degree(); ++a) {
            rhs(first + a) += local[a] * values[i];
            for (int b = 0; b <= basis.degree(); ++b) {
                gram(first + a, first + b) += local[a] * local[b];
            }
        }
    }
    // A faint second-difference penalty keeps knot intervals without data
    // determined; it vanishes on constant and linear coefficient vectors.
    Matrix diff = Matrix::Zero(nb - 2, nb);
    for (int k = 0; k + 2 < nb; ++k) {
        diff(k, k) = 1.0;
        diff(k, k + 1) = -2.0;
        diff(k, k + 2) = 1.0;
    }
    const double ridge = 1e-10 * gram.trace() / nb;
    gram += ridge * diff.transpose() * diff;
    curve.coef_ = gram.ldlt().solve(rhs);
    if (!curve.coef_.allFinite()) {
        throw NumericError("correlation fit: least-squares solve failed");
    }
    curve.basis_.emplace(std::move(basis));
    return curve;
}

const std::vector<double>& CorrelationCurve::knots() const {
    static const std::vector<double> empty;
    return basis_ ? basis_->knots() : empty;
}

double CorrelationCurve::operator()(double d) const {
    d = std::clamp(d, 0.0, d_max_);
    if (fallback_) {
        if (d <= fallback_x_.front()) {
            return fallback_y_.front();
        }
        if (d >= fallback_x_.back()) {
            return fallback_y_.back();
        }
        auto it = std::upper_bound(fallback_x_.begin(), fallback_x_.end(), d);
        const auto hi = static_cast<std::size_t>(it - fallback_x_.begin());
        const auto lo = hi - 1;
        const double frac = (d - fallback_x_[lo]) / (fallback_x_[hi] - fallback_x_[lo]);
        return fallback_y_[lo] + frac * (fallback_y_[hi] - fallback_y_[lo]);
    }
    std::vector<double> local(static_cast<std::size_t>(basis_->degree() + 1));
    const int first = basis_->evaluate_nonzero(d, local);
    double acc = 0.0;
    for (int a = 0; a <= basis_->degree(); ++a) {
        acc += local[a] * coef_(first + a);
    }
    return acc;
}

CorrelationCurve fit_correlation_curve(std::span<const Matrix> corr, const SpatialDomain& domain,
                                       int interior_knots) {
    const std::size_t p = domain.size();
    if (p < 3) {
        throw ValidationError("correlation fit needs at least 3 locations");
    }
    if (corr.empty()) {
        throw ValidationError("correlation fit needs at least one correlation matrix");
    }
    Matrix pooled = Matrix::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (const auto& c : corr) {
        if (static_cast<std::size_t>(c.rows()) != p || static_cast<std::size_t>(c.cols()) != p) {
            throw ValidationError("correlation matrix size does not match domain");
        }
        pooled += c;
    }
    pooled /= static_cast<double>(corr.size());

    std::vector<double> dist;
    std::vector<double> vals;
    dist.reserve(p * (p - 1) / 2);
    vals.reserve(p * (p - 1) / 2);
    double d_max = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t k = j + 1; k < p; ++k) {
            const double d = domain.distance(j, k);
            dist.push_back(d);
            vals.push_back(pooled(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
            d_max = std::max(d_max, d);
        }
    }
    return CorrelationCurve::fit(dist, vals, d_max, interior_knots);
}

double select_bandwidth(const std::function<double(double)>& curve, double d_max, double varrho) {
    if (!(varrho > 0.0 && varrho < 1.0)) {
        throw ValidationError("varrho must lie in (0, 1)");
    }
    constexpr int kSteps = 1000;
    for (int k = 1; k <= kSteps; ++k) {
        const double d = d_max * k / kSteps;
        if (curve(d) < varrho) {
            return d;
        }
    }
    return d_max;
}

double select_bandwidth(const CorrelationCurve& curve, double varrho) {
    return select_bandwidth([&curve](double d) { return curve(d); }, curve.d_max(), varrho);
}

} // namespace spatiofd
