#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "spatiofd/bspline.hpp"
#include "spatiofd/core.hpp"

namespace spatiofd {

/// Location-averaged temporal covariance estimated from lag-one replicate
/// differences, so a single mean break only touches one term.
struct MarginalCovariance {
    Matrix matrix; // T x T
    TimeGrid grid;
};

MarginalCovariance differenced_marginal_covariance(const SpatialFunctionalDataset& data);

struct FpcaBasis {
    Vector eigenvalues;        // descending, clamped at 0
    RowMatrix eigenfunctions;  // one curve per row, unit L2 norm under the grid quadrature
};

/// Eigenpairs of the integral operator with kernel H, via W^{1/2} H W^{1/2}.
/// Each eigenfunction is signed so that its largest-magnitude entry is positive.
FpcaBasis fpca_decompose(const MarginalCovariance& h);

/// Smallest R whose cumulative eigenvalue share reaches `fve_target`.
std::size_t select_truncation_fve(const Vector& eigenvalues, double fve_target);

struct CrossCovariance {
    std::vector<Matrix> sigma;  // R matrices, p x p
    Matrix per_location_var;    // R x p, equals the diagonals of sigma
    std::vector<Matrix> corr;   // R matrices with unit diagonal
};

/// Spatial cross-covariance of the projected differences for the first
/// `components` rows of `psi`. Throws ZeroVarianceError naming (r, j) when a
/// location has no variance along a component.
CrossCovariance cross_covariance(const SpatialFunctionalDataset& data, const RowMatrix& psi,
                                 std::size_t components);

struct FpcaModel {
    Vector eigenvalues;         // full spectrum
    RowMatrix eigenfunctions;   // first `truncation` curves
    Matrix per_location_var;    // R x p
    std::vector<Matrix> sigma;
    std::vector<Matrix> corr;
    std::size_t truncation = 0;
};

/// Differenced covariance, eigen decomposition, FVE truncation and the
/// per-component spatial covariances. `fixed_truncation` bypasses the FVE rule.
FpcaModel fit_fpca(const SpatialFunctionalDataset& data, double fve_target,
                   std::optional<std::size_t> fixed_truncation = std::nullopt);

/// Univariate correlation-versus-distance curve on [0, d_max].
class CorrelationCurve {
public:
    /// Least-squares cubic B-spline fit of (distance, value) pairs. With fewer
    /// distinct distances than basis functions, falls back to linear
    /// interpolation of per-distance means and sets `fallback()`.
    static CorrelationCurve fit(std::span<const double> distances, std::span<const double> values,
                                double d_max, int interior_knots = 8);

    double operator()(double d) const;
    double d_max() const { return d_max_; }
    bool fallback() const { return fallback_; }
    const Vector& coefficients() const { return coef_; }
    const std::vector<double>& knots() const;

private:
    CorrelationCurve() = default;

    std::optional<BSplineBasis> basis_;
    Vector coef_;
    std::vector<double> fallback_x_;
    std::vector<double> fallback_y_;
    double d_max_ = 0.0;
    bool fallback_ = false;
};

/// Pools every off-diagonal pair (|s_j - s_k|, mean_r corr_r(j, k)) and fits
/// a CorrelationCurve. Needs p >= 3.
CorrelationCurve fit_correlation_curve(std::span<const Matrix> corr, const SpatialDomain& domain,
                                       int interior_knots = 8);

/// inf{d > 0 : curve(d) < varrho} on a 1000-point grid over (0, d_max];
/// d_max when the curve never drops below varrho.
double select_bandwidth(const CorrelationCurve& curve, double varrho);
double select_bandwidth(const std::function<double(double)>& curve, double d_max, double varrho);

} // namespace spatiofd
