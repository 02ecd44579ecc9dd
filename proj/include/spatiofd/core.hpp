#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spatiofd/error.hpp"

namespace spatiofd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Ordered time stamps with composite trapezoid weights.
class TimeGrid {
public:
    explicit TimeGrid(std::vector<double> points);

    /// `count` equally spaced points covering [lo, hi], endpoints included.
    static TimeGrid uniform(std::size_t count, double lo = 0.0, double hi = 1.0);

    std::size_t size() const { return static_cast<std::size_t>(points_.size()); }
    const Vector& points() const { return points_; }
    const Vector& weights() const { return weights_; }
    double span() const { return points_(points_.size() - 1) - points_(0); }

    bool operator==(const TimeGrid& other) const { return points_ == other.points_; }

private:
    Vector points_;
    Vector weights_;
};

/// Planar locations (d = 1 or 2) with stable string identifiers.
class SpatialDomain {
public:
    /// `coords` is p x d.
    SpatialDomain(Matrix coords, std::vector<std::string> ids);

    /// Identifiers "1".."p".
    static SpatialDomain with_default_ids(Matrix coords);

    std::size_t size() const { return static_cast<std::size_t>(coords_.rows()); }
    int dim() const { return static_cast<int>(coords_.cols()); }
    const Matrix& coords() const { return coords_; }
    const std::vector<std::string>& ids() const { return ids_; }

    double distance(std::size_t j, std::size_t k) const;
    Matrix distance_matrix() const;
    double max_distance() const;

    /// Reorders locations; `order[j]` is the old index placed at position j.
    SpatialDomain permuted(std::span<const std::size_t> order) const;

    bool operator==(const SpatialDomain& other) const {
        return coords_ == other.coords_ && ids_ == other.ids_;
    }

private:
    Matrix coords_;
    std::vector<std::string> ids_;
};

/// Replicated curves X_i(s_j; t_m).
///
/// Values live in an (n*p) x T row-major matrix; row i*p + j holds the curve
/// of replicate i at location j, so one replicate is a contiguous p x T block.
class SpatialFunctionalDataset {
public:
    SpatialFunctionalDataset(RowMatrix values, std::size_t replicates, TimeGrid grid,
                             SpatialDomain domain);

    std::size_t n() const { return n_; }
    std::size_t p() const { return domain_.size(); }
    std::size_t t() const { return grid_.size(); }

    const RowMatrix& values() const { return values_; }
    const TimeGrid& grid() const { return grid_; }
    const SpatialDomain& domain() const { return domain_; }

    /// p x T block of replicate i (0-based).
    auto replicate(std::size_t i) const {
        return values_.middleRows(static_cast<Eigen::Index>(i * p()), static_cast<Eigen::Index>(p()));
    }
    std::span<const double> curve(std::size_t i, std::size_t j) const {
        return {values_.data() + (i * p() + j) * t(), t()};
    }

    /// New dataset made of the listed replicates, in the listed order.
    SpatialFunctionalDataset select_replicates(std::span<const std::size_t> indices) const;
    SpatialFunctionalDataset permute_locations(std::span<const std::size_t> order) const;
    SpatialFunctionalDataset scaled(double factor) const;

    bool operator==(const SpatialFunctionalDataset& other) const {
        return n_ == other.n_ && grid_ == other.grid_ && domain_ == other.domain_ &&
               values_ == other.values_;
    }

private:
    RowMatrix values_;
    std::size_t n_;
    TimeGrid grid_;
    SpatialDomain domain_;
};

/// p x p matrix of K_h(s_j - s_k) for the isotropic Gaussian kernel.
struct KernelMatrix {
    Matrix entries;
    double bandwidth = 0.0;
    int dim = 0;
};

/// Trapezoid approximation of the L2 inner product of two sampled curves.
double inner_product(std::span<const double> f, std::span<const double> g, const TimeGrid& grid);

/// (2 pi)^{-d/2} exp(-|s_j - s_k|^2 / (2 h^2)) / h^d
KernelMatrix build_kernel_matrix(const SpatialDomain& domain, double bandwidth);

struct SymmetricEigen {
    Vector values;  // descending
    Matrix vectors; // columns, orthonormal
};

SymmetricEigen sym_eigen(const Matrix& a);

/// Symmetric PSD square root. Eigenvalues down to -1e-8 * lambda_max are
/// clamped to zero; anything more negative is rejected.
Matrix psd_sqrt(const Matrix& a);

} // namespace spatiofd
