#include "spatiofd/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace spatiofd {

TimeGrid::TimeGrid(std::vector<double> points) {
    if (points.size() < 2) {
        throw ValidationError("time grid needs at least 2 points");
    }
    for (std::size_t m = 0; m < points.size(); ++m) {
        if (!std::isfinite(points[m])) {
            throw ValidationError("time grid contains a non-finite point");
        }
        if (m > 0 && !(points[m] > points[m - 1])) {
            throw ValidationError("time grid must be strictly increasing");
        }
    }
    const auto count = static_cast<Eigen::Index>(points.size());
    points_ = Eigen::Map<const Vector>(points.data(), count);
    weights_ = Vector::Zero(count);
    for (Eigen::Index m = 0; m + 1 < count; ++m) {
        const double half = 0.5 * (points_(m + 1) - points_(m));
        weights_(m) += half;
        weights_(m + 1) += half;
    }
}

TimeGrid TimeGrid::uniform(std::size_t count, double lo, double hi) {
    if (count < 2) {
        throw ValidationError("time grid needs at least 2 points");
    }
    if (!(hi > lo)) {
        throw ValidationError("time grid requires hi > lo");
    }
    std::vector<double> points(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t m = 0; m < count; ++m) {
        points[m] = lo + step * static_cast<double>(m);
    }
    points.back() = hi;
    return TimeGrid(std::move(points));
}

SpatialDomain::SpatialDomain(Matrix coords, std::vector<std::string> ids)
    : coords_(std::move(coords)), ids_(std::move(ids)) {
    if (coords_.rows() < 1) {
        throw ValidationError("spatial domain needs at least one location");
    }
    if (coords_.cols() != 1 && coords_.cols() != 2) {
        throw ValidationError("spatial dimension must be 1 or 2");
    }
    if (static_cast<Eigen::Index>(ids_.size()) != coords_.rows()) {
        throw ValidationError("spatial domain: id count does not match coordinate count");
    }
    if (!coords_.allFinite()) {
        throw ValidationError("spatial domain contains non-finite coordinates");
    }
    std::set<std::string> seen;
    for (const auto& id : ids_) {
        if (!seen.insert(id).second) {
            throw ValidationError("duplicate location id '" + id + "'");
        }
    }
}

SpatialDomain SpatialDomain::with_default_ids(Matrix coords) {
    std::vector<std::string> ids(static_cast<std::size_t>(coords.rows()));
    for (std::size_t j = 0; j < ids.size(); ++j) {
        ids[j] = std::to_string(j + 1);
    }
    return SpatialDomain(std::move(coords), std::move(ids));
}

double SpatialDomain::distance(std::size_t j, std::size_t k) const {
    return (coords_.row(static_cast<Eigen::Index>(j)) - coords_.row(static_cast<Eigen::Index>(k))).norm();
}

Matrix SpatialDomain::distance_matrix() const {
    const auto p = coords_.rows();
    Matrix d(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        d(j, j) = 0.0;
        for (Eigen::Index k = j + 1; k < p; ++k) {
            d(j, k) = d(k, j) = (coords_.row(j) - coords_.row(k)).norm();
        }
    }
    return d;
}

double SpatialDomain::max_distance() const {
    double best = 0.0;
    const auto p = coords_.rows();
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index k = j + 1; k < p; ++k) {
            best = std::max(best, (coords_.row(j) - coords_.row(k)).norm());
        }
    }
    return best;
}

SpatialDomain SpatialDomain::permuted(std::span<const std::size_t> order) const {
    if (order.size() != size()) {
        throw ValidationError("permutation length does not match domain size");
    }
    Matrix coords(coords_.rows(), coords_.cols());
    std::vector<std::string> ids(order.size());
    for (std::size_t j = 0; j < order.size(); ++j) {
        coords.row(static_cast<Eigen::Index>(j)) = coords_.row(static_cast<Eigen::Index>(order[j]));
        ids[j] = ids_.at(order[j]);
    }
    return SpatialDomain(std::move(coords), std::move(ids));
}

SpatialFunctionalDataset::SpatialFunctionalDataset(RowMatrix values, std::size_t replicates,
                                                   TimeGrid grid, SpatialDomain domain)
    : values_(std::move(values)), n_(replicates), grid_(std::move(grid)), domain_(std::move(domain)) {
    if (n_ < 2) {
        throw ValidationError("dataset needs at least 2 replicates");
    }
    if (static_cast<std::size_t>(values_.rows()) != n_ * domain_.size()) {
        throw ValidationError("dataset rows must equal replicates x locations");
    }
    if (static_cast<std::size_t>(values_.cols()) != grid_.size()) {
        throw ValidationError("dataset columns must equal the time-grid length");
    }
    if (!values_.allFinite()) {
        throw ValidationError("dataset contains non-finite values");
    }
}

SpatialFunctionalDataset SpatialFunctionalDataset::select_replicates(
    std::span<const std::size_t> indices) const {
    const auto rows = static_cast<Eigen::Index>(p());
    RowMatrix out(static_cast<Eigen::Index>(indices.size()) * rows, values_.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] >= n_) {
            throw ValidationError("replicate index out of range");
        }
        out.middleRows(static_cast<Eigen::Index>(i) * rows, rows) = replicate(indices[i]);
    }
    return SpatialFunctionalDataset(std::move(out), indices.size(), grid_, domain_);
}

SpatialFunctionalDataset SpatialFunctionalDataset::permute_locations(
    std::span<const std::size_t> order) const {
    auto domain = domain_.permuted(order);
    RowMatrix out(values_.rows(), values_.cols());
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < order.size(); ++j) {
            out.row(static_cast<Eigen::Index>(i * p() + j)) =
                values_.row(static_cast<Eigen::Index>(i * p() + order[j]));
        }
    }
    return SpatialFunctionalDataset(std::move(out), n_, grid_, std::move(domain));
}

SpatialFunctionalDataset SpatialFunctionalDataset::scaled(double factor) const {
    return SpatialFunctionalDataset(values_ * factor, n_, grid_, domain_);
}

double inner_product(std::span<const double> f, std::span<const double> g, const TimeGrid& grid) {
    if (f.size() != g.size() || f.size() != grid.size()) {
        std::ostringstream msg;
        msg << "inner_product: dimension mismatch (" << f.size() << ", " << g.size() << ", grid "
            << grid.size() << ")";
        throw ValidationError(msg.str());
    }
    const auto& w = grid.weights();
    double acc = 0.0;
    for (std::size_t m = 0; m < f.size(); ++m) {
        acc += w(static_cast<Eigen::Index>(m)) * (f[m] * g[m]);
    }
    return acc;
}

KernelMatrix build_kernel_matrix(const SpatialDomain& domain, double bandwidth) {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        throw ValidationError("kernel bandwidth must be positive");
    }
    const int d = domain.dim();
    const double scale =
        std::pow(2.0 * std::numbers::pi, -0.5 * d) / std::pow(bandwidth, static_cast<double>(d));
    const auto p = static_cast<Eigen::Index>(domain.size());
    const double inv_two_h2 = 1.0 / (2.0 * bandwidth * bandwidth);
    const Matrix& s = domain.coords();

    KernelMatrix kernel{Matrix(p, p), bandwidth, d};
    for (Eigen::Index j = 0; j < p; ++j) {
        kernel.entries(j, j) = scale;
        for (Eigen::Index k = j + 1; k < p; ++k) {
            const double sq = (s.row(j) - s.row(k)).squaredNorm();
            kernel.entries(j, k) = kernel.entries(k, j) = scale * std::exp(-sq * inv_two_h2);
        }
    }
    return kernel;
}

SymmetricEigen sym_eigen(const Matrix& a) {
    if (a.rows() != a.cols()) {
        throw ValidationError("sym_eigen: matrix is not square");
    }
    if (a.size() == 0) {
        return {Vector(), Matrix()};
    }
    const double norm = a.norm();
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(norm, 1e-300)) {
        throw ValidationError("sym_eigen: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
    if (solver.info() != Eigen::Success) {
        throw NumericError("sym_eigen: eigen decomposition did not converge");
    }
    // Eigen returns ascending order.
    SymmetricEigen out;
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    return out;
}

Matrix psd_sqrt(const Matrix& a) {
    auto eig = sym_eigen(a);
    if (eig.values.size() == 0) {
        return Matrix();
    }
    const double top = std::max(eig.values(0), 0.0);
    const double floor = -1e-8 * top;
    Vector roots(eig.values.size());
    for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        const double lambda = eig.values(k);
        if (lambda < floor || (top == 0.0 && lambda < 0.0)) {
            std::ostringstream msg;
            msg << "psd_sqrt: matrix is not positive semidefinite (eigenvalue " << lambda << ")";
            throw NumericError(msg.str());
        }
        roots(k) = std::sqrt(std::max(lambda, 0.0));
    }
    Matrix s = eig.vectors * roots.asDiagonal() * eig.vectors.transpose();
    return 0.5 * (s + s.transpose());
}

} // namespace spatiofd
