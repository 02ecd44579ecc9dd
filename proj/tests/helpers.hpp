#pragma once

#include <random>

#include "spatiofd/core.hpp"
#include "spatiofd/parallel.hpp"

namespace testutil {

using namespace spatiofd;

/// X_i(s_j; t) = c[i] * psi(t) for p = 1 on a uniform grid.
inline SpatialFunctionalDataset rank_one(const std::vector<double>& c, const Vector& psi) {
    const auto t = psi.size();
    RowMatrix values(static_cast<Eigen::Index>(c.size()), t);
    for (std::size_t i = 0; i < c.size(); ++i) {
        values.row(static_cast<Eigen::Index>(i)) = c[i] * psi.transpose();
    }
    Matrix coords(1, 1);
    coords(0, 0) = 0.5;
    return SpatialFunctionalDataset(values, c.size(), TimeGrid::uniform(static_cast<std::size_t>(t)),
                                    SpatialDomain::with_default_ids(coords));
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = normal(rng);
    }
    return m;
}

inline SpatialDomain random_domain(std::size_t p, Rng& rng, int dim = 2) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Matrix coords(static_cast<Eigen::Index>(p), dim);
    for (Eigen::Index i = 0; i < coords.size(); ++i) {
        coords.data()[i] = unit(rng);
    }
    return SpatialDomain::with_default_ids(coords);
}

/// Gaussian white-noise dataset.
inline SpatialFunctionalDataset noise_dataset(std::size_t n, std::size_t p, std::size_t t, std::uint64_t seed) {
    Rng rng = make_stream(seed, {99});
    RowMatrix values = random_matrix(static_cast<Eigen::Index>(n * p), static_cast<Eigen::Index>(t), rng);
    return SpatialFunctionalDataset(values, n, TimeGrid::uniform(t), random_domain(p, rng));
}

} // namespace testutil
