#pragma once

// Data-parallel inner loops. Every kernel here has a serial counterpart in
// reference.hpp that the tests hold it to; outputs never depend on the
// OpenMP team size.

#include <cstdint>
#include <vector>

#include "spatiofd/core.hpp"
#include "spatiofd/parallel.hpp"

namespace spatiofd {

/// Monte Carlo draws of the sup and grid-average of a bridge functional.
struct NullSamples {
    Vector sup;
    Vector average;
};

/// p standard Brownian bridges on x_k = k/n, k = 1..n-1, as a p x (n-1)
/// matrix. Consumes exactly p*n normals from `rng`, location by location.
Matrix draw_standard_bridges(Rng& rng, std::size_t p, std::size_t n);

namespace kernels {

/// sum_i (X_{i+1} - X_i)^T (X_{i+1} - X_i) over replicates, T x T, unscaled.
/// Partial sums are formed over fixed replicate blocks and added in block
/// order.
Matrix difference_gram(const SpatialFunctionalDataset& data);

/// Row i holds <X_i(s_j), psi_r> at column r * p + j; shape n x (R*p).
RowMatrix project_replicates(const SpatialFunctionalDataset& data, const RowMatrix& psi);

/// Row i of the result holds <X_{i+1}(s_j) - X_i(s_j), psi_r> laid out as
/// (r * p + j); shape (n-1) x (R*p). `psi` is R x T.
RowMatrix projected_differences(const SpatialFunctionalDataset& data, const RowMatrix& psi);

/// Q(tau) = sum_r eta_{tau,r}^T K eta_{tau,r}. `eta` rows are indexed
/// (tau-1)*R + r, columns by location. A null kernel means the identity.
Vector quadratic_profile(const RowMatrix& eta, std::size_t components, const Matrix* kernel);

/// For each variant v, sup_k and n^{-1} sum_k of sum_r B_r(x_k)^T forms[v][r] B_r(x_k)
/// over standard bridges B_r. Replicate b draws from make_stream(seed, {b}).
std::vector<NullSamples> simulate_bridge_functionals(const std::vector<std::vector<Matrix>>& forms,
                                                     std::size_t n, std::size_t reps,
                                                     std::uint64_t seed);

} // namespace kernels
} // namespace spatiofd
