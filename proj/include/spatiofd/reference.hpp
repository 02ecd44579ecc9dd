#pragma once

// Straightforward serial versions of the kernels in kernels.hpp. Slow on
// purpose; kept for tests and the benchmark.

#include <optional>

#include "spatiofd/kernels.hpp"

namespace spatiofd::reference {

Matrix difference_gram(const SpatialFunctionalDataset& data);

RowMatrix project_replicates(const SpatialFunctionalDataset& data, const RowMatrix& psi);

RowMatrix projected_differences(const SpatialFunctionalDataset& data, const RowMatrix& psi);

/// Brute-force double sum over location pairs.
Vector quadratic_profile(const RowMatrix& eta, std::size_t components, const Matrix* kernel);

/// Forms B~_r = roots[r] * B*_r explicitly and evaluates the kernel double
/// sum at every grid point. Draw order matches the parallel kernel.
std::vector<NullSamples> simulate_bridge_functionals(const std::vector<Matrix>& roots,
                                                     const std::vector<std::optional<Matrix>>& kernels,
                                                     std::size_t n, std::size_t reps,
                                                     std::uint64_t seed);

} // namespace spatiofd::reference
