#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "spatiofd/changepoint.hpp"
#include "spatiofd/core.hpp"

namespace spatiofd {

/// Order-preserving halves: odd positions 1,3,5,... and even positions
/// 2,4,6,... (1-based). An odd trailing replicate is dropped.
struct SplitPair {
    SpatialFunctionalDataset odd;
    SpatialFunctionalDataset even;
    std::size_t m = 0;
    std::vector<std::size_t> odd_index;  // original 1-based replicate numbers
    std::vector<std::size_t> even_index;
};

SplitPair split_dataset(const SpatialFunctionalDataset& data);

/// Nadaraya-Watson smoothing of each row of `eta` (components x p) over
/// locations, the location itself included.
Matrix kernel_smooth(const Matrix& eta, const KernelMatrix& kernel);

/// W_j = sum_r odd(r, j) * even(r, j)
Vector ranking_statistics(const Matrix& eta_odd, const Matrix& eta_even);

struct SdaThreshold {
    double threshold = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> selected; // 0-based, ascending
};

/// Smallest |W_j| value t with (1 + #{W <= -t}) / max(#{W >= t}, 1) <= alpha.
SdaThreshold sda_threshold(const Vector& w, double alpha);

/// Step-up Benjamini-Hochberg; returns rejected indices (0-based, ascending).
std::vector<std::size_t> benjamini_hochberg(const Vector& pvalues, double alpha);

enum class RecoveryMethod { Fsda, Fsda0, BH };

std::string to_string(RecoveryMethod method);
RecoveryMethod parse_recovery_method(const std::string& name);

struct RecoveryConfig {
    double alpha = 0.2;
    double fve_target = 0.90;
    double varrho = 0.05;
    int interior_knots = 8;
    std::optional<double> bandwidth; // default: the detection bandwidth rule on the full data
    RecoveryMethod method = RecoveryMethod::Fsda;
    bool shared_truncation = false;  // one FVE-selected R for both halves, taken from the full data

    void validate() const;
};

struct RecoveryResult {
    RecoveryMethod method = RecoveryMethod::Fsda;
    Vector w;          // W_j for fSDA variants, chi-square statistics for BH
    Vector pvalues;    // BH only
    double threshold = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> selected; // 0-based location indices
    double alpha = 0.0;
    std::size_t tau_hat = 0;
    std::size_t tau_split = 0;
    std::size_t truncation = 0;
    double bandwidth = 0.0;
};

RecoveryResult fsda(const SpatialFunctionalDataset& data, std::size_t tau_hat,
                    const RecoveryConfig& config);

RecoveryResult bh_baseline(const SpatialFunctionalDataset& data, std::size_t tau_hat,
                           const RecoveryConfig& config);

/// Dispatches on `config.method`.
RecoveryResult recover(const SpatialFunctionalDataset& data, std::size_t tau_hat,
                       const RecoveryConfig& config);

} // namespace spatiofd
