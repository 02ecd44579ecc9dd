#include "spatiofd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace spatiofd {

Matrix draw_standard_bridges(Rng& rng, std::size_t p, std::size_t n) {
    if (n < 2) {
        throw ValidationError("bridge grid needs n >= 2");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    const double step_sd = 1.0 / std::sqrt(static_cast<double>(n));
    const auto cols = static_cast<Eigen::Index>(n - 1);
    Matrix bridges(static_cast<Eigen::Index>(p), cols);
    Vector walk(static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
        double w = 0.0;
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
            w += step_sd * normal(rng);
            walk(k) = w;
        }
        const double end = walk(cols);
        for (Eigen::Index k = 0; k < cols; ++k) {
            const double x = static_cast<double>(k + 1) / static_cast<double>(n);
            bridges(j, k) = walk(k) - x * end;
        }
    }
    return bridges;
}

namespace kernels {

namespace {
constexpr std::size_t kGramBlock = 8;
}

Matrix difference_gram(const SpatialFunctionalDataset& data) {
    const std::size_t n = data.n();
    const auto p = static_cast<Eigen::Index>(data.p());
    const auto t = static_cast<Eigen::Index>(data.t());
    const std::size_t diffs = n - 1;
    const std::size_t blocks = (diffs + kGramBlock - 1) / kGramBlock;
    std::vector<Matrix> partial(blocks);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
        const std::size_t first = static_cast<std::size_t>(b) * kGramBlock;
        const std::size_t last = std::min(diffs, first + kGramBlock);
        RowMatrix stacked(static_cast<Eigen::Index>(last - first) * p, t);
        for (std::size_t i = first; i < last; ++i) {
            stacked.middleRows(static_cast<Eigen::Index>(i - first) * p, p) =
                data.replicate(i + 1) - data.replicate(i);
        }
        partial[static_cast<std::size_t>(b)] = stacked.transpose() * stacked;
    }

    Matrix gram = Matrix::Zero(t, t);
    for (const auto& block : partial) {
        gram += block;
    }
    return gram;
}

RowMatrix project_replicates(const SpatialFunctionalDataset& data, const RowMatrix& psi) {
    if (static_cast<std::size_t>(psi.cols()) != data.t()) {
        throw ValidationError("project_replicates: eigenfunction length does not match grid");
    }
    const std::size_t n = data.n();
    const auto p = static_cast<Eigen::Index>(data.p());
    const auto r = psi.rows();
    const Matrix weighted = (psi * data.grid().weights().asDiagonal()).transpose();
    RowMatrix out(static_cast<Eigen::Index>(n), r * p);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const Matrix scores = data.replicate(static_cast<std::size_t>(i)) * weighted;
        for (Eigen::Index c = 0; c < r; ++c) {
            out.row(i).segment(c * p, p) = scores.col(c).transpose();
        }
    }
    return out;
}

RowMatrix projected_differences(const SpatialFunctionalDataset& data, const RowMatrix& psi) {
    if (static_cast<std::size_t>(psi.cols()) != data.t()) {
        throw ValidationError("projected_differences: eigenfunction length does not match grid");
    }
    const std::size_t n = data.n();
    const auto p = static_cast<Eigen::Index>(data.p());
    const auto r = psi.rows();
    const Matrix weighted = (psi * data.grid().weights().asDiagonal()).transpose(); // T x R
    RowMatrix out(static_cast<Eigen::Index>(n - 1), r * p);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n - 1); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const Matrix scores = (data.replicate(idx + 1) - data.replicate(idx)) * weighted; // p x R
        for (Eigen::Index c = 0; c < r; ++c) {
            out.row(i).segment(c * p, p) = scores.col(c).transpose();
        }
    }
    return out;
}

Vector quadratic_profile(const RowMatrix& eta, std::size_t components, const Matrix* kernel) {
    if (components == 0 || eta.rows() % static_cast<Eigen::Index>(components) != 0) {
        throw ValidationError("quadratic_profile: row count is not a multiple of the component count");
    }
    if (kernel != nullptr && (kernel->rows() != eta.cols() || kernel->cols() != eta.cols())) {
        throw ValidationError("quadratic_profile: kernel dimension does not match location count");
    }
    const auto rcount = static_cast<Eigen::Index>(components);
    const Eigen::Index taus = eta.rows() / rcount;
    Vector q(taus);

#pragma omp parallel for schedule(static)
    for (Eigen::Index tau = 0; tau < taus; ++tau) {
        double acc = 0.0;
        for (Eigen::Index r = 0; r < rcount; ++r) {
            const auto e = eta.row(tau * rcount + r);
            if (kernel != nullptr) {
                acc += (e * (*kernel)).dot(e);
            } else {
                acc += e.squaredNorm();
            }
        }
        q(tau) = acc;
    }
    return q;
}

std::vector<NullSamples> simulate_bridge_functionals(const std::vector<std::vector<Matrix>>& forms,
                                                     std::size_t n, std::size_t reps,
                                                     std::uint64_t seed) {
    if (forms.empty() || forms.front().empty()) {
        throw ValidationError("simulate_bridge_functionals: no quadratic forms supplied");
    }
    const std::size_t variants = forms.size();
    const std::size_t components = forms.front().size();
    const auto p = static_cast<std::size_t>(forms.front().front().rows());
    for (const auto& set : forms) {
        if (set.size() != components) {
            throw ValidationError("simulate_bridge_functionals: ragged form sets");
        }
        for (const auto& m : set) {
            if (static_cast<std::size_t>(m.rows()) != p || static_cast<std::size_t>(m.cols()) != p) {
                throw ValidationError("simulate_bridge_functionals: form dimension mismatch");
            }
        }
    }

    std::vector<NullSamples> out(variants);
    for (auto& s : out) {
        s.sup.resize(static_cast<Eigen::Index>(reps));
        s.average.resize(static_cast<Eigen::Index>(reps));
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    const auto cols = static_cast<Eigen::Index>(n - 1);

#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(reps); ++b) {
        Rng rng = make_stream(seed, {static_cast<std::uint64_t>(b)});
        Matrix path = Matrix::Zero(static_cast<Eigen::Index>(variants), cols);
        for (std::size_t r = 0; r < components; ++r) {
            const Matrix bridges = draw_standard_bridges(rng, p, n);
            for (std::size_t v = 0; v < variants; ++v) {
                const Matrix mapped = forms[v][r] * bridges;
                path.row(static_cast<Eigen::Index>(v)) +=
                    bridges.cwiseProduct(mapped).colwise().sum();
            }
        }
        for (std::size_t v = 0; v < variants; ++v) {
            const auto row = path.row(static_cast<Eigen::Index>(v));
            out[v].sup(b) = row.maxCoeff();
            out[v].average(b) = row.sum() * inv_n;
        }
    }
    return out;
}

} // namespace kernels
} // namespace spatiofd
