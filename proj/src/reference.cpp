#include "spatiofd/reference.hpp"

namespace spatiofd::reference {

Matrix difference_gram(const SpatialFunctionalDataset& data) {
    const std::size_t t = data.t();
    Matrix gram = Matrix::Zero(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t));
    for (std::size_t i = 0; i + 1 < data.n(); ++i) {
        for (std::size_t j = 0; j < data.p(); ++j) {
            const auto next = data.curve(i + 1, j);
            const auto prev = data.curve(i, j);
            for (std::size_t a = 0; a < t; ++a) {
                const double da = next[a] - prev[a];
                for (std::size_t b = 0; b < t; ++b) {
                    gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
                        da * (next[b] - prev[b]);
                }
            }
        }
    }
    return gram;
}

RowMatrix project_replicates(const SpatialFunctionalDataset& data, const RowMatrix& psi) {
    const std::size_t p = data.p();
    const auto rcount = static_cast<std::size_t>(psi.rows());
    RowMatrix out(static_cast<Eigen::Index>(data.n()), static_cast<Eigen::Index>(rcount * p));
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t r = 0; r < rcount; ++r) {
            const std::span<const double> basis(psi.row(static_cast<Eigen::Index>(r)).data(), data.t());
            for (std::size_t j = 0; j < p; ++j) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r * p + j)) =
                    inner_product(data.curve(i, j), basis, data.grid());
            }
        }
    }
    return out;
}

RowMatrix projected_differences(const SpatialFunctionalDataset& data, const RowMatrix& psi) {
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    const std::size_t t = data.t();
    const auto rcount = static_cast<std::size_t>(psi.rows());
    const auto& w = data.grid().weights();
    RowMatrix out(static_cast<Eigen::Index>(n - 1), static_cast<Eigen::Index>(rcount * p));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t r = 0; r < rcount; ++r) {
            for (std::size_t j = 0; j < p; ++j) {
                double acc = 0.0;
                for (std::size_t m = 0; m < t; ++m) {
                    const double diff = data.curve(i + 1, j)[m] - data.curve(i, j)[m];
                    acc += w(static_cast<Eigen::Index>(m)) * diff *
                           psi(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(m));
                }
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r * p + j)) = acc;
            }
        }
    }
    return out;
}

Vector quadratic_profile(const RowMatrix& eta, std::size_t components, const Matrix* kernel) {
    const auto rcount = static_cast<Eigen::Index>(components);
    const Eigen::Index taus = eta.rows() / rcount;
    const Eigen::Index p = eta.cols();
    Vector q = Vector::Zero(taus);
    for (Eigen::Index tau = 0; tau < taus; ++tau) {
        for (Eigen::Index r = 0; r < rcount; ++r) {
            const Eigen::Index row = tau * rcount + r;
            for (Eigen::Index j = 0; j < p; ++j) {
                for (Eigen::Index k = 0; k < p; ++k) {
                    const double weight = kernel != nullptr ? (*kernel)(j, k) : (j == k ? 1.0 : 0.0);
                    q(tau) += weight * eta(row, j) * eta(row, k);
                }
            }
        }
    }
    return q;
}

std::vector<NullSamples> simulate_bridge_functionals(const std::vector<Matrix>& roots,
                                                     const std::vector<std::optional<Matrix>>& kernels,
                                                     std::size_t n, std::size_t reps,
                                                     std::uint64_t seed) {
    const std::size_t variants = kernels.size();
    const auto p = roots.front().rows();
    const auto cols = static_cast<Eigen::Index>(n - 1);
    std::vector<NullSamples> out(variants);
    for (auto& s : out) {
        s.sup.resize(static_cast<Eigen::Index>(reps));
        s.average.resize(static_cast<Eigen::Index>(reps));
    }
    for (std::size_t b = 0; b < reps; ++b) {
        Rng rng = make_stream(seed, {static_cast<std::uint64_t>(b)});
        Matrix path = Matrix::Zero(static_cast<Eigen::Index>(variants), cols);
        for (const auto& root : roots) {
            const Matrix standard = draw_standard_bridges(rng, static_cast<std::size_t>(p), n);
            const Matrix correlated = root * standard;
            for (std::size_t v = 0; v < variants; ++v) {
                for (Eigen::Index x = 0; x < cols; ++x) {
                    double acc = 0.0;
                    for (Eigen::Index j = 0; j < p; ++j) {
                        for (Eigen::Index k = 0; k < p; ++k) {
                            const double weight =
                                kernels[v] ? (*kernels[v])(j, k) : (j == k ? 1.0 : 0.0);
                            acc += weight * correlated(j, x) * correlated(k, x);
                        }
                    }
                    path(static_cast<Eigen::Index>(v), x) += acc;
                }
            }
        }
        for (std::size_t v = 0; v < variants; ++v) {
            out[v].sup(static_cast<Eigen::Index>(b)) = path.row(static_cast<Eigen::Index>(v)).maxCoeff();
            out[v].average(static_cast<Eigen::Index>(b)) =
                path.row(static_cast<Eigen::Index>(v)).sum() / static_cast<double>(n);
        }
    }
    return out;
}

} // namespace spatiofd::reference
