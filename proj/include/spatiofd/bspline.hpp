#pragma once

#include <span>
#include <vector>

#include "spatiofd/core.hpp"

namespace spatiofd {

/// Clamped B-spline basis on [lo, hi] with equally spaced interior knots.
class BSplineBasis {
public:
    BSplineBasis(double lo, double hi, int interior_knots, int degree = 3);

    int size() const { return static_cast<int>(knots_.size()) - degree_ - 1; }
    int degree() const { return degree_; }
    const std::vector<double>& knots() const { return knots_; }

    /// Index of the first nonzero basis function at x; writes the degree+1
    /// nonzero values into `values`. x is clamped to [lo, hi].
    int evaluate_nonzero(double x, std::span<double> values) const;

    /// All basis functions at x.
    Vector evaluate(double x) const;

private:
    std::vector<double> knots_;
    int degree_;
};

} // namespace spatiofd
