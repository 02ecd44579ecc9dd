#include "spatiofd/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace spatiofd {

BSplineBasis::BSplineBasis(double lo, double hi, int interior_knots, int degree) : degree_(degree) {
    if (!(hi > lo)) {
        throw ValidationError("B-spline basis requires hi > lo");
    }
    if (interior_knots < 0 || degree < 1) {
        throw ValidationError("B-spline basis requires interior_knots >= 0 and degree >= 1");
    }
    knots_.assign(static_cast<std::size_t>(degree + 1), lo);
    for (int k = 1; k <= interior_knots; ++k) {
        knots_.push_back(lo + (hi - lo) * k / (interior_knots + 1));
    }
    knots_.insert(knots_.end(), static_cast<std::size_t>(degree + 1), hi);
}

int BSplineBasis::evaluate_nonzero(double x, std::span<double> values) const {
    const double lo = knots_.front();
    const double hi = knots_.back();
    x = std::clamp(x, lo, hi);

    // Knot span s with knots[s] <= x < knots[s+1]; the right end belongs to
    // the last nonempty span.
    const int last = size() - 1;
    int span;
    if (x >= hi) {
        span = last;
    } else {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
        span = static_cast<int>(it - knots_.begin()) - 1;
        span = std::clamp(span, degree_, last);
    }

    std::vector<double> left(static_cast<std::size_t>(degree_ + 1));
    std::vector<double> right(static_cast<std::size_t>(degree_ + 1));
    values[0] = 1.0;
    for (int j = 1; j <= degree_; ++j) {
        left[j] = x - knots_[span + 1 - j];
        right[j] = knots_[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = values[r] / (right[r + 1] + left[j - r]);
            values[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        values[j] = saved;
    }
    return span - degree_;
}

Vector BSplineBasis::evaluate(double x) const {
    Vector out = Vector::Zero(size());
    std::vector<double> local(static_cast<std::size_t>(degree_ + 1));
    const int first = evaluate_nonzero(x, local);
    for (int k = 0; k <= degree_; ++k) {
        out(first + k) = local[k];
    }
    return out;
}

} // namespace spatiofd
