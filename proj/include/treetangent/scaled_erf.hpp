#pragma once

#include <cmath>
#include <stdexcept>

namespace treetangent {

// Decision function sigma(p) = erf(alpha*p)/2 + 1/2. Rotationally symmetric
// about (0, 1/2): sigma(0) = 0.5, sigma(p) + sigma(-p) = 1, limits 0 and 1.
// alpha controls how sharply routing probabilities saturate; alpha -> inf is
// the hard Boolean split.
class ScaledErf {
public:
    explicit ScaledErf(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0) || !std::isfinite(alpha))
            throw std::invalid_argument("ScaledErf: alpha must be positive and finite");
    }

    double alpha() const noexcept { return alpha_; }

    double value(double p) const { return 0.5 * std::erf(alpha_ * p) + 0.5; }

    // d sigma / dp = (alpha / sqrt(pi)) * exp(-(alpha p)^2)
    double deriv(double p) const {
        const double ap = alpha_ * p;
        return alpha_ * M_2_SQRTPI * 0.5 * std::exp(-ap * ap);
    }

private:
    double alpha_;
};

}  // namespace treetangent
