#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "ellin/ellipsoid.hpp"
#include "ellin/errors.hpp"
#include "ellin/linalg.hpp"

namespace ellin {

struct DualSample {
    double value = 0.0;
    double slope = 0.0;
    double curvature = 0.0;
};

// The scalar concave objective whose supremum decides containment of the
// normalized pair. In the eigenbasis of the inner shape,
//
//   value(beta) = -beta - sum_i csq_i * lam_i * beta / (lam_i * beta - 1)
//
// summed over the support (indices with a nonzero rotated center component).
// Its supremum s over [1/lambda_min, inf) classifies the pair:
// s > -1 strictly inside, s = -1 touching, s < -1 not contained.
//
// On the domain the function is concave and negative, the slope is strictly
// decreasing, and the slope is convex, which makes Newton steps started left
// of the root approach it monotonically.
class DualFunction {
public:
    explicit DualFunction(const NormalizedProblem& np)
        : lo_(np.interval_lo()), lower_open_(np.lower_open) {
        lam_.reserve(np.support.size());
        csq_.reserve(np.support.size());
        for (std::size_t i : np.support) {
            lam_.push_back(np.lambda[i]);
            csq_.push_back(np.c_bar[i] * np.c_bar[i]);
        }
    }

    double domain_lo() const { return lo_; }
    bool lower_open() const { return lower_open_; }
    std::size_t support_size() const { return lam_.size(); }

    // Leftmost point that is safe to evaluate: the endpoint itself when the
    // domain is closed there, a hair to its right when the endpoint is a pole.
    double eval_lo() const {
        if (!lower_open_) return lo_;
        return lo_ + std::max(lo_ * tolerances::kLowerNudge,
                              8.0 * tolerances::kNearPole * std::max(1.0, lo_));
    }

    double value(double beta) const {
        guard(beta);
        double s = -beta;
        for (std::size_t i = 0; i < lam_.size(); ++i)
            s -= csq_[i] * lam_[i] * beta / (lam_[i] * beta - 1.0);
        return s;
    }

    double slope(double beta) const {
        guard(beta);
        double s = -1.0;
        for (std::size_t i = 0; i < lam_.size(); ++i) {
            const double d = lam_[i] * beta - 1.0;
            s += csq_[i] * lam_[i] / (d * d);
        }
        return s;
    }

    double curvature(double beta) const {
        guard(beta);
        double s = 0.0;
        for (std::size_t i = 0; i < lam_.size(); ++i) {
            const double d = lam_[i] * beta - 1.0;
            s -= 2.0 * csq_[i] * lam_[i] * lam_[i] / (d * d * d);
        }
        return s;
    }

    // All three derivatives sharing one pass over the support.
    DualSample sample(double beta) const {
        guard(beta);
        DualSample out{-beta, -1.0, 0.0};
        for (std::size_t i = 0; i < lam_.size(); ++i) {
            const double lb = lam_[i] * beta;
            const double d = lb - 1.0;
            out.value -= csq_[i] * lb / d;
            out.slope += csq_[i] * lam_[i] / (d * d);
            out.curvature -= 2.0 * csq_[i] * lam_[i] * lam_[i] / (d * d * d);
        }
        return out;
    }

private:
    void guard(double beta) const {
        if (!std::isfinite(beta))
            throw OutOfDomain("dual function: beta must be finite");
        if (lower_open_) {
            if (beta <= lo_ + tolerances::kNearPole * std::max(1.0, lo_))
                throw OutOfDomain("dual function: beta at or below the open left endpoint");
        } else if (beta < lo_) {
            throw OutOfDomain("dual function: beta below the domain");
        }
    }

    Vector lam_;
    Vector csq_;
    double lo_;
    bool lower_open_;
};

}  // namespace ellin
