#pragma once

#include <cstdint>

#include "vff/types.hpp"

namespace vff {

// Adam with the standard bias-corrected moment estimates.
class AdamOptimizer {
 public:
  AdamOptimizer() = default;
  AdamOptimizer(long dim, double lr, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps),
        m_(Vec::Zero(dim)), v_(Vec::Zero(dim)) {}

  void step(Vec& params, const Vec& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params -= (lr_ / bc1) * m_.cwiseQuotient(
        ((v_ / bc2).cwiseSqrt().array() + eps_).matrix());
  }

  double learning_rate() const { return lr_; }
  std::int64_t steps() const { return t_; }

 private:
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  std::int64_t t_ = 0;
  Vec m_, v_;
};

}  // namespace vff
