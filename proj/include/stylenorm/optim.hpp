#pragma once

#include <vector>

#include "stylenorm/tensor.hpp"

namespace stylenorm {

// Adam with bias correction. Moment slots are allocated on first step and
// keyed by parameter position, so the parameter list must stay in the same
// order across steps.
class Adam {
 public:
  Adam(double beta1, double beta2, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(const std::vector<TensorD*>& params,
            const std::vector<const TensorD*>& grads, double lr);

  int64_t iterations() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  int64_t t_ = 0;
  std::vector<TensorD> m_, v_;
};

}  // namespace stylenorm
