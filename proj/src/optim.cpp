#include "stylenorm/optim.hpp"

#include <cmath>

namespace stylenorm {

void Adam::step(const std::vector<TensorD*>& params,
                const std::vector<const TensorD*>& grads, double lr) {
  checkArg(params.size() == grads.size(), "Adam: params/grads size mismatch");
  if (m_.empty()) {
    for (const TensorD* p : params) {
      m_.emplace_back(p->shape());
      v_.emplace_back(p->shape());
    }
  }
  checkArg(m_.size() == params.size(), "Adam: parameter list changed size");

  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (size_t i = 0; i < params.size(); ++i) {
    TensorD& p = *params[i];
    const TensorD& g = *grads[i];
    checkArg(p.sameShape(g), "Adam: gradient shape mismatch");
    double* mp = m_[i].data();
    double* vp = v_[i].data();
    double* pp = p.data();
    const double* gp = g.data();
    for (int64_t q = 0; q < p.numel(); ++q) {
      mp[q] = beta1_ * mp[q] + (1.0 - beta1_) * gp[q];
      vp[q] = beta2_ * vp[q] + (1.0 - beta2_) * gp[q] * gp[q];
      double mhat = mp[q] / c1;
      double vhat = vp[q] / c2;
      pp[q] -= lr * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace stylenorm
