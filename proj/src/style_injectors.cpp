#include "stylenorm/style_injectors.hpp"

#include <cmath>

namespace stylenorm {

TensorD coloringMatrix(const EigenPair& eig) {
  const int64_t ch = eig.q.dim(0);
  TensorD qs({ch, ch});
  for (int64_t i = 0; i < ch; ++i)
    for (int64_t j = 0; j < ch; ++j)
      qs.at2(i, j) = eig.q.at2(i, j) * std::sqrt(std::max(eig.lambda[j], 0.0));
  TensorD m({ch, ch});
  detail::gemm(false, true, ch, ch, ch, qs.data(), eig.q.data(), m.data(),
               false);
  return m;
}

TensorD injectColoring(const TensorD& cwhite, const EigenPair& eigS,
                       const TensorD& muS) {
  checkArg(cwhite.rank() == 4 && cwhite.dim(0) == 1,
           "injectColoring: (1,C,H,W) input required");
  const int64_t ch = cwhite.dim(1), h = cwhite.dim(2), w = cwhite.dim(3),
                hw = h * w;
  checkArg(eigS.q.dim(0) == ch && muS.numel() == ch,
           "injectColoring: dimension mismatch");

  TensorD m = coloringMatrix(eigS);
  TensorD y({ch, hw});
  detail::gemm(false, false, ch, hw, ch, m.data(), cwhite.data(), y.data(),
               false);
  for (int64_t i = 0; i < ch; ++i) {
    double b = muS[i];
    double* row = y.data() + i * hw;
    for (int64_t q = 0; q < hw; ++q) row[q] += b;
  }
  return y.reshaped({1, ch, h, w});
}

TensorD coloringAsConv1x1(const TensorD& cwhite, const EigenPair& eigS,
                          const TensorD& muS) {
  checkArg(cwhite.rank() == 4 && cwhite.dim(0) == 1,
           "coloringAsConv1x1: (1,C,H,W) input required");
  const int64_t ch = cwhite.dim(1);
  checkArg(eigS.q.dim(0) == ch && muS.numel() == ch,
           "coloringAsConv1x1: dimension mismatch");
  AdaptiveKernel<double> k;
  k.weights = coloringMatrix(eigS).reshaped({ch, ch, 1, 1});
  k.bias = muS;
  return conv2d(cwhite, k);
}

TensorD adainAsConv1x1(const TensorD& cbar, const TensorD& s, double eps) {
  checkArg(cbar.rank() == 4 && cbar.dim(0) == 1 && s.rank() == 4 &&
               s.dim(0) == 1,
           "adainAsConv1x1: single-sample inputs required");
  checkArg(cbar.dim(1) == s.dim(1), "adainAsConv1x1: channel mismatch");
  const int64_t ch = cbar.dim(1), shw = s.dim(2) * s.dim(3);

  AdaptiveKernel<double> k;
  k.weights = TensorD({ch, ch, 1, 1});
  k.bias = TensorD({ch});
  for (int64_t i = 0; i < ch; ++i) {
    const double* row = s.data() + i * shw;
    double mu = 0;
    for (int64_t q = 0; q < shw; ++q) mu += row[q];
    mu /= static_cast<double>(shw);
    double acc = 0;
    for (int64_t q = 0; q < shw; ++q) {
      double dl = row[q] - mu;
      acc += dl * dl;
    }
    k.weights.at4(i, i, 0, 0) = std::sqrt(acc / static_cast<double>(shw) + eps);
    k.bias[i] = mu;
  }
  return conv2d(cbar, k);
}

}  // namespace stylenorm
