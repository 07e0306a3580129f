#pragma once

#include "stylenorm/normalizers.hpp"
#include "stylenorm/rng.hpp"
#include "stylenorm/tensor.hpp"

namespace stylenorm {

// ---------------------------------------------------------------------------
// Style injection functions f, all expressible as convolutions: channel-wise
// affine (1x1 depthwise), coloring (1x1 full), and adaptive convolution with
// style-derived kernels.

// 1-D style representation emitted by a style encoder.
template <std::floating_point T>
struct StyleCode {
  Tensor<T> code;  // length d_s
};

// Style-derived convolution weights plus per-output-channel bias.
template <std::floating_point T>
struct AdaptiveKernel {
  Tensor<T> weights;  // (O, C, kH, kW)
  Tensor<T> bias;     // (O)
};

// Affine map from a style code to kernel weights and bias: one head of shape
// (C*O*kH*kW) x d_s for the weights, one of shape O x d_s for the bias.
template <std::floating_point T>
struct PsiEncoder {
  Tensor<T> kernelWeight;  // (C*O*kH*kW, d_s)
  Tensor<T> kernelBias;    // (C*O*kH*kW)
  Tensor<T> biasWeight;    // (O, d_s)
  Tensor<T> biasBias;      // (O)
};

// Fan-in uniform init scaled down by sqrt(kH*kW) so the emitted kernels give
// unit-order output variance on unit-variance standardized patches.
template <std::floating_point T>
PsiEncoder<T> makePsiEncoder(int C, int O, int kH, int kW, int ds, Rng& rng) {
  checkArg(C > 0 && O > 0 && kH > 0 && kW > 0 && ds > 0,
           "makePsiEncoder: dimensions must be positive");
  const int64_t flat = static_cast<int64_t>(C) * O * kH * kW;
  const double bound =
      std::sqrt(6.0 / static_cast<double>(ds)) / std::sqrt(double(kH) * kW);
  PsiEncoder<T> enc;
  enc.kernelWeight = randUniform<T>({flat, ds}, rng, -bound, bound);
  enc.kernelBias = Tensor<T>({flat});
  enc.biasWeight = randUniform<T>({O, ds}, rng, -bound, bound);
  enc.biasBias = Tensor<T>({O});
  return enc;
}

// z_s -> adaptive kernel: affine kernel head reshaped to (O, C, kH, kW) plus
// an affine bias head of length O.
template <std::floating_point T>
AdaptiveKernel<T> psiForward(const PsiEncoder<T>& enc,
                             const StyleCode<T>& z, int C, int O, int kH,
                             int kW) {
  const int64_t flat = static_cast<int64_t>(C) * O * kH * kW;
  const int64_t ds = z.code.dim(0);
  checkArg(enc.kernelWeight.rank() == 2 && enc.kernelWeight.dim(0) == flat &&
               enc.kernelWeight.dim(1) == ds,
           "psiForward: kernel head dimensions inconsistent");
  checkArg(enc.kernelBias.numel() == flat,
           "psiForward: kernel bias length inconsistent");
  checkArg(enc.biasWeight.rank() == 2 && enc.biasWeight.dim(0) == O &&
               enc.biasWeight.dim(1) == ds,
           "psiForward: bias head dimensions inconsistent");
  checkArg(enc.biasBias.numel() == O,
           "psiForward: bias head bias length inconsistent");

  AdaptiveKernel<T> k;
  k.weights = add(matvec(enc.kernelWeight, z.code), enc.kernelBias)
                  .reshaped({O, C, kH, kW});
  k.bias = add(matvec(enc.biasWeight, z.code), enc.biasBias);
  return k;
}

// ---------------------------------------------------------------------------
// adaptive convolution: one (H*W) x (C*kH*kW) by (C*kH*kW) x O product per
// batch item, emitted as (N, O, H, W), plus bias.

template <std::floating_point T>
Tensor<T> adaptiveConv(const PatchTensor<T>& p, const AdaptiveKernel<T>& k) {
  const int64_t n = p.patches.dim(0), h = p.patches.dim(1),
                w = p.patches.dim(2);
  const int64_t o = k.weights.dim(0);
  const int64_t ckk = k.weights.numel() / o;
  checkArg(p.patches.dim(3) == k.weights.dim(1) &&
               p.patches.dim(4) == k.weights.dim(2) &&
               p.patches.dim(5) == k.weights.dim(3),
           "adaptiveConv: patch inner dims do not match kernel");
  checkArg(k.bias.numel() == o, "adaptiveConv: bias length != O");

  Tensor<T> out({n, o, h, w});
  const int64_t hw = h * w;
  for (int64_t in = 0; in < n; ++in) {
    // (O x CKK) * (HW x CKK)^T -> (O x HW), already in (O, H, W) layout
    detail::gemm(false, true, o, hw, ckk, k.weights.data(),
                 p.patches.data() + in * hw * ckk, out.data() + in * o * hw,
                 false);
  }
  for (int64_t in = 0; in < n; ++in)
    for (int64_t io = 0; io < o; ++io) {
      T b = k.bias[io];
      T* row = out.data() + (in * o + io) * hw;
      for (int64_t q = 0; q < hw; ++q) row[q] += b;
    }
  return out;
}

// Direct per-position loop nest over (o, c, k, l). Kept separate from the
// gemm path so the benchmark can assert their outputs agree before timing.
template <std::floating_point T>
Tensor<T> adaptiveConvReference(const PatchTensor<T>& p,
                                const AdaptiveKernel<T>& k) {
  const int64_t n = p.patches.dim(0), h = p.patches.dim(1),
                w = p.patches.dim(2), c = p.patches.dim(3);
  const int kH = p.kernel[0], kW = p.kernel[1];
  const int64_t o = k.weights.dim(0);
  checkArg(k.weights.dim(1) == c && k.weights.dim(2) == kH &&
               k.weights.dim(3) == kW,
           "adaptiveConvReference: kernel mismatch");
  Tensor<T> out({n, o, h, w});
  for (int64_t in = 0; in < n; ++in)
    for (int64_t io = 0; io < o; ++io)
      for (int64_t i = 0; i < h; ++i)
        for (int64_t j = 0; j < w; ++j) {
          double acc = k.bias[io];
          const T* patch =
              p.patches.data() + (((in * h + i) * w + j) * c) * kH * kW;
          const T* wgt = k.weights.data() + io * c * kH * kW;
          for (int64_t q = 0; q < c * kH * kW; ++q)
            acc += static_cast<double>(patch[q]) * wgt[q];
          out.at4(in, io, i, j) = static_cast<T>(acc);
        }
  return out;
}

// Standard stride-1 same-padding convolution, shared machinery with
// adaptiveConv through the unfold+gemm path.
template <std::floating_point T>
Tensor<T> conv2d(const Tensor<T>& x, const AdaptiveKernel<T>& k) {
  return adaptiveConv(unfold(x, static_cast<int>(k.weights.dim(2)),
                             static_cast<int>(k.weights.dim(3))),
                      k);
}

// ---------------------------------------------------------------------------
// AdaIN: per-channel scale by sigma_{H,W}(s) and shift by mu_{H,W}(s)

template <std::floating_point T>
Tensor<T> injectAdaIN(const Tensor<T>& cbar, const Tensor<T>& s, double eps) {
  checkArg(cbar.rank() == 4 && s.rank() == 4,
           "injectAdaIN: rank-4 inputs required");
  checkArg(cbar.dim(0) == s.dim(0) && cbar.dim(1) == s.dim(1),
           "injectAdaIN: batch/channel mismatch");
  const int64_t n = cbar.dim(0), ch = cbar.dim(1),
                hw = cbar.dim(2) * cbar.dim(3), shw = s.dim(2) * s.dim(3);
  Tensor<T> out = cbar;
  for (int64_t i = 0; i < n * ch; ++i) {
    const T* srow = s.data() + i * shw;
    double mu = 0;
    for (int64_t q = 0; q < shw; ++q) mu += srow[q];
    mu /= static_cast<double>(shw);
    double acc = 0;
    for (int64_t q = 0; q < shw; ++q) {
      double dl = static_cast<double>(srow[q]) - mu;
      acc += dl * dl;
    }
    double sigma = std::sqrt(acc / static_cast<double>(shw) + eps);
    T* row = out.data() + i * hw;
    for (int64_t q = 0; q < hw; ++q)
      row[q] = static_cast<T>(sigma * row[q] + mu);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Coloring route (f64): impose the style covariance and mean on a whitened
// content feature.

// Q_s diag(sqrt(lambda_s)) Q_s^T cwhite + mu_s
TensorD injectColoring(const TensorD& cwhite, const EigenPair& eigS,
                       const TensorD& muS);

// Same transform packed into a 1x1 AdaptiveKernel and run through conv2d;
// equals injectColoring elementwise.
TensorD coloringAsConv1x1(const TensorD& cwhite, const EigenPair& eigS,
                          const TensorD& muS);

// AdaIN packed into a diagonal 1x1 kernel (depthwise scale + bias) and run
// through conv2d; equals injectAdaIN for a single sample.
TensorD adainAsConv1x1(const TensorD& cbar, const TensorD& s, double eps);

// The coloring matrix Q diag(sqrt(max(lambda,0))) Q^T, exposed for tests.
TensorD coloringMatrix(const EigenPair& eig);

}  // namespace stylenorm
