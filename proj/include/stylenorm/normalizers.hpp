#pragma once

#include "stylenorm/tensor.hpp"

namespace stylenorm {

// ---------------------------------------------------------------------------
// Standardization functions g: remove a content feature's own style before
// injection. Three flavors: local patch statistics (adaptive convolution
// route), instance statistics (AdaIN route), whitening (WCT route).

// Local standardization: unfolds zc and normalizes each patch with the mean
// and std computed over its own kH x kW extent, per channel. Output layout
// (N, H, W, C, kH, kW). A 1x1 kernel makes every patch its own mean, so the
// output is identically zero; larger kernels yield zero-mean, unit-variance
// patch rows.
template <std::floating_point T>
PatchTensor<T> standardizeLocal(const Tensor<T>& zc, int kH, int kW,
                                double eps) {
  PatchTensor<T> p = unfold(zc, kH, kW);
  const int64_t rows = p.patches.numel() / (kH * kW);
  const int64_t m = static_cast<int64_t>(kH) * kW;
  T* d = p.patches.data();
  for (int64_t r = 0; r < rows; ++r, d += m) {
    double sum = 0;
    for (int64_t q = 0; q < m; ++q) sum += d[q];
    double mu = sum / static_cast<double>(m);
    double acc = 0;
    for (int64_t q = 0; q < m; ++q) {
      double dl = static_cast<double>(d[q]) - mu;
      acc += dl * dl;
    }
    double s = std::sqrt(acc / static_cast<double>(m) + eps);
    for (int64_t q = 0; q < m; ++q)
      d[q] = static_cast<T>((static_cast<double>(d[q]) - mu) / s);
  }
  return p;
}

// Instance standardization: per (n, c), normalize over the H x W extent.
template <std::floating_point T>
Tensor<T> standardizeInstance(const Tensor<T>& c, double eps) {
  checkArg(c.rank() == 4, "standardizeInstance: rank-4 input required");
  Tensor<T> out = c;
  const int64_t n = c.dim(0), ch = c.dim(1), hw = c.dim(2) * c.dim(3);
  T* d = out.data();
  for (int64_t i = 0; i < n * ch; ++i, d += hw) {
    double sum = 0;
    for (int64_t q = 0; q < hw; ++q) sum += d[q];
    double mu = sum / static_cast<double>(hw);
    double acc = 0;
    for (int64_t q = 0; q < hw; ++q) {
      double dl = static_cast<double>(d[q]) - mu;
      acc += dl * dl;
    }
    double s = std::sqrt(acc / static_cast<double>(hw) + eps);
    for (int64_t q = 0; q < hw; ++q)
      d[q] = static_cast<T>((static_cast<double>(d[q]) - mu) / s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Whitening route (f64 only; covariance work is per-sample)

// Eigenvectors (columns of q) and eigenvalues of a symmetric channel
// covariance matrix. lambda is sorted descending and nonnegative.
struct EigenPair {
  TensorD q;       // C x C, columns are eigenvectors
  TensorD lambda;  // length C
};

// (1/(H*W)) * Xc * Xc^T + shrink*I for the centered C x (H*W) matrix Xc of a
// single sample.
TensorD channelCovariance(const TensorD& x, double shrink);

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Input must be
// symmetric to 1e-10; it is symmetrized as (A + A^T)/2 before iterating.
// Rotations run until max off-diagonal magnitude < 1e-12 or 100 sweeps.
// Eigenvalues are clamped at zero (inputs are regularized covariances),
// pairs sorted descending, and each eigenvector's first nonzero component is
// made positive so downstream transforms are deterministic.
EigenPair symmetricEigen(const TensorD& a);

// Q diag(1/sqrt(max(lambda, eps))) Q^T (c - mu_{H,W}(c)); the output channel
// covariance is the identity when the input covariance is well conditioned.
TensorD whiten(const TensorD& c, const EigenPair& eig, double eps);

}  // namespace stylenorm
