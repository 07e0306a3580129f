#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stylenorm/rng.hpp"

namespace stylenorm {

inline void checkArg(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

namespace detail {
// Row-major GEMM cores, BLAS-backed when available (see blas_kernels.cpp).
// C[m,n] (+)= op(A)[m,k] * op(B)[k,n] where op transposes the stored
// buffer when the corresponding flag is set.
void gemm(bool transA, bool transB, int64_t m, int64_t n, int64_t k,
          const float* a, const float* b, float* c, bool accumulate);
void gemm(bool transA, bool transB, int64_t m, int64_t n, int64_t k,
          const double* a, const double* b, double* c, bool accumulate);
}  // namespace detail

// Dense row-major N-dimensional array of real scalars. Tensors are immutable
// values in every public operation: functions return fresh tensors and never
// alias their inputs.
template <std::floating_point T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int64_t> shape, T fill = T(0))
      : shape_(std::move(shape)) {
    validateShape();
    data_.assign(static_cast<size_t>(numel()), fill);
  }

  Tensor(std::vector<int64_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    validateShape();
    checkArg(static_cast<int64_t>(data_.size()) == numel(),
             "tensor data length does not match shape product");
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_.at(static_cast<size_t>(i)); }

  int64_t numel() const {
    int64_t n = 1;
    for (int64_t d : shape_) n *= d;
    return shape_.empty() ? (data_.empty() ? 0 : 1) : n;
  }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& raw() { return data_; }
  const std::vector<T>& raw() const { return data_; }

  T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  // rank-4 accessor for the (N, C, H, W) feature-map layout
  T& at4(int64_t n, int64_t c, int64_t h, int64_t w) {
    return data_[static_cast<size_t>(
        ((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }
  const T& at4(int64_t n, int64_t c, int64_t h, int64_t w) const {
    return data_[static_cast<size_t>(
        ((n * shape_[1] + c) * shape_[2] + h) * shape_[3] + w)];
  }

  // rank-2 accessor
  T& at2(int64_t r, int64_t c) {
    return data_[static_cast<size_t>(r * shape_[1] + c)];
  }
  const T& at2(int64_t r, int64_t c) const {
    return data_[static_cast<size_t>(r * shape_[1] + c)];
  }

  Tensor reshaped(std::vector<int64_t> shape) const {
    Tensor out(std::move(shape), data_);
    return out;
  }

  bool sameShape(const Tensor& o) const { return shape_ == o.shape_; }

  static Tensor zeros(std::vector<int64_t> shape) {
    return Tensor(std::move(shape));
  }
  static Tensor full(std::vector<int64_t> shape, T v) {
    return Tensor(std::move(shape), v);
  }

 private:
  void validateShape() const {
    for (int64_t d : shape_)
      checkArg(d > 0, "tensor dimensions must be positive");
  }

  std::vector<int64_t> shape_;
  std::vector<T> data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

template <std::floating_point T>
Tensor<T> randUniform(std::vector<int64_t> shape, Rng& rng, double lo = -1.0,
                      double hi = 1.0) {
  Tensor<T> t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i)
    t[i] = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <std::floating_point T>
Tensor<T> randNormal(std::vector<int64_t> shape, Rng& rng, double mean = 0.0,
                     double stddev = 1.0) {
  Tensor<T> t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i)
    t[i] = static_cast<T>(rng.normal(mean, stddev));
  return t;
}

// ---------------------------------------------------------------------------
// elementwise arithmetic (identical shapes, no implicit broadcasting)

template <std::floating_point T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  checkArg(a.sameShape(b), "add: shape mismatch");
  Tensor<T> out = a;
  const T* pb = b.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] += pb[i];
  return out;
}

template <std::floating_point T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  checkArg(a.sameShape(b), "sub: shape mismatch");
  Tensor<T> out = a;
  const T* pb = b.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] -= pb[i];
  return out;
}

template <std::floating_point T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  checkArg(a.sameShape(b), "mul: shape mismatch");
  Tensor<T> out = a;
  const T* pb = b.data();
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] *= pb[i];
  return out;
}

template <std::floating_point T>
Tensor<T> mulScalar(const Tensor<T>& a, T s) {
  Tensor<T> out = a;
  T* po = out.data();
  for (int64_t i = 0; i < out.numel(); ++i) po[i] *= s;
  return out;
}

template <std::floating_point T>
Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) {
  return add(a, b);
}
template <std::floating_point T>
Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) {
  return sub(a, b);
}

template <std::floating_point T>
double sumAll(const Tensor<T>& a) {
  double s = 0;
  for (int64_t i = 0; i < a.numel(); ++i) s += a[i];
  return s;
}

template <std::floating_point T>
double normL2(const Tensor<T>& a) {
  double s = 0;
  for (int64_t i = 0; i < a.numel(); ++i)
    s += static_cast<double>(a[i]) * a[i];
  return std::sqrt(s);
}

template <std::floating_point T>
double maxAbsDiff(const Tensor<T>& a, const Tensor<T>& b) {
  checkArg(a.sameShape(b), "maxAbsDiff: shape mismatch");
  double m = 0;
  for (int64_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::abs(static_cast<double>(a[i]) - b[i]));
  return m;
}

// ---------------------------------------------------------------------------
// matmul: rank-2 only, row-major

template <std::floating_point T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  checkArg(a.rank() == 2 && b.rank() == 2, "matmul: rank-2 tensors required");
  checkArg(a.dim(1) == b.dim(0), "matmul: inner dimensions differ");
  Tensor<T> out({a.dim(0), b.dim(1)});
  detail::gemm(false, false, a.dim(0), b.dim(1), a.dim(1), a.data(), b.data(),
               out.data(), false);
  return out;
}

// y = A x for rank-2 A and rank-1 x
template <std::floating_point T>
Tensor<T> matvec(const Tensor<T>& a, const Tensor<T>& x) {
  checkArg(a.rank() == 2 && x.rank() == 1, "matvec: expected matrix, vector");
  checkArg(a.dim(1) == x.dim(0), "matvec: inner dimensions differ");
  Tensor<T> out({a.dim(0)});
  detail::gemm(false, false, a.dim(0), 1, a.dim(1), a.data(), x.data(),
               out.data(), false);
  return out;
}

// ---------------------------------------------------------------------------
// reductions

// Population mean and std over `axes`; std = sqrt(var + eps). The reduced
// axes are removed from the output shape (a full reduction yields shape {1}).
template <std::floating_point T>
std::pair<Tensor<T>, Tensor<T>> reduceMeanStd(const Tensor<T>& x,
                                              std::vector<int> axes,
                                              double eps) {
  const int r = x.rank();
  std::vector<bool> reduced(static_cast<size_t>(r), false);
  for (int a : axes) {
    checkArg(a >= 0 && a < r, "reduceMeanStd: axis out of range");
    checkArg(!reduced[static_cast<size_t>(a)],
             "reduceMeanStd: duplicate axis");
    reduced[static_cast<size_t>(a)] = true;
  }
  checkArg(!axes.empty(), "reduceMeanStd: empty reduction extent");

  std::vector<int64_t> outShape;
  int64_t redCount = 1;
  for (int i = 0; i < r; ++i) {
    if (reduced[static_cast<size_t>(i)])
      redCount *= x.dim(i);
    else
      outShape.push_back(x.dim(i));
  }
  if (outShape.empty()) outShape.push_back(1);

  Tensor<T> mean(outShape);
  Tensor<T> std_(outShape);

  // strides of x
  std::vector<int64_t> stride(static_cast<size_t>(r), 1);
  for (int i = r - 2; i >= 0; --i)
    stride[static_cast<size_t>(i)] =
        stride[static_cast<size_t>(i + 1)] * x.dim(i + 1);

  // iterate over kept-index space; inner loop over reduced-index space
  std::vector<int> keptAxes, redAxes;
  for (int i = 0; i < r; ++i)
    (reduced[static_cast<size_t>(i)] ? redAxes : keptAxes).push_back(i);

  int64_t outN = mean.numel();
  std::vector<int64_t> keptIdx(keptAxes.size(), 0);
  for (int64_t o = 0; o < outN; ++o) {
    // decode o into kept indices
    int64_t rem = o;
    for (int i = static_cast<int>(keptAxes.size()) - 1; i >= 0; --i) {
      int64_t d = x.dim(keptAxes[static_cast<size_t>(i)]);
      keptIdx[static_cast<size_t>(i)] = rem % d;
      rem /= d;
    }
    int64_t base = 0;
    for (size_t i = 0; i < keptAxes.size(); ++i)
      base += keptIdx[i] * stride[static_cast<size_t>(keptAxes[i])];

    // two-pass mean/variance over the reduced extent
    double sum = 0;
    std::vector<int64_t> redIdx(redAxes.size(), 0);
    for (int64_t q = 0; q < redCount; ++q) {
      int64_t rrem = q, off = base;
      for (int i = static_cast<int>(redAxes.size()) - 1; i >= 0; --i) {
        int64_t d = x.dim(redAxes[static_cast<size_t>(i)]);
        off += (rrem % d) * stride[static_cast<size_t>(redAxes[i])];
        rrem /= d;
      }
      sum += x[off];
    }
    double mu = sum / static_cast<double>(redCount);
    double acc = 0;
    for (int64_t q = 0; q < redCount; ++q) {
      int64_t rrem = q, off = base;
      for (int i = static_cast<int>(redAxes.size()) - 1; i >= 0; --i) {
        int64_t d = x.dim(redAxes[static_cast<size_t>(i)]);
        off += (rrem % d) * stride[static_cast<size_t>(redAxes[i])];
        rrem /= d;
      }
      double dlt = static_cast<double>(x[off]) - mu;
      acc += dlt * dlt;
    }
    double var = acc / static_cast<double>(redCount);
    mean[o] = static_cast<T>(mu);
    std_[o] = static_cast<T>(std::sqrt(var + eps));
  }
  return {std::move(mean), std::move(std_)};
}

// ---------------------------------------------------------------------------
// channel concatenation for (N, C, H, W) maps

template <std::floating_point T>
Tensor<T> concatChannels(const Tensor<T>& a, const Tensor<T>& b) {
  checkArg(a.rank() == 4 && b.rank() == 4, "concatChannels: rank-4 required");
  checkArg(a.dim(0) == b.dim(0) && a.dim(2) == b.dim(2) &&
               a.dim(3) == b.dim(3),
           "concatChannels: N, H, W must match");
  const int64_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1), h = a.dim(2),
                w = a.dim(3);
  Tensor<T> out({n, ca + cb, h, w});
  const int64_t plane = h * w;
  for (int64_t i = 0; i < n; ++i) {
    std::memcpy(out.data() + (i * (ca + cb)) * plane,
                a.data() + i * ca * plane, sizeof(T) * ca * plane);
    std::memcpy(out.data() + (i * (ca + cb) + ca) * plane,
                b.data() + i * cb * plane, sizeof(T) * cb * plane);
  }
  return out;
}

// ---------------------------------------------------------------------------
// unfold / fold

// Unfolded view of a feature map: logically H*W patch vectors of length
// C*kH*kW per batch item, laid out as (N, H, W, C, kH, kW).
template <std::floating_point T>
struct PatchTensor {
  Tensor<T> patches;                    // (N, H, W, C, kH, kW)
  std::array<int64_t, 4> sourceShape{};  // (N, C, H, W)
  std::array<int, 2> kernel{};           // (kH, kW)
  std::array<int, 2> padding{};          // (pH, pW)
};

// Gathers every stride-1 sliding block of the zero-padded input; the output
// spatial grid is exactly H x W.
template <std::floating_point T>
PatchTensor<T> unfold(const Tensor<T>& x, int kH, int kW) {
  checkArg(x.rank() == 4, "unfold: rank-4 input required");
  checkArg(kH >= 1 && kW >= 1 && kH % 2 == 1 && kW % 2 == 1,
           "unfold: kernel sizes must be odd and >= 1");
  const int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int pH = (kH - 1) / 2, pW = (kW - 1) / 2;

  PatchTensor<T> out;
  out.patches = Tensor<T>({n, h, w, c, kH, kW});
  out.sourceShape = {n, c, h, w};
  out.kernel = {kH, kW};
  out.padding = {pH, pW};

  T* dst = out.patches.data();
  for (int64_t in = 0; in < n; ++in)
    for (int64_t i = 0; i < h; ++i)
      for (int64_t j = 0; j < w; ++j)
        for (int64_t ic = 0; ic < c; ++ic) {
          const T* src = x.data() + ((in * c + ic) * h) * w;
          for (int k = 0; k < kH; ++k) {
            int64_t sy = i + k - pH;
            for (int l = 0; l < kW; ++l) {
              int64_t sx = j + l - pW;
              *dst++ = (sy >= 0 && sy < h && sx >= 0 && sx < w)
                           ? src[sy * w + sx]
                           : T(0);
            }
          }
        }
  return out;
}

// Overlap-add inverse of unfold: accumulates every patch entry back to its
// source position and divides by the per-position contribution count.
template <std::floating_point T>
Tensor<T> fold(const PatchTensor<T>& p) {
  const auto& s = p.sourceShape;
  const int64_t n = s[0], c = s[1], h = s[2], w = s[3];
  const int kH = p.kernel[0], kW = p.kernel[1];
  const int pH = p.padding[0], pW = p.padding[1];
  checkArg(p.patches.rank() == 6, "fold: malformed patch tensor");
  checkArg(p.patches.dim(0) == n && p.patches.dim(1) == h &&
               p.patches.dim(2) == w && p.patches.dim(3) == c &&
               p.patches.dim(4) == kH && p.patches.dim(5) == kW,
           "fold: patch shape does not match source metadata");

  Tensor<T> out({n, c, h, w});
  Tensor<T> count({n, c, h, w});
  const T* src = p.patches.data();
  for (int64_t in = 0; in < n; ++in)
    for (int64_t i = 0; i < h; ++i)
      for (int64_t j = 0; j < w; ++j)
        for (int64_t ic = 0; ic < c; ++ic)
          for (int k = 0; k < kH; ++k) {
            int64_t sy = i + k - pH;
            for (int l = 0; l < kW; ++l) {
              int64_t sx = j + l - pW;
              T v = *src++;
              if (sy >= 0 && sy < h && sx >= 0 && sx < w) {
                out.at4(in, ic, sy, sx) += v;
                count.at4(in, ic, sy, sx) += T(1);
              }
            }
          }
  for (int64_t i = 0; i < out.numel(); ++i) out[i] /= count[i];
  return out;
}

}  // namespace stylenorm
