#include "stylenorm/normalizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace stylenorm {

TensorD channelCovariance(const TensorD& x, double shrink) {
  checkArg(x.rank() == 4, "channelCovariance: rank-4 input required");
  checkArg(x.dim(0) == 1, "channelCovariance: per-sample use requires N=1");
  const int64_t c = x.dim(1), hw = x.dim(2) * x.dim(3);

  // center rows of the C x (HW) matrix
  TensorD xc({c, hw});
  for (int64_t i = 0; i < c; ++i) {
    const double* row = x.data() + i * hw;
    double mu = 0;
    for (int64_t q = 0; q < hw; ++q) mu += row[q];
    mu /= static_cast<double>(hw);
    double* dst = xc.data() + i * hw;
    for (int64_t q = 0; q < hw; ++q) dst[q] = row[q] - mu;
  }

  TensorD cov({c, c});
  detail::gemm(false, true, c, c, hw, xc.data(), xc.data(), cov.data(),
               false);
  const double inv = 1.0 / static_cast<double>(hw);
  for (int64_t i = 0; i < c; ++i)
    for (int64_t j = 0; j < c; ++j) {
      cov.at2(i, j) *= inv;
      if (i == j) cov.at2(i, j) += shrink;
    }
  return cov;
}

EigenPair symmetricEigen(const TensorD& a) {
  checkArg(a.rank() == 2 && a.dim(0) == a.dim(1),
           "symmetricEigen: square matrix required");
  const int64_t n = a.dim(0);
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = i + 1; j < n; ++j)
      checkArg(std::abs(a.at2(i, j) - a.at2(j, i)) <= 1e-10,
               "symmetricEigen: matrix asymmetric beyond 1e-10");

  TensorD m({n, n});
  for (int64_t i = 0; i < n; ++i)
    for (int64_t j = 0; j < n; ++j)
      m.at2(i, j) = 0.5 * (a.at2(i, j) + a.at2(j, i));

  TensorD v({n, n});
  for (int64_t i = 0; i < n; ++i) v.at2(i, i) = 1.0;

  constexpr int kMaxSweeps = 100;
  constexpr double kOffTol = 1e-12;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0;
    for (int64_t p = 0; p < n; ++p)
      for (int64_t q = p + 1; q < n; ++q)
        off = std::max(off, std::abs(m.at2(p, q)));
    if (off < kOffTol) break;

    for (int64_t p = 0; p < n - 1; ++p)
      for (int64_t q = p + 1; q < n; ++q) {
        double apq = m.at2(p, q);
        if (std::abs(apq) < kOffTol) continue;
        double theta = (m.at2(q, q) - m.at2(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double cs = 1.0 / std::sqrt(t * t + 1.0);
        double sn = t * cs;

        for (int64_t k = 0; k < n; ++k) {
          double mkp = m.at2(k, p), mkq = m.at2(k, q);
          m.at2(k, p) = cs * mkp - sn * mkq;
          m.at2(k, q) = sn * mkp + cs * mkq;
        }
        for (int64_t k = 0; k < n; ++k) {
          double mpk = m.at2(p, k), mqk = m.at2(q, k);
          m.at2(p, k) = cs * mpk - sn * mqk;
          m.at2(q, k) = sn * mpk + cs * mqk;
        }
        for (int64_t k = 0; k < n; ++k) {
          double vkp = v.at2(k, p), vkq = v.at2(k, q);
          v.at2(k, p) = cs * vkp - sn * vkq;
          v.at2(k, q) = sn * vkp + cs * vkq;
        }
      }
  }

  std::vector<int64_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int64_t x, int64_t y) {
    return m.at2(x, x) > m.at2(y, y);
  });

  EigenPair out;
  out.q = TensorD({n, n});
  out.lambda = TensorD({n});
  for (int64_t j = 0; j < n; ++j) {
    int64_t src = order[static_cast<size_t>(j)];
    out.lambda[j] = std::max(m.at2(src, src), 0.0);
    // sign convention: first nonzero component positive
    double sign = 1.0;
    for (int64_t i = 0; i < n; ++i) {
      double vi = v.at2(i, src);
      if (std::abs(vi) > 1e-12) {
        sign = vi > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int64_t i = 0; i < n; ++i) out.q.at2(i, j) = sign * v.at2(i, src);
  }
  return out;
}

TensorD whiten(const TensorD& c, const EigenPair& eig, double eps) {
  checkArg(c.rank() == 4 && c.dim(0) == 1, "whiten: (1,C,H,W) input required");
  const int64_t ch = c.dim(1), h = c.dim(2), w = c.dim(3), hw = h * w;
  checkArg(eig.q.rank() == 2 && eig.q.dim(0) == ch && eig.q.dim(1) == ch,
           "whiten: eigenpair dimension mismatch");

  // M = Q diag(1/sqrt(max(lambda, eps))) Q^T
  TensorD qs({ch, ch});
  for (int64_t i = 0; i < ch; ++i)
    for (int64_t j = 0; j < ch; ++j)
      qs.at2(i, j) =
          eig.q.at2(i, j) / std::sqrt(std::max(eig.lambda[j], eps));
  TensorD m({ch, ch});
  detail::gemm(false, true, ch, ch, ch, qs.data(), eig.q.data(), m.data(),
               false);

  // center channels, then apply M as a 1x1 transform over the pixel grid
  TensorD xc({ch, hw});
  for (int64_t i = 0; i < ch; ++i) {
    const double* row = c.data() + i * hw;
    double mu = 0;
    for (int64_t q = 0; q < hw; ++q) mu += row[q];
    mu /= static_cast<double>(hw);
    double* dst = xc.data() + i * hw;
    for (int64_t q = 0; q < hw; ++q) dst[q] = row[q] - mu;
  }
  TensorD y({ch, hw});
  detail::gemm(false, false, ch, hw, ch, m.data(), xc.data(), y.data(),
               false);
  return y.reshaped({1, ch, h, w});
}

}  // namespace stylenorm
