#include <cstdint>
#include <mutex>

#include "stylenorm/tensor.hpp"

#ifdef STYLENORM_USE_BLAS
#include <cblas.h>
#endif

namespace stylenorm::detail {

namespace {

#ifdef STYLENORM_USE_BLAS
// Reductions must stay single-threaded so that repeated runs of the same
// binary are bitwise identical.
void pinThreads() {
  static std::once_flag once;
  std::call_once(once, [] {
#ifdef OPENBLAS_VERSION
    openblas_set_num_threads(1);
#endif
  });
}
#endif

template <typename T>
void gemmLoops(bool transA, bool transB, int64_t m, int64_t n, int64_t k,
               const T* a, const T* b, T* c, bool accumulate) {
  if (!accumulate)
    for (int64_t i = 0; i < m * n; ++i) c[i] = T(0);
  // op(A)(i,p): stored buffer is (m x k) or, transposed, (k x m)
  auto av = [&](int64_t i, int64_t p) { return transA ? a[p * m + i] : a[i * k + p]; };
  auto bv = [&](int64_t p, int64_t j) { return transB ? b[j * k + p] : b[p * n + j]; };
  for (int64_t i = 0; i < m; ++i)
    for (int64_t p = 0; p < k; ++p) {
      T aip = av(i, p);
      T* crow = c + i * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += aip * bv(p, j);
    }
}

}  // namespace

void gemm(bool transA, bool transB, int64_t m, int64_t n, int64_t k,
          const float* a, const float* b, float* c, bool accumulate) {
#ifdef STYLENORM_USE_BLAS
  pinThreads();
  cblas_sgemm(CblasRowMajor, transA ? CblasTrans : CblasNoTrans,
              transB ? CblasTrans : CblasNoTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), 1.0f, a,
              static_cast<int>(transA ? m : k), b,
              static_cast<int>(transB ? k : n), accumulate ? 1.0f : 0.0f, c,
              static_cast<int>(n));
#else
  gemmLoops(transA, transB, m, n, k, a, b, c, accumulate);
#endif
}

void gemm(bool transA, bool transB, int64_t m, int64_t n, int64_t k,
          const double* a, const double* b, double* c, bool accumulate) {
#ifdef STYLENORM_USE_BLAS
  pinThreads();
  cblas_dgemm(CblasRowMajor, transA ? CblasTrans : CblasNoTrans,
              transB ? CblasTrans : CblasNoTrans, static_cast<int>(m),
              static_cast<int>(n), static_cast<int>(k), 1.0, a,
              static_cast<int>(transA ? m : k), b,
              static_cast<int>(transB ? k : n), accumulate ? 1.0 : 0.0, c,
              static_cast<int>(n));
#else
  gemmLoops(transA, transB, m, n, k, a, b, c, accumulate);
#endif
}

}  // namespace stylenorm::detail
