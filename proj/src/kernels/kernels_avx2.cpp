// AVX2 + FMA variants. This translation unit is the only one compiled with
// -mavx2 -mfma; nothing here runs unless dispatch confirmed CPU support.

#include <immintrin.h>

#include "sald/kernels.hpp"

namespace sald::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd();
  __m256d s3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
    s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), s2);
    s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), s3);
  }
  for (; i + 4 <= n; i += 4) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  }
  double s = hsum(_mm256_add_pd(_mm256_add_pd(s0, s1), _mm256_add_pd(s2, s3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// 2 rows of A against 4 rows of B.
inline void nt_block_2x4(std::size_t K, const double* a0, const double* a1,
                         const double* b0, const double* b1, const double* b2,
                         const double* b3, double* c0, double* c1) {
  __m256d s00 = _mm256_setzero_pd(), s01 = _mm256_setzero_pd();
  __m256d s02 = _mm256_setzero_pd(), s03 = _mm256_setzero_pd();
  __m256d s10 = _mm256_setzero_pd(), s11 = _mm256_setzero_pd();
  __m256d s12 = _mm256_setzero_pd(), s13 = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= K; k += 4) {
    const __m256d x0 = _mm256_loadu_pd(a0 + k);
    const __m256d x1 = _mm256_loadu_pd(a1 + k);
    __m256d w = _mm256_loadu_pd(b0 + k);
    s00 = _mm256_fmadd_pd(x0, w, s00);
    s10 = _mm256_fmadd_pd(x1, w, s10);
    w = _mm256_loadu_pd(b1 + k);
    s01 = _mm256_fmadd_pd(x0, w, s01);
    s11 = _mm256_fmadd_pd(x1, w, s11);
    w = _mm256_loadu_pd(b2 + k);
    s02 = _mm256_fmadd_pd(x0, w, s02);
    s12 = _mm256_fmadd_pd(x1, w, s12);
    w = _mm256_loadu_pd(b3 + k);
    s03 = _mm256_fmadd_pd(x0, w, s03);
    s13 = _mm256_fmadd_pd(x1, w, s13);
  }
  double r0[4] = {hsum(s00), hsum(s01), hsum(s02), hsum(s03)};
  double r1[4] = {hsum(s10), hsum(s11), hsum(s12), hsum(s13)};
  for (; k < K; ++k) {
    r0[0] += a0[k] * b0[k]; r0[1] += a0[k] * b1[k]; r0[2] += a0[k] * b2[k]; r0[3] += a0[k] * b3[k];
    r1[0] += a1[k] * b0[k]; r1[1] += a1[k] * b1[k]; r1[2] += a1[k] * b2[k]; r1[3] += a1[k] * b3[k];
  }
  for (int j = 0; j < 4; ++j) {
    c0[j] = r0[j];
    c1[j] = r1[j];
  }
}

void gemm_nt_avx2(std::size_t M, std::size_t N, std::size_t K,
                  const double* A, std::size_t lda,
                  const double* B, std::size_t ldb,
                  double* C, std::size_t ldc) {
  std::size_t m = 0;
  for (; m + 2 <= M; m += 2) {
    const double* a0 = A + m * lda;
    const double* a1 = a0 + lda;
    double* c0 = C + m * ldc;
    double* c1 = c0 + ldc;
    std::size_t n = 0;
    for (; n + 4 <= N; n += 4) {
      const double* b = B + n * ldb;
      nt_block_2x4(K, a0, a1, b, b + ldb, b + 2 * ldb, b + 3 * ldb, c0 + n, c1 + n);
    }
    for (; n < N; ++n) {
      c0[n] = dot_avx2(a0, B + n * ldb, K);
      c1[n] = dot_avx2(a1, B + n * ldb, K);
    }
  }
  for (; m < M; ++m) {
    const double* a = A + m * lda;
    double* c = C + m * ldc;
    for (std::size_t n = 0; n < N; ++n) c[n] = dot_avx2(a, B + n * ldb, K);
  }
}

void gemm_nn_avx2(std::size_t M, std::size_t N, std::size_t K,
                  const double* A, std::size_t lda,
                  const double* B, std::size_t ldb,
                  double* C, std::size_t ldc) {
  std::size_t m = 0;
  for (; m + 2 <= M; m += 2) {
    const double* a0 = A + m * lda;
    const double* a1 = a0 + lda;
    double* c0 = C + m * ldc;
    double* c1 = c0 + ldc;
    std::size_t n = 0;
    for (; n + 16 <= N; n += 16) {
      __m256d u0 = _mm256_setzero_pd(), u1 = _mm256_setzero_pd();
      __m256d u2 = _mm256_setzero_pd(), u3 = _mm256_setzero_pd();
      __m256d v0 = _mm256_setzero_pd(), v1 = _mm256_setzero_pd();
      __m256d v2 = _mm256_setzero_pd(), v3 = _mm256_setzero_pd();
      for (std::size_t k = 0; k < K; ++k) {
        const double* b = B + k * ldb + n;
        const __m256d x0 = _mm256_set1_pd(a0[k]);
        const __m256d x1 = _mm256_set1_pd(a1[k]);
        const __m256d w0 = _mm256_loadu_pd(b);
        const __m256d w1 = _mm256_loadu_pd(b + 4);
        const __m256d w2 = _mm256_loadu_pd(b + 8);
        const __m256d w3 = _mm256_loadu_pd(b + 12);
        u0 = _mm256_fmadd_pd(x0, w0, u0);
        u1 = _mm256_fmadd_pd(x0, w1, u1);
        u2 = _mm256_fmadd_pd(x0, w2, u2);
        u3 = _mm256_fmadd_pd(x0, w3, u3);
        v0 = _mm256_fmadd_pd(x1, w0, v0);
        v1 = _mm256_fmadd_pd(x1, w1, v1);
        v2 = _mm256_fmadd_pd(x1, w2, v2);
        v3 = _mm256_fmadd_pd(x1, w3, v3);
      }
      _mm256_storeu_pd(c0 + n, u0);
      _mm256_storeu_pd(c0 + n + 4, u1);
      _mm256_storeu_pd(c0 + n + 8, u2);
      _mm256_storeu_pd(c0 + n + 12, u3);
      _mm256_storeu_pd(c1 + n, v0);
      _mm256_storeu_pd(c1 + n + 4, v1);
      _mm256_storeu_pd(c1 + n + 8, v2);
      _mm256_storeu_pd(c1 + n + 12, v3);
    }
    for (; n + 4 <= N; n += 4) {
      __m256d u = _mm256_setzero_pd(), v = _mm256_setzero_pd();
      for (std::size_t k = 0; k < K; ++k) {
        const __m256d w = _mm256_loadu_pd(B + k * ldb + n);
        u = _mm256_fmadd_pd(_mm256_set1_pd(a0[k]), w, u);
        v = _mm256_fmadd_pd(_mm256_set1_pd(a1[k]), w, v);
      }
      _mm256_storeu_pd(c0 + n, u);
      _mm256_storeu_pd(c1 + n, v);
    }
    for (; n < N; ++n) {
      double u = 0.0, v = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        u += a0[k] * B[k * ldb + n];
        v += a1[k] * B[k * ldb + n];
      }
      c0[n] = u;
      c1[n] = v;
    }
  }
  for (; m < M; ++m) {
    const double* a = A + m * lda;
    double* c = C + m * ldc;
    for (std::size_t n = 0; n < N; ++n) c[n] = 0.0;
    for (std::size_t k = 0; k < K; ++k) axpy_avx2(a[k], B + k * ldb, c, N);
  }
}

void gemm_tn_acc_avx2(std::size_t M, std::size_t N, std::size_t K,
                      const double* A, std::size_t lda,
                      const double* B, std::size_t ldb,
                      double* C, std::size_t ldc) {
  std::size_t m = 0;
  for (; m + 4 <= M; m += 4) {
    double* c0 = C + m * ldc;
    double* c1 = c0 + ldc;
    double* c2 = c1 + ldc;
    double* c3 = c2 + ldc;
    std::size_t n = 0;
    for (; n + 8 <= N; n += 8) {
      __m256d s00 = _mm256_loadu_pd(c0 + n), s01 = _mm256_loadu_pd(c0 + n + 4);
      __m256d s10 = _mm256_loadu_pd(c1 + n), s11 = _mm256_loadu_pd(c1 + n + 4);
      __m256d s20 = _mm256_loadu_pd(c2 + n), s21 = _mm256_loadu_pd(c2 + n + 4);
      __m256d s30 = _mm256_loadu_pd(c3 + n), s31 = _mm256_loadu_pd(c3 + n + 4);
      for (std::size_t k = 0; k < K; ++k) {
        const double* a = A + k * lda + m;
        const double* b = B + k * ldb + n;
        const __m256d w0 = _mm256_loadu_pd(b);
        const __m256d w1 = _mm256_loadu_pd(b + 4);
        __m256d x = _mm256_set1_pd(a[0]);
        s00 = _mm256_fmadd_pd(x, w0, s00);
        s01 = _mm256_fmadd_pd(x, w1, s01);
        x = _mm256_set1_pd(a[1]);
        s10 = _mm256_fmadd_pd(x, w0, s10);
        s11 = _mm256_fmadd_pd(x, w1, s11);
        x = _mm256_set1_pd(a[2]);
        s20 = _mm256_fmadd_pd(x, w0, s20);
        s21 = _mm256_fmadd_pd(x, w1, s21);
        x = _mm256_set1_pd(a[3]);
        s30 = _mm256_fmadd_pd(x, w0, s30);
        s31 = _mm256_fmadd_pd(x, w1, s31);
      }
      _mm256_storeu_pd(c0 + n, s00); _mm256_storeu_pd(c0 + n + 4, s01);
      _mm256_storeu_pd(c1 + n, s10); _mm256_storeu_pd(c1 + n + 4, s11);
      _mm256_storeu_pd(c2 + n, s20); _mm256_storeu_pd(c2 + n + 4, s21);
      _mm256_storeu_pd(c3 + n, s30); _mm256_storeu_pd(c3 + n + 4, s31);
    }
    for (; n < N; ++n) {
      double s0 = c0[n], s1 = c1[n], s2 = c2[n], s3 = c3[n];
      for (std::size_t k = 0; k < K; ++k) {
        const double* a = A + k * lda + m;
        const double b = B[k * ldb + n];
        s0 += a[0] * b;
        s1 += a[1] * b;
        s2 += a[2] * b;
        s3 += a[3] * b;
      }
      c0[n] = s0; c1[n] = s1; c2[n] = s2; c3[n] = s3;
    }
  }
  for (; m < M; ++m) {
    double* c = C + m * ldc;
    for (std::size_t k = 0; k < K; ++k) {
      const double a = A[k * lda + m];
      if (a != 0.0) axpy_avx2(a, B + k * ldb, c, N);
    }
  }
}

const KernelTable kAvx2{
    Isa::Avx2, dot_avx2, axpy_avx2, gemm_nt_avx2, gemm_nn_avx2, gemm_tn_acc_avx2,
};

}  // namespace

const KernelTable& avx2_table_unchecked() { return kAvx2; }

}  // namespace sald::kernels
