#include "sald/kernels.hpp"

namespace sald::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemm_nt_scalar(std::size_t M, std::size_t N, std::size_t K,
                    const double* A, std::size_t lda,
                    const double* B, std::size_t ldb,
                    double* C, std::size_t ldc) {
  for (std::size_t m = 0; m < M; ++m) {
    const double* a = A + m * lda;
    double* c = C + m * ldc;
    for (std::size_t n = 0; n < N; ++n) c[n] = dot_scalar(a, B + n * ldb, K);
  }
}

void gemm_nn_scalar(std::size_t M, std::size_t N, std::size_t K,
                    const double* A, std::size_t lda,
                    const double* B, std::size_t ldb,
                    double* C, std::size_t ldc) {
  for (std::size_t m = 0; m < M; ++m) {
    double* c = C + m * ldc;
    for (std::size_t n = 0; n < N; ++n) c[n] = 0.0;
    const double* a = A + m * lda;
    for (std::size_t k = 0; k < K; ++k) {
      if (a[k] != 0.0) axpy_scalar(a[k], B + k * ldb, c, N);
    }
  }
}

void gemm_tn_acc_scalar(std::size_t M, std::size_t N, std::size_t K,
                        const double* A, std::size_t lda,
                        const double* B, std::size_t ldb,
                        double* C, std::size_t ldc) {
  for (std::size_t k = 0; k < K; ++k) {
    const double* a = A + k * lda;
    const double* b = B + k * ldb;
    for (std::size_t m = 0; m < M; ++m) {
      if (a[m] != 0.0) axpy_scalar(a[m], b, C + m * ldc, N);
    }
  }
}

const KernelTable kScalar{
    Isa::Scalar, dot_scalar, axpy_scalar, gemm_nt_scalar, gemm_nn_scalar, gemm_tn_acc_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace sald::kernels
