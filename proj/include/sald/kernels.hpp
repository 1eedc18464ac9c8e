#pragma once

// Dense double-precision kernels behind the network's batched passes.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2/FMA variant. The active table is picked once at first use from the
// CPU features; the SALD_SIMD environment variable ("scalar" or "avx2")
// forces a choice. All matrices are row-major with explicit leading
// dimensions. The variants agree to rounding, not bitwise: summation order
// differs between them, while each variant on its own is deterministic.

#include <cstddef>
#include <string_view>

namespace sald::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  Isa isa;

  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  /// y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

  /// C[m,n] = sum_k A[m,k] * B[n,k]   (C is overwritten)
  /// A: M x K (lda), B: N x K (ldb), C: M x N (ldc)
  void (*gemm_nt)(std::size_t M, std::size_t N, std::size_t K,
                  const double* A, std::size_t lda,
                  const double* B, std::size_t ldb,
                  double* C, std::size_t ldc);

  /// C[m,n] = sum_k A[m,k] * B[k,n]   (C is overwritten)
  /// A: M x K (lda), B: K x N (ldb), C: M x N (ldc)
  void (*gemm_nn)(std::size_t M, std::size_t N, std::size_t K,
                  const double* A, std::size_t lda,
                  const double* B, std::size_t ldb,
                  double* C, std::size_t ldc);

  /// C[m,n] += sum_k A[k,m] * B[k,n], with k summed in increasing order
  /// A: K x M (lda), B: K x N (ldb), C: M x N (ldc)
  void (*gemm_tn_acc)(std::size_t M, std::size_t N, std::size_t K,
                      const double* A, std::size_t lda,
                      const double* B, std::size_t ldb,
                      double* C, std::size_t ldc);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variants were not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table();

/// The table used by the library. Resolved once; thread-safe.
const KernelTable& active();

std::string_view isa_name(Isa isa);

}  // namespace sald::kernels
