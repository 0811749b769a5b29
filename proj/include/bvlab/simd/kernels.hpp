#pragma once

#include <cstddef>

// Data-parallel inner kernels. Every kernel has a scalar reference
// implementation; on x86 with AVX2+FMA an accelerated variant is selected at
// runtime (override with BVLAB_SIMD=scalar|avx2). The two variants are
// equivalence-tested against each other in tests/test_simd.cpp.
//
// gemm follows BLAS dgemm semantics on row-major data:
//   C = alpha * op(A) * op(B) + beta * C
// with op(X) = X or X^T per the trans flags; ld* are row strides.

namespace bvlab::simd {

struct GemmArgs {
    bool trans_a = false;
    bool trans_b = false;
    std::size_t m = 0, n = 0, k = 0;
    double alpha = 1.0;
    const double* a = nullptr;
    std::size_t lda = 0;
    const double* b = nullptr;
    std::size_t ldb = 0;
    double beta = 0.0;
    double* c = nullptr;
    std::size_t ldc = 0;
};

namespace scalar {
void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(const double* a, double s, double* out, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
// Plane rotation of two rows: x' = c*x + s*y, y' = c*y - s*x.
void rot(double* x, double* y, std::size_t n, double c, double s);
void gemm(const GemmArgs& args);
}  // namespace scalar

#if defined(BVLAB_WITH_AVX2)
namespace avx2 {
void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(const double* a, double s, double* out, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
void rot(double* x, double* y, std::size_t n, double c, double s);
void gemm(const GemmArgs& args);
}  // namespace avx2
#endif

// Name of the kernel set in use: "scalar" or "avx2".
const char* active_isa();
bool avx2_selected();

// Dispatched entry points.
void add(const double* a, const double* b, double* out, std::size_t n);
void sub(const double* a, const double* b, double* out, std::size_t n);
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(const double* a, double s, double* out, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
void rot(double* x, double* y, std::size_t n, double c, double s);
void gemm(const GemmArgs& args);

// Convenience wrapper for the common row-major case.
inline void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
                 double alpha, const double* a, std::size_t lda, const double* b, std::size_t ldb,
                 double beta, double* c, std::size_t ldc) {
    GemmArgs args;
    args.trans_a = trans_a;
    args.trans_b = trans_b;
    args.m = m;
    args.n = n;
    args.k = k;
    args.alpha = alpha;
    args.a = a;
    args.lda = lda;
    args.b = b;
    args.ldb = ldb;
    args.beta = beta;
    args.c = c;
    args.ldc = ldc;
    gemm(args);
}

}  // namespace bvlab::simd
