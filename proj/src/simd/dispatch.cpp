#include "bvlab/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace bvlab::simd {

namespace {

bool detect_avx2() {
#if defined(BVLAB_WITH_AVX2) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

bool select_avx2() {
    const char* env = std::getenv("BVLAB_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return false;
        if (std::strcmp(env, "avx2") == 0) {
            if (!detect_avx2()) throw std::runtime_error("BVLAB_SIMD=avx2 requested but CPU/build lacks AVX2+FMA");
            return true;
        }
        throw std::runtime_error(std::string("unknown BVLAB_SIMD value: ") + env);
    }
    return detect_avx2();
}

// Decided once; every call afterwards takes the same code path so results
// are reproducible within a process and across runs on one machine.
const bool kUseAvx2 = select_avx2();

}  // namespace

bool avx2_selected() { return kUseAvx2; }
const char* active_isa() { return kUseAvx2 ? "avx2" : "scalar"; }

#if defined(BVLAB_WITH_AVX2)
#define BVLAB_DISPATCH(fn, ...) \
    do { \
        if (kUseAvx2) return avx2::fn(__VA_ARGS__); \
        return scalar::fn(__VA_ARGS__); \
    } while (0)
#else
#define BVLAB_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void add(const double* a, const double* b, double* out, std::size_t n) { BVLAB_DISPATCH(add, a, b, out, n); }
void sub(const double* a, const double* b, double* out, std::size_t n) { BVLAB_DISPATCH(sub, a, b, out, n); }
void mul(const double* a, const double* b, double* out, std::size_t n) { BVLAB_DISPATCH(mul, a, b, out, n); }
void scale(const double* a, double s, double* out, std::size_t n) { BVLAB_DISPATCH(scale, a, s, out, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { BVLAB_DISPATCH(axpy, a, x, y, n); }
double dot(const double* a, const double* b, std::size_t n) { BVLAB_DISPATCH(dot, a, b, n); }
double sum(const double* a, std::size_t n) { BVLAB_DISPATCH(sum, a, n); }
double sum_sq(const double* a, std::size_t n) { BVLAB_DISPATCH(sum_sq, a, n); }
void rot(double* x, double* y, std::size_t n, double c, double s) { BVLAB_DISPATCH(rot, x, y, n, c, s); }
void gemm(const GemmArgs& args) { BVLAB_DISPATCH(gemm, args); }

#undef BVLAB_DISPATCH

}  // namespace bvlab::simd
