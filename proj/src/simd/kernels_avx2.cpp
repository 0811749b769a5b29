#include "bvlab/simd/kernels.hpp"

#if defined(BVLAB_WITH_AVX2)

#include <immintrin.h>

#include <algorithm>
#include <cstring>
#include <vector>

namespace bvlab::simd::avx2 {

void add(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] + b[i];
}

void sub(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] - b[i];
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void scale(const double* a, double s, double* out, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), vs));
    }
    for (; i < n; ++i) out[i] = a[i] * s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

static inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    double res = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) res += a[i] * b[i];
    return res;
}

double sum(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double res = hsum(acc);
    for (; i < n; ++i) res += a[i];
    return res;
}

double sum_sq(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d v = _mm256_loadu_pd(a + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double res = hsum(acc);
    for (; i < n; ++i) res += a[i] * a[i];
    return res;
}

void rot(double* x, double* y, std::size_t n, double c, double s) {
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(x + i, _mm256_fmadd_pd(vc, vx, _mm256_mul_pd(vs, vy)));
        _mm256_storeu_pd(y + i, _mm256_fmsub_pd(vc, vy, _mm256_mul_pd(vs, vx)));
    }
    for (; i < n; ++i) {
        const double xi = x[i];
        const double yi = y[i];
        x[i] = c * xi + s * yi;
        y[i] = c * yi - s * xi;
    }
}

// ---------------------------------------------------------------------------
// Packed-panel GEMM, 6x8 FMA micro-kernel (12 ymm accumulators).
// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t MR = 6;
constexpr std::size_t NR = 8;
constexpr std::size_t KC = 256;
constexpr std::size_t MC = 132;   // multiple of MR
constexpr std::size_t NC = 2048;  // multiple of NR

// a_panel: KC steps of MR values (rows i..i+MR of op(A), zero-padded).
// b_panel: KC steps of NR values (cols j..j+NR of op(B), zero-padded).
void micro_kernel(std::size_t kc, const double* ap, const double* bp, double* c, std::size_t ldc) {
    __m256d acc[MR][2];
    for (std::size_t r = 0; r < MR; ++r) {
        acc[r][0] = _mm256_setzero_pd();
        acc[r][1] = _mm256_setzero_pd();
    }
    for (std::size_t p = 0; p < kc; ++p) {
        const __m256d b0 = _mm256_loadu_pd(bp + p * NR);
        const __m256d b1 = _mm256_loadu_pd(bp + p * NR + 4);
        const double* arow = ap + p * MR;
        for (std::size_t r = 0; r < MR; ++r) {
            const __m256d av = _mm256_set1_pd(arow[r]);
            acc[r][0] = _mm256_fmadd_pd(av, b0, acc[r][0]);
            acc[r][1] = _mm256_fmadd_pd(av, b1, acc[r][1]);
        }
    }
    for (std::size_t r = 0; r < MR; ++r) {
        double* crow = c + r * ldc;
        _mm256_storeu_pd(crow, _mm256_add_pd(_mm256_loadu_pd(crow), acc[r][0]));
        _mm256_storeu_pd(crow + 4, _mm256_add_pd(_mm256_loadu_pd(crow + 4), acc[r][1]));
    }
}

// Edge tiles accumulate through a dense MRxNR scratch block.
void micro_kernel_edge(std::size_t kc, const double* ap, const double* bp, double* c,
                       std::size_t ldc, std::size_t mr, std::size_t nr) {
    double scratch[MR * NR];
    std::memset(scratch, 0, sizeof(scratch));
    micro_kernel(kc, ap, bp, scratch, NR);
    for (std::size_t r = 0; r < mr; ++r) {
        for (std::size_t j = 0; j < nr; ++j) c[r * ldc + j] += scratch[r * NR + j];
    }
}

inline double load_a(const GemmArgs& g, std::size_t i, std::size_t p) {
    return g.trans_a ? g.a[p * g.lda + i] : g.a[i * g.lda + p];
}

inline double load_b(const GemmArgs& g, std::size_t p, std::size_t j) {
    return g.trans_b ? g.b[j * g.ldb + p] : g.b[p * g.ldb + j];
}

void pack_a(const GemmArgs& g, std::size_t i0, std::size_t mc, std::size_t p0, std::size_t kc,
            double* panel) {
    // Layout: for each MR strip, kc steps of MR values; alpha folded in here.
    for (std::size_t ir = 0; ir < mc; ir += MR) {
        const std::size_t mr = std::min(MR, mc - ir);
        double* dst = panel + ir * kc;
        if (!g.trans_a && mr == MR) {
            const double* base = g.a + (i0 + ir) * g.lda + p0;
            for (std::size_t p = 0; p < kc; ++p) {
                for (std::size_t r = 0; r < MR; ++r) dst[p * MR + r] = g.alpha * base[r * g.lda + p];
            }
        } else {
            for (std::size_t p = 0; p < kc; ++p) {
                for (std::size_t r = 0; r < MR; ++r) {
                    dst[p * MR + r] =
                        r < mr ? g.alpha * load_a(g, i0 + ir + r, p0 + p) : 0.0;
                }
            }
        }
    }
}

void pack_b(const GemmArgs& g, std::size_t p0, std::size_t kc, std::size_t j0, std::size_t nc,
            double* panel) {
    for (std::size_t jr = 0; jr < nc; jr += NR) {
        const std::size_t nr = std::min(NR, nc - jr);
        double* dst = panel + jr * kc;
        if (!g.trans_b && nr == NR) {
            const double* base = g.b + p0 * g.ldb + (j0 + jr);
            for (std::size_t p = 0; p < kc; ++p) {
                _mm256_storeu_pd(dst + p * NR, _mm256_loadu_pd(base + p * g.ldb));
                _mm256_storeu_pd(dst + p * NR + 4, _mm256_loadu_pd(base + p * g.ldb + 4));
            }
        } else {
            for (std::size_t p = 0; p < kc; ++p) {
                for (std::size_t j = 0; j < NR; ++j) {
                    dst[p * NR + j] = j < nr ? load_b(g, p0 + p, j0 + jr + j) : 0.0;
                }
            }
        }
    }
}

}  // namespace

void gemm(const GemmArgs& g) {
    if (g.m == 0 || g.n == 0) return;
    for (std::size_t i = 0; i < g.m; ++i) {
        double* crow = g.c + i * g.ldc;
        if (g.beta == 0.0) {
            std::memset(crow, 0, g.n * sizeof(double));
        } else if (g.beta != 1.0) {
            scale(crow, g.beta, crow, g.n);
        }
    }
    if (g.k == 0 || g.alpha == 0.0) return;

    thread_local std::vector<double> a_panel;
    thread_local std::vector<double> b_panel;
    a_panel.resize(MC * KC);
    b_panel.resize(KC * NC);

    for (std::size_t j0 = 0; j0 < g.n; j0 += NC) {
        const std::size_t nc = std::min(NC, g.n - j0);
        for (std::size_t p0 = 0; p0 < g.k; p0 += KC) {
            const std::size_t kc = std::min(KC, g.k - p0);
            pack_b(g, p0, kc, j0, nc, b_panel.data());
            for (std::size_t i0 = 0; i0 < g.m; i0 += MC) {
                const std::size_t mc = std::min(MC, g.m - i0);
                pack_a(g, i0, mc, p0, kc, a_panel.data());
                for (std::size_t jr = 0; jr < nc; jr += NR) {
                    const std::size_t nr = std::min(NR, nc - jr);
                    const double* bp = b_panel.data() + jr * kc;
                    for (std::size_t ir = 0; ir < mc; ir += MR) {
                        const std::size_t mr = std::min(MR, mc - ir);
                        const double* ap = a_panel.data() + ir * kc;
                        double* ctile = g.c + (i0 + ir) * g.ldc + (j0 + jr);
                        if (mr == MR && nr == NR) {
                            micro_kernel(kc, ap, bp, ctile, g.ldc);
                        } else {
                            micro_kernel_edge(kc, ap, bp, ctile, g.ldc, mr, nr);
                        }
                    }
                }
            }
        }
    }
}

}  // namespace bvlab::simd::avx2

#endif  // BVLAB_WITH_AVX2
