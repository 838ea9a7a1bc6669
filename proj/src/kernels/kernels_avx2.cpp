#include "pomdp/kernels.hpp"

#include <cmath>
#include <immintrin.h>

// AVX2 variants. Lane l of the 256-bit accumulator performs exactly the
// operation sequence of the scalar reference's lane l, so results match
// the scalar kernels bit-for-bit (mul+add only, no FMA, same reduction).

namespace pomdp::kern {
namespace {

double reduce_lanes(__m256d acc, const double* a, const double* b, std::size_t i, std::size_t n) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (std::size_t k = 0; i < n; ++i, ++k) lane[k] += a[i] * b[i];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    return reduce_lanes(acc, a, b, i, n);
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    for (std::size_t k = 0; i < n; ++i, ++k) lane[k] += x[i];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void axpy_avx2(double* y, double alpha, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale_avx2(double* x, double alpha, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
    for (; i < n; ++i) x[i] *= alpha;
}

void emul_avx2(double* dst, const double* a, const double* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    for (; i < n; ++i) dst[i] = a[i] * b[i];
}

double max_abs_avx2(const double* x, std::size_t n) {
    const __m256d signmask = _mm256_set1_pd(-0.0);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_max_pd(acc, _mm256_andnot_pd(signmask, _mm256_loadu_pd(x + i)));
    alignas(32) double lane[4];
    _mm256_store_pd(lane, acc);
    double m = ((lane[0] > lane[1]) ? lane[0] : lane[1]);
    double m2 = ((lane[2] > lane[3]) ? lane[2] : lane[3]);
    if (m2 > m) m = m2;
    for (; i < n; ++i) {
        double v = std::fabs(x[i]);
        if (v > m) m = v;
    }
    return m;
}

std::size_t argmax_avx2(const double* x, std::size_t n) {
    if (n < 8) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (x[i] > x[best]) best = i;
        return best;
    }
    // Pass 1: the maximum value (max is exact, order-independent).
    __m256d vmax = _mm256_loadu_pd(x);
    std::size_t i = 4;
    for (; i + 4 <= n; i += 4) vmax = _mm256_max_pd(vmax, _mm256_loadu_pd(x + i));
    alignas(32) double lane[4];
    _mm256_store_pd(lane, vmax);
    double m = lane[0];
    for (int k = 1; k < 4; ++k)
        if (lane[k] > m) m = lane[k];
    for (std::size_t j = i; j < n; ++j)
        if (x[j] > m) m = x[j];
    // Pass 2: first position equal to the maximum.
    const __m256d vm = _mm256_set1_pd(m);
    for (std::size_t j = 0; j + 4 <= n; j += 4) {
        int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(x + j), vm, _CMP_EQ_OQ));
        if (mask) return j + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
    }
    for (std::size_t j = n - (n % 4); j < n; ++j)
        if (x[j] == m) return j;
    return 0;  // unreachable for finite input
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops{"avx2",    dot_avx2,     sum_avx2,    axpy_avx2,
                         scale_avx2, emul_avx2, max_abs_avx2, argmax_avx2};
    return ops;
}

}  // namespace pomdp::kern
