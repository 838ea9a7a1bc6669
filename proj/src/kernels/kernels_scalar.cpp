#include "pomdp/kernels.hpp"

#include <cmath>

// Reference kernels. The 4-lane blocking here is the contract every SIMD
// variant must reproduce bit-for-bit.

namespace pomdp::kern {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        lane[0] += a[i] * b[i];
        lane[1] += a[i + 1] * b[i + 1];
        lane[2] += a[i + 2] * b[i + 2];
        lane[3] += a[i + 3] * b[i + 3];
    }
    for (std::size_t k = 0; i < n; ++i, ++k) lane[k] += a[i] * b[i];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double sum_scalar(const double* x, std::size_t n) {
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        lane[0] += x[i];
        lane[1] += x[i + 1];
        lane[2] += x[i + 2];
        lane[3] += x[i + 3];
    }
    for (std::size_t k = 0; i < n; ++i, ++k) lane[k] += x[i];
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

void axpy_scalar(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale_scalar(double* x, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void emul_scalar(double* dst, const double* a, const double* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

double max_abs_scalar(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double v = std::fabs(x[i]);
        if (v > m) m = v;
    }
    return m;
}

std::size_t argmax_scalar(const double* x, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (x[i] > x[best]) best = i;
    return best;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{"scalar",   dot_scalar,     sum_scalar,    axpy_scalar,
                         scale_scalar, emul_scalar, max_abs_scalar, argmax_scalar};
    return ops;
}

}  // namespace pomdp::kern
