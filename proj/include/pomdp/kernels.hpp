#pragma once

#include <cstddef>

// Dense double-precision kernels behind the numeric inner loops (LP work
// vectors, occupancy recursions, tensor composition, belief filtering).
//
// Every variant implements the same fixed 4-lane blocking, so scalar and
// SIMD results are bit-identical: reductions accumulate into four lanes
// (element i goes to lane i mod 4 within each block of four), the tail is
// folded into lanes 0..r-1, and the final combine is (l0+l1)+(l2+l3).
// Elementwise kernels are single IEEE mul/add per element (no FMA).

namespace pomdp::kern {

struct Ops {
    const char* name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    void (*axpy)(double* y, double alpha, const double* x, std::size_t n);
    void (*scale)(double* x, double alpha, std::size_t n);
    void (*emul)(double* dst, const double* a, const double* b, std::size_t n);
    double (*max_abs)(const double* x, std::size_t n);
    std::size_t (*argmax)(const double* x, std::size_t n);  // lowest index on ties; n >= 1
};

const Ops& scalar_ops();
bool avx2_available();
const Ops& avx2_ops();  // valid only when avx2_available()

// Selected once per process: AVX2 when the CPU supports it, overridable
// with POMDP_KERNELS=scalar|avx2.
const Ops& active_ops();

inline double dot(const double* a, const double* b, std::size_t n) { return active_ops().dot(a, b, n); }
inline double sum(const double* x, std::size_t n) { return active_ops().sum(x, n); }
inline void axpy(double* y, double alpha, const double* x, std::size_t n) { active_ops().axpy(y, alpha, x, n); }
inline void scale(double* x, double alpha, std::size_t n) { active_ops().scale(x, alpha, n); }
inline void emul(double* dst, const double* a, const double* b, std::size_t n) { active_ops().emul(dst, a, b, n); }
inline double max_abs(const double* x, std::size_t n) { return active_ops().max_abs(x, n); }
inline std::size_t argmax(const double* x, std::size_t n) { return active_ops().argmax(x, n); }

}  // namespace pomdp::kern
