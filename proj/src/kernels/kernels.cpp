#include "pomdp/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace pomdp::kern {

bool avx2_available() {
#if defined(POMDP_KERNELS_HAVE_AVX2)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

#if !defined(POMDP_KERNELS_HAVE_AVX2)
const Ops& avx2_ops() { return scalar_ops(); }
#endif

namespace {

const Ops& select() {
    if (const char* env = std::getenv("POMDP_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return scalar_ops();
        if (std::strcmp(env, "avx2") == 0 && avx2_available()) return avx2_ops();
    }
    return avx2_available() ? avx2_ops() : scalar_ops();
}

}  // namespace

const Ops& active_ops() {
    static const Ops& ops = select();
    return ops;
}

}  // namespace pomdp::kern
