#include "mtscgan/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace mtscgan::kernels {

bool avx2_available() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

const Backend& resolve() {
    const char* force = std::getenv("MTSCGAN_KERNELS");
    if (force != nullptr) {
        if (std::strcmp(force, "scalar") == 0) return scalar_backend();
#if defined(__x86_64__)
        if (std::strcmp(force, "avx2") == 0 && avx2_available())
            return avx2_backend();
#endif
#if defined(__aarch64__)
        if (std::strcmp(force, "neon") == 0) return neon_backend();
#endif
        return scalar_backend();
    }
#if defined(__x86_64__)
    if (avx2_available()) return avx2_backend();
#endif
#if defined(__aarch64__)
    return neon_backend();
#else
    return scalar_backend();
#endif
}

}  // namespace

const Backend& active() {
    static const Backend& backend = resolve();
    return backend;
}

}  // namespace mtscgan::kernels
