#pragma once

// Low-level dense kernels behind the tensor engine. A scalar reference
// implementation always exists; vectorized variants (AVX2/FMA on x86-64,
// NEON on aarch64) are selected at runtime when the CPU supports them.
// Set MTSCGAN_KERNELS=scalar|avx2|neon to force a backend.

#include <cstddef>
#include <string>

namespace mtscgan::kernels {

struct Backend {
    const char* name;

    void (*add)(const double* a, const double* b, double* out, std::size_t n);
    void (*sub)(const double* a, const double* b, double* out, std::size_t n);
    void (*mul)(const double* a, const double* b, double* out, std::size_t n);
    void (*div)(const double* a, const double* b, double* out, std::size_t n);
    void (*scale)(const double* a, double s, double* out, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* a, std::size_t n);
    // C[m,n] += A[m,k] * B[k,n], all row-major contiguous
    void (*matmul_acc)(const double* a, const double* b, double* c,
                       std::size_t m, std::size_t k, std::size_t n);
};

const Backend& scalar_backend();
bool avx2_available();
#if defined(__x86_64__)
const Backend& avx2_backend();
#endif
#if defined(__aarch64__)
const Backend& neon_backend();
#endif

// Active backend, resolved once (CPU probe + MTSCGAN_KERNELS override).
const Backend& active();

}  // namespace mtscgan::kernels
