// NEON variants for aarch64 (NEON is baseline there, no runtime probe needed).
#include "rlpt/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace rlpt::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return vaddvq_f64(acc) + tail;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vaddq_f64(vy, vmulq_f64(va, vld1q_f64(x + i)));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_acc_neon(const double* w, const double* x, double* y,
                     std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] += dot_neon(w + r * cols, x, cols);
}

void matvec_t_acc_neon(const double* w, const double* y, double* x,
                       std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_neon(y[r], w + r * cols, x, cols);
}

void rank1_acc_neon(double* w, const double* u, const double* v, double s,
                    std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_neon(s * u[r], v, w + r * cols, cols);
}

void minhash_update_neon(std::uint64_t* sig, const std::uint64_t* mul,
                         const std::uint64_t* add, std::uint64_t x,
                         std::size_t n) {
    // No 64-bit vector multiply on NEON; keep the update scalar per lane.
    for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t h = mul[j] * x + add[j];
        if (h < sig[j]) sig[j] = h;
    }
}

}  // namespace

const Ops& neon_ops() {
    static const Ops ops{
        "neon",          dot_neon,        axpy_neon,
        matvec_acc_neon, matvec_t_acc_neon, rank1_acc_neon,
        minhash_update_neon,
    };
    return ops;
}

}  // namespace rlpt::kernels

#endif  // __aarch64__
