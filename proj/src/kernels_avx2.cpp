// AVX2 variants of the inner loops. Compiled with -mavx2 (no FMA, so the
// float kernels round like plain mul+add), registered at runtime only when
// the CPU reports AVX2.
#include "rlpt/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

namespace rlpt::kernels {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d sh = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a + i);
        __m256d vb = _mm256_loadu_pd(b + i);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(va, vb));
    }
    double tail = 0.0;
    for (; i < n; ++i) tail += a[i] * b[i];
    return hsum(acc) + tail;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        __m256d vx = _mm256_loadu_pd(x + i);
        vy = _mm256_add_pd(vy, _mm256_mul_pd(va, vx));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_acc_avx2(const double* w, const double* x, double* y,
                     std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] += dot_avx2(w + r * cols, x, cols);
}

void matvec_t_acc_avx2(const double* w, const double* y, double* x,
                       std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_avx2(y[r], w + r * cols, x, cols);
}

void rank1_acc_avx2(double* w, const double* u, const double* v, double s,
                    std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_avx2(s * u[r], v, w + r * cols, cols);
}

// 64x64 -> low 64 multiply from 32-bit pieces (AVX2 has no mullo_epi64).
inline __m256i mul_lo64(__m256i a, __m256i b) {
    __m256i a_hi = _mm256_srli_epi64(a, 32);
    __m256i b_hi = _mm256_srli_epi64(b, 32);
    __m256i lolo = _mm256_mul_epu32(a, b);
    __m256i cross = _mm256_add_epi64(_mm256_mul_epu32(a, b_hi),
                                     _mm256_mul_epu32(a_hi, b));
    return _mm256_add_epi64(lolo, _mm256_slli_epi64(cross, 32));
}

inline __m256i min_u64(__m256i a, __m256i b) {
    const __m256i flip = _mm256_set1_epi64x(static_cast<long long>(0x8000000000000000ULL));
    __m256i gt = _mm256_cmpgt_epi64(_mm256_xor_si256(a, flip),
                                    _mm256_xor_si256(b, flip));
    return _mm256_blendv_epi8(a, b, gt);
}

void minhash_update_avx2(std::uint64_t* sig, const std::uint64_t* mul,
                         const std::uint64_t* add, std::uint64_t x,
                         std::size_t n) {
    const __m256i vx = _mm256_set1_epi64x(static_cast<long long>(x));
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256i vm = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(mul + j));
        __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(add + j));
        __m256i vs = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(sig + j));
        __m256i h = _mm256_add_epi64(mul_lo64(vm, vx), va);
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(sig + j), min_u64(vs, h));
    }
    for (; j < n; ++j) {
        const std::uint64_t h = mul[j] * x + add[j];
        if (h < sig[j]) sig[j] = h;
    }
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops ops{
        "avx2",          dot_avx2,        axpy_avx2,
        matvec_acc_avx2, matvec_t_acc_avx2, rank1_acc_avx2,
        minhash_update_avx2,
    };
    return ops;
}

}  // namespace rlpt::kernels

#endif  // __AVX2__
