#include "rlpt/kernels.hpp"

namespace rlpt::kernels {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_acc_scalar(const double* w, const double* x, double* y,
                       std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        y[r] += dot_scalar(w + r * cols, x, cols);
}

void matvec_t_acc_scalar(const double* w, const double* y, double* x,
                         std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_scalar(y[r], w + r * cols, x, cols);
}

void rank1_acc_scalar(double* w, const double* u, const double* v, double s,
                      std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r)
        axpy_scalar(s * u[r], v, w + r * cols, cols);
}

void minhash_update_scalar(std::uint64_t* sig, const std::uint64_t* mul,
                           const std::uint64_t* add, std::uint64_t x,
                           std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const std::uint64_t h = mul[j] * x + add[j];
        if (h < sig[j]) sig[j] = h;
    }
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops{
        "scalar",        dot_scalar,        axpy_scalar,
        matvec_acc_scalar, matvec_t_acc_scalar, rank1_acc_scalar,
        minhash_update_scalar,
    };
    return ops;
}

}  // namespace rlpt::kernels
