#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rlpt::kernels {

// Dispatch table for the arithmetic inner loops. One row per implementation;
// the active row is chosen from CPU features at first use and can be pinned
// with select(). All float kernels agree with the scalar reference to within
// rounding (different accumulation order); the integer kernel is bit-exact.
struct Ops {
    const char* name;

    double (*dot)(const double* a, const double* b, std::size_t n);

    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);

    // y += W x, W row-major [rows x cols]
    void (*matvec_acc)(const double* w, const double* x, double* y,
                       std::size_t rows, std::size_t cols);

    // x += W^T y, W row-major [rows x cols], y has rows entries
    void (*matvec_t_acc)(const double* w, const double* y, double* x,
                         std::size_t rows, std::size_t cols);

    // W += s * u v^T, u has rows entries, v has cols entries
    void (*rank1_acc)(double* w, const double* u, const double* v, double s,
                      std::size_t rows, std::size_t cols);

    // sig[j] = min(sig[j], mul[j]*x + add[j]) over wrapping uint64 arithmetic
    void (*minhash_update)(std::uint64_t* sig, const std::uint64_t* mul,
                           const std::uint64_t* add, std::uint64_t x,
                           std::size_t n);
};

const Ops& scalar_ops();

// Currently active implementation (auto-detected unless pinned).
const Ops& active();

// Pin an implementation by name ("scalar", "avx2", "neon") or restore
// auto-detection with "auto". Returns false if the name is unknown or the
// implementation is not usable on this machine.
bool select(std::string_view name);

// Names of implementations usable on this machine, scalar first.
std::vector<std::string> available();

}  // namespace rlpt::kernels
