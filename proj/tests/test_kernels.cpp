#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "rlpt/kernels.hpp"

using namespace rlpt;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v)
        x = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 4.0;
    return v;
}

}  // namespace

TEST_CASE("scalar dot matches naive") {
    std::mt19937_64 rng(11);
    const auto a = random_vec(rng, 131);
    const auto b = random_vec(rng, 131);
    double expect = 0;
    for (std::size_t i = 0; i < a.size(); ++i) expect += a[i] * b[i];
    CHECK(kernels::scalar_ops().dot(a.data(), b.data(), a.size()) ==
          doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("every available implementation agrees with scalar") {
    std::mt19937_64 rng(42);
    const auto& ref = kernels::scalar_ops();
    for (const auto& name : kernels::available()) {
        CAPTURE(name);
        REQUIRE(kernels::select(name));
        const auto& ops = kernels::active();

        for (std::size_t n : {1UL, 3UL, 4UL, 7UL, 64UL, 129UL}) {
            const auto a = random_vec(rng, n);
            const auto b = random_vec(rng, n);
            const double d0 = ref.dot(a.data(), b.data(), n);
            const double d1 = ops.dot(a.data(), b.data(), n);
            CHECK(d1 == doctest::Approx(d0).epsilon(1e-12));

            auto y0 = random_vec(rng, n);
            auto y1 = y0;
            ref.axpy(0.37, a.data(), y0.data(), n);
            ops.axpy(0.37, a.data(), y1.data(), n);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(y1[i] == doctest::Approx(y0[i]).epsilon(1e-12));
        }

        const std::size_t rows = 13, cols = 37;
        const auto w = random_vec(rng, rows * cols);
        const auto x = random_vec(rng, cols);
        const auto yv = random_vec(rng, rows);
        std::vector<double> out0(rows, 0.1), out1(rows, 0.1);
        ref.matvec_acc(w.data(), x.data(), out0.data(), rows, cols);
        ops.matvec_acc(w.data(), x.data(), out1.data(), rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            CHECK(out1[i] == doctest::Approx(out0[i]).epsilon(1e-12));

        std::vector<double> xt0(cols, 0.2), xt1(cols, 0.2);
        ref.matvec_t_acc(w.data(), yv.data(), xt0.data(), rows, cols);
        ops.matvec_t_acc(w.data(), yv.data(), xt1.data(), rows, cols);
        for (std::size_t i = 0; i < cols; ++i)
            CHECK(xt1[i] == doctest::Approx(xt0[i]).epsilon(1e-12));

        auto w0 = w, w1 = w;
        ref.rank1_acc(w0.data(), yv.data(), x.data(), -0.7, rows, cols);
        ops.rank1_acc(w1.data(), yv.data(), x.data(), -0.7, rows, cols);
        for (std::size_t i = 0; i < w0.size(); ++i)
            CHECK(w1[i] == doctest::Approx(w0[i]).epsilon(1e-12));
    }
    kernels::select("auto");
}

TEST_CASE("minhash update is bit-exact across implementations") {
    std::mt19937_64 rng(7);
    const std::size_t p = 128;
    std::vector<std::uint64_t> mul(p), add(p);
    for (auto& m : mul) m = rng() | 1;
    for (auto& a : add) a = rng();

    for (const auto& name : kernels::available()) {
        CAPTURE(name);
        REQUIRE(kernels::select(name));
        std::vector<std::uint64_t> sig_ref(p, ~0ULL), sig(p, ~0ULL);
        for (int s = 0; s < 200; ++s) {
            const std::uint64_t x = rng();
            kernels::scalar_ops().minhash_update(sig_ref.data(), mul.data(), add.data(), x, p);
            kernels::active().minhash_update(sig.data(), mul.data(), add.data(), x, p);
        }
        CHECK(sig == sig_ref);
    }
    kernels::select("auto");

    // odd sizes exercise the tail loop
    std::vector<std::uint64_t> sig(5, ~0ULL);
    kernels::active().minhash_update(sig.data(), mul.data(), add.data(), 123, 5);
    for (std::size_t j = 0; j < 5; ++j) CHECK(sig[j] == mul[j] * 123 + add[j]);
}

TEST_CASE("selection") {
    CHECK(kernels::select("scalar"));
    CHECK(std::string(kernels::active().name) == "scalar");
    CHECK_FALSE(kernels::select("not-a-kernel"));
    CHECK(kernels::select("auto"));
    CHECK_FALSE(kernels::available().empty());
    CHECK(kernels::available().front() == "scalar");
}
