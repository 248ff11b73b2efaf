#include "rlpt/kernels.hpp"

#include <atomic>

namespace rlpt::kernels {

#if defined(RLPT_HAVE_AVX2)
const Ops& avx2_ops();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

namespace {

const Ops* detect() {
#if defined(RLPT_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2")) return &avx2_ops();
#endif
#if defined(__aarch64__)
    return &neon_ops();
#endif
    return &scalar_ops();
}

std::atomic<const Ops*> g_active{nullptr};

}  // namespace

const Ops& active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (!ops) {
        ops = detect();
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

bool select(std::string_view name) {
    if (name == "auto") {
        g_active.store(detect(), std::memory_order_release);
        return true;
    }
    for (const auto& avail : available()) {
        if (avail != name) continue;
        if (name == "scalar") g_active.store(&scalar_ops(), std::memory_order_release);
#if defined(RLPT_HAVE_AVX2)
        else if (name == "avx2") g_active.store(&avx2_ops(), std::memory_order_release);
#endif
#if defined(__aarch64__)
        else if (name == "neon") g_active.store(&neon_ops(), std::memory_order_release);
#endif
        return true;
    }
    return false;
}

std::vector<std::string> available() {
    std::vector<std::string> names{"scalar"};
#if defined(RLPT_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2")) names.emplace_back("avx2");
#endif
#if defined(__aarch64__)
    names.emplace_back("neon");
#endif
    return names;
}

}  // namespace rlpt::kernels
