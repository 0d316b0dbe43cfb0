#include <atomic>
#include <cstdlib>
#include <string_view>

#include "bhfl/simd.hpp"

namespace bhfl::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(BHFL_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable* select_default() noexcept {
    if (const char* env = std::getenv("BHFL_SIMD"); env && std::string_view(env) == "scalar")
        return &scalar::table();
#if defined(BHFL_HAVE_AVX2)
    if (cpu_has_avx2()) return &avx2::table();
#endif
#if defined(BHFL_HAVE_NEON)
    return &neon::table();
#endif
    return &scalar::table();
}

std::atomic<const KernelTable*>& slot() noexcept {
    static std::atomic<const KernelTable*> current{select_default()};
    return current;
}

}  // namespace

std::string_view to_string(Backend backend) noexcept {
    switch (backend) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "unknown";
}

bool available(Backend backend) noexcept {
    switch (backend) {
        case Backend::Scalar: return true;
        case Backend::Avx2: return cpu_has_avx2();
        case Backend::Neon:
#if defined(BHFL_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const KernelTable& table_for(Backend backend) noexcept {
#if defined(BHFL_HAVE_AVX2)
    if (backend == Backend::Avx2 && cpu_has_avx2()) return avx2::table();
#endif
#if defined(BHFL_HAVE_NEON)
    if (backend == Backend::Neon) return neon::table();
#endif
    (void)backend;
    return scalar::table();
}

const KernelTable& active() noexcept { return *slot().load(std::memory_order_relaxed); }

void force_backend(Backend backend) noexcept {
    slot().store(&table_for(backend), std::memory_order_relaxed);
}

}  // namespace bhfl::simd
