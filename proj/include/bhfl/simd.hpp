#pragma once

// Dense double-precision kernels used by the losses, aggregators and the
// engine. Each kernel has a portable scalar reference in simd::scalar and
// an ISA-specific variant (AVX2+FMA on x86-64, NEON on AArch64). The active
// table is picked once at startup from the CPU feature bits; setting the
// environment variable BHFL_SIMD=scalar forces the reference path.
//
// Variants are not bit-identical to the reference (different summation
// order, fused multiply-add). Results are reproducible for a fixed backend.

#include <cstddef>
#include <string_view>

#include "bhfl/types.hpp"

namespace bhfl::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend backend) noexcept;

struct KernelTable {
    Backend backend;
    double (*dot)(const double* x, const double* y, std::size_t n);
    double (*squared_norm)(const double* x, std::size_t n);
    double (*squared_distance)(const double* x, const double* y, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    double (*l1_norm)(const double* x, std::size_t n);
    // y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // x *= a
    void (*scale)(double a, double* x, std::size_t n);
};

namespace scalar {
const KernelTable& table() noexcept;
}
#if defined(BHFL_HAVE_AVX2)
namespace avx2 {
const KernelTable& table() noexcept;
}
#endif
#if defined(BHFL_HAVE_NEON)
namespace neon {
const KernelTable& table() noexcept;
}
#endif

/// Table selected for this process.
const KernelTable& active() noexcept;

/// Whether `backend` is compiled in and supported by the running CPU.
bool available(Backend backend) noexcept;

/// Table for a specific backend; falls back to scalar when unavailable.
const KernelTable& table_for(Backend backend) noexcept;

/// Overrides the process-wide selection. Intended for tests and benchmarks;
/// not safe to call while other threads run kernels.
void force_backend(Backend backend) noexcept;

// Span-level conveniences over the active table.
inline double dot(ConstVec x, ConstVec y) { return active().dot(x.data(), y.data(), x.size()); }
inline double squared_norm(ConstVec x) { return active().squared_norm(x.data(), x.size()); }
inline double squared_distance(ConstVec x, ConstVec y) {
    return active().squared_distance(x.data(), y.data(), x.size());
}
inline double sum(ConstVec x) { return active().sum(x.data(), x.size()); }
inline double l1_norm(ConstVec x) { return active().l1_norm(x.data(), x.size()); }
inline void axpy(double a, ConstVec x, MutVec y) { active().axpy(a, x.data(), y.data(), x.size()); }
inline void scale(double a, MutVec x) { active().scale(a, x.data(), x.size()); }

}  // namespace bhfl::simd
