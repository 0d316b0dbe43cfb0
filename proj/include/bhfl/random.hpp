#pragma once

#include <cstdint>
#include <random>

namespace bhfl {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Seed for sub-stream `stream` of `base`. Distinct streams of the same base
/// are statistically independent for practical purposes.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// Experiment RNG. Wraps mt19937_64 and implements its own uniform and
/// normal transforms so draws are identical across standard libraries
/// (std::normal_distribution is implementation-defined).
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1].
    double uniform_open_left() { return 1.0 - uniform(); }
    /// Standard normal via Box-Muller.
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace bhfl
