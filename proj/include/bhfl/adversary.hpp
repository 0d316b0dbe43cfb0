#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bhfl/types.hpp"

namespace bhfl {

enum class AttackKind { None, SignFlip, LargeValue, GaussianNoise, MeanShift };

/// Byzantine behaviour. Attackers are omniscient: they see every device's
/// would-be honest upload before choosing their own.
struct AttackSpec {
    AttackKind kind = AttackKind::SignFlip;
    double sign_flip_scale = 5.0;   // SignFlip: -c * mean(good)
    double magnitude = 1e3;         // LargeValue: magnitude * ones
    double noise_sigma = 1.0;       // GaussianNoise: own + N(0, sigma^2 I)
    double shift = 1.0;             // MeanShift: mean(good) + shift * std(good)
    bool dynamic = false;
    double alpha = 0.0;

    void validate(std::size_t m) const;
};

std::string to_string(AttackKind kind);

/// floor(alpha * m).
std::size_t byzantine_count(std::size_t m, double alpha);

/// Sorted indices of the Byzantine devices in `round`. A static set is drawn
/// once from `seed`; a dynamic set is re-drawn per round from (seed, round).
std::vector<std::size_t> select_byzantine(std::size_t m, double alpha, bool dynamic, std::size_t round,
                                          std::uint64_t seed);

/// Replaces the entries of `byzantine` (sorted) in a copy of `uploads`.
/// Entries outside the set are returned unchanged. `seed` drives the
/// Gaussian attack.
std::vector<ParamVector> corrupt(const AttackSpec& attack, const std::vector<ParamVector>& uploads,
                                 const std::vector<std::size_t>& byzantine, std::uint64_t seed);

}  // namespace bhfl
