#pragma once

// delta-approximate compressors: ||Q(x) - x||^2 <= (1 - delta) ||x||^2.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bhfl/types.hpp"

namespace bhfl {

enum class CompressorKind { Identity, TopK, RandK, L1Quant };

struct CompressorSpec {
    CompressorKind kind = CompressorKind::Identity;
    std::size_t k = 1;   // TopK
    double p = 1.0;      // RandK keep probability

    void validate(std::size_t d) const;
    /// Identity: 1, TopK: k/d, RandK: p (in expectation), L1Quant: 1/d.
    [[nodiscard]] double declared_delta(std::size_t d) const;

    static CompressorSpec identity() { return {CompressorKind::Identity, 1, 1.0}; }
    static CompressorSpec top_k(std::size_t k) { return {CompressorKind::TopK, k, 1.0}; }
    static CompressorSpec rand_k(double p) { return {CompressorKind::RandK, 1, p}; }
    static CompressorSpec l1_quant() { return {CompressorKind::L1Quant, 1, 1.0}; }
};

std::string to_string(const CompressorSpec& spec);

/// Wire message, format version 1.
///   Identity: values holds the dense vector.
///   TopK/RandK: indices (ascending) and values of the retained coordinates.
///   L1Quant: scale = ||x||_1 / d and one sign bit per coordinate
///            (bit set means negative), packed little-endian into bytes.
struct CompressedMessage {
    static constexpr std::uint8_t kVersion = 1;

    CompressorKind kind = CompressorKind::Identity;
    std::size_t dim = 0;
    std::vector<std::uint32_t> indices;
    std::vector<double> values;
    double scale = 0.0;
    std::vector<std::uint8_t> sign_bits;

    /// Nominal upload size: Identity 8d, sparse 12 per kept entry (8-byte
    /// value + 4-byte index), L1Quant 8 + ceil(d/8).
    [[nodiscard]] std::size_t nominal_bytes() const;
    /// Bytes spent on gradient values alone (sparse indices excluded):
    /// Identity 8d, sparse 8 per kept entry, L1Quant 8 + ceil(d/8).
    [[nodiscard]] std::size_t payload_bytes() const;
    /// Wraps an arbitrary dense vector (used for Byzantine uploads).
    static CompressedMessage dense(ConstVec x);
};

/// `seed` drives RandK's coordinate selection and is ignored otherwise.
CompressedMessage compress(const CompressorSpec& spec, ConstVec x, std::uint64_t seed = 0);
ParamVector decompress(const CompressedMessage& msg);

/// 1 - ||decompress(compress(x)) - x||^2 / ||x||^2, and 1 for x = 0.
double effective_delta(const CompressorSpec& spec, ConstVec x, std::uint64_t seed = 0);

std::size_t nominal_bytes(const CompressedMessage& msg);

}  // namespace bhfl
