#include "bhfl/compression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bhfl/error.hpp"
#include "bhfl/random.hpp"
#include "bhfl/simd.hpp"

namespace bhfl {

void CompressorSpec::validate(std::size_t d) const {
    switch (kind) {
        case CompressorKind::Identity:
        case CompressorKind::L1Quant: return;
        case CompressorKind::TopK:
            require(k >= 1 && k <= d, ErrorKind::InvalidConfig,
                    "top-k needs 1 <= k <= d (k=" + std::to_string(k) + ", d=" + std::to_string(d) + ")");
            return;
        case CompressorKind::RandK:
            require(p > 0.0 && p <= 1.0, ErrorKind::InvalidConfig, "rand-k keep probability must lie in (0, 1]");
            return;
    }
}

double CompressorSpec::declared_delta(std::size_t d) const {
    switch (kind) {
        case CompressorKind::Identity: return 1.0;
        case CompressorKind::TopK: return static_cast<double>(k) / static_cast<double>(d);
        case CompressorKind::RandK: return p;
        case CompressorKind::L1Quant: return 1.0 / static_cast<double>(d);
    }
    return 1.0;
}

std::string to_string(const CompressorSpec& spec) {
    switch (spec.kind) {
        case CompressorKind::Identity: return "identity";
        case CompressorKind::TopK: return "topk:" + std::to_string(spec.k);
        case CompressorKind::RandK: {
            std::string p = std::to_string(spec.p);
            p.erase(p.find_last_not_of('0') + 1);
            if (!p.empty() && p.back() == '.') p.pop_back();
            return "randk:" + p;
        }
        case CompressorKind::L1Quant: return "l1quant";
    }
    return "unknown";
}

std::size_t CompressedMessage::nominal_bytes() const {
    switch (kind) {
        case CompressorKind::Identity: return 8 * dim;
        case CompressorKind::TopK:
        case CompressorKind::RandK: return 12 * indices.size();
        case CompressorKind::L1Quant: return 8 + (dim + 7) / 8;
    }
    return 0;
}

std::size_t CompressedMessage::payload_bytes() const {
    switch (kind) {
        case CompressorKind::Identity: return 8 * dim;
        case CompressorKind::TopK:
        case CompressorKind::RandK: return 8 * values.size();
        case CompressorKind::L1Quant: return 8 + (dim + 7) / 8;
    }
    return 0;
}

CompressedMessage CompressedMessage::dense(ConstVec x) {
    CompressedMessage msg;
    msg.kind = CompressorKind::Identity;
    msg.dim = x.size();
    msg.values.assign(x.begin(), x.end());
    return msg;
}

std::size_t nominal_bytes(const CompressedMessage& msg) { return msg.nominal_bytes(); }

CompressedMessage compress(const CompressorSpec& spec, ConstVec x, std::uint64_t seed) {
    const std::size_t d = x.size();
    spec.validate(d);
    CompressedMessage msg;
    msg.kind = spec.kind;
    msg.dim = d;
    switch (spec.kind) {
        case CompressorKind::Identity:
            msg.values.assign(x.begin(), x.end());
            break;
        case CompressorKind::TopK: {
            std::vector<std::uint32_t> order(d);
            std::iota(order.begin(), order.end(), 0u);
            std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(spec.k), order.end(),
                              [&](std::uint32_t a, std::uint32_t b) {
                                  const double fa = std::fabs(x[a]);
                                  const double fb = std::fabs(x[b]);
                                  return fa > fb || (fa == fb && a < b);
                              });
            order.resize(spec.k);
            std::sort(order.begin(), order.end());
            msg.indices = std::move(order);
            for (const auto i : msg.indices) msg.values.push_back(x[i]);
            break;
        }
        case CompressorKind::RandK: {
            Rng rng(seed);
            for (std::size_t i = 0; i < d; ++i) {
                if (rng.uniform() < spec.p) {
                    msg.indices.push_back(static_cast<std::uint32_t>(i));
                    msg.values.push_back(x[i]);
                }
            }
            break;
        }
        case CompressorKind::L1Quant: {
            msg.scale = d == 0 ? 0.0 : simd::scalar::table().l1_norm(x.data(), d) / static_cast<double>(d);
            msg.sign_bits.assign((d + 7) / 8, 0);
            for (std::size_t i = 0; i < d; ++i)
                if (x[i] < 0.0) msg.sign_bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
            break;
        }
    }
    return msg;
}

ParamVector decompress(const CompressedMessage& msg) {
    ParamVector out(msg.dim, 0.0);
    switch (msg.kind) {
        case CompressorKind::Identity:
            require(msg.values.size() == msg.dim, ErrorKind::DimensionMismatch, "dense message has wrong length");
            out = msg.values;
            break;
        case CompressorKind::TopK:
        case CompressorKind::RandK:
            require(msg.values.size() == msg.indices.size(), ErrorKind::DimensionMismatch,
                    "sparse message index/value count differ");
            for (std::size_t j = 0; j < msg.indices.size(); ++j) {
                require(msg.indices[j] < msg.dim, ErrorKind::DimensionMismatch, "sparse index out of range");
                out[msg.indices[j]] = msg.values[j];
            }
            break;
        case CompressorKind::L1Quant:
            require(msg.sign_bits.size() == (msg.dim + 7) / 8, ErrorKind::DimensionMismatch,
                    "sign bitmap has wrong length");
            for (std::size_t i = 0; i < msg.dim; ++i) {
                const bool negative = (msg.sign_bits[i / 8] >> (i % 8)) & 1u;
                out[i] = negative ? -msg.scale : msg.scale;
            }
            break;
    }
    return out;
}

double effective_delta(const CompressorSpec& spec, ConstVec x, std::uint64_t seed) {
    const double energy = simd::scalar::table().squared_norm(x.data(), x.size());
    if (energy == 0.0) return 1.0;
    const ParamVector q = decompress(compress(spec, x, seed));
    const double err = simd::scalar::table().squared_distance(q.data(), x.data(), x.size());
    return 1.0 - err / energy;
}

}  // namespace bhfl
