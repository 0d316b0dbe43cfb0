#include "bhfl/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bhfl/error.hpp"
#include "bhfl/random.hpp"

namespace bhfl {

void AttackSpec::validate(std::size_t m) const {
    require(alpha >= 0.0 && alpha < 0.5, ErrorKind::InvalidConfig, "alpha must lie in [0, 0.5)");
    require(byzantine_count(m, alpha) < m, ErrorKind::InvalidConfig, "no honest device left");
    require(std::isfinite(sign_flip_scale) && std::isfinite(magnitude) && std::isfinite(shift),
            ErrorKind::InvalidConfig, "attack parameters must be finite");
    require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, ErrorKind::InvalidConfig,
            "attack noise sigma must be >= 0");
}

std::string to_string(AttackKind kind) {
    switch (kind) {
        case AttackKind::None: return "none";
        case AttackKind::SignFlip: return "sign_flip";
        case AttackKind::LargeValue: return "large_value";
        case AttackKind::GaussianNoise: return "gaussian";
        case AttackKind::MeanShift: return "mean_shift";
    }
    return "unknown";
}

std::size_t byzantine_count(std::size_t m, double alpha) {
    return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(m) + 1e-9));
}

std::vector<std::size_t> select_byzantine(std::size_t m, double alpha, bool dynamic, std::size_t round,
                                          std::uint64_t seed) {
    const std::size_t count = byzantine_count(m, alpha);
    if (count == 0) return {};
    Rng rng(derive_seed(seed, dynamic ? round : 0));
    std::vector<std::size_t> ids(m);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    for (std::size_t i = 0; i < count; ++i) std::swap(ids[i], ids[i + rng.below(m - i)]);
    ids.resize(count);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<ParamVector> corrupt(const AttackSpec& attack, const std::vector<ParamVector>& uploads,
                                 const std::vector<std::size_t>& byzantine, std::uint64_t seed) {
    std::vector<ParamVector> out = uploads;
    if (attack.kind == AttackKind::None || byzantine.empty() || uploads.empty()) return out;
    const std::size_t m = uploads.size();
    const std::size_t d = uploads.front().size();

    std::vector<bool> is_byz(m, false);
    for (const auto i : byzantine) {
        require(i < m, ErrorKind::InvalidConfig, "Byzantine index out of range");
        is_byz[i] = true;
    }

    ParamVector good_mean(d, 0.0);
    ParamVector good_sd(d, 0.0);
    std::size_t good = 0;
    for (std::size_t i = 0; i < m; ++i) {
        if (is_byz[i]) continue;
        ++good;
        for (std::size_t c = 0; c < d; ++c) good_mean[c] += uploads[i][c];
    }
    require(good > 0, ErrorKind::InvalidConfig, "attack needs at least one honest upload");
    for (auto& c : good_mean) c /= static_cast<double>(good);
    if (attack.kind == AttackKind::MeanShift) {
        for (std::size_t i = 0; i < m; ++i) {
            if (is_byz[i]) continue;
            for (std::size_t c = 0; c < d; ++c) {
                const double dev = uploads[i][c] - good_mean[c];
                good_sd[c] += dev * dev;
            }
        }
        for (auto& c : good_sd) c = std::sqrt(c / static_cast<double>(good));
    }

    Rng rng(derive_seed(seed, 0x6a77));
    for (const auto i : byzantine) {
        auto& v = out[i];
        switch (attack.kind) {
            case AttackKind::None: break;
            case AttackKind::SignFlip:
                for (std::size_t c = 0; c < d; ++c) v[c] = -attack.sign_flip_scale * good_mean[c];
                break;
            case AttackKind::LargeValue:
                std::fill(v.begin(), v.end(), attack.magnitude);
                break;
            case AttackKind::GaussianNoise:
                for (auto& c : v) c += attack.noise_sigma * rng.normal();
                break;
            case AttackKind::MeanShift:
                for (std::size_t c = 0; c < d; ++c) v[c] = good_mean[c] + attack.shift * good_sd[c];
                break;
        }
    }
    return out;
}

}  // namespace bhfl
