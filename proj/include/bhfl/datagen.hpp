#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bhfl/losses.hpp"
#include "bhfl/random.hpp"
#include "bhfl/types.hpp"

namespace bhfl {

enum class NoiseKind { None, LogNormalCentered, ParetoCentered };

/// Zero-mean label noise. LogNormal uses (mu, sigma); Pareto uses
/// (scale, shape) and requires shape > 2 for a finite variance.
struct NoiseSpec {
    NoiseKind kind = NoiseKind::LogNormalCentered;
    double mu = 0.0;
    double sigma = 0.55848;
    double scale = 1.0;
    double shape = 3.26953;

    void validate() const;
    /// Closed-form variance (equal to the second raw moment, the mean is 0).
    [[nodiscard]] double variance() const;
    double sample(Rng& rng) const;
};

/// L - exp(mu + sigma^2/2) for L ~ LogNormal(mu, sigma).
double sample_lognormal_centered(double mu, double sigma, Rng& rng);

/// P - shape*scale/(shape-1) for P ~ Pareto(scale, shape), drawn by inverse CDF.
/// Throws InvalidConfig if shape <= 2 or scale <= 0.
double sample_pareto_centered(double scale, double shape, Rng& rng);

enum class LabelRule { Linear, Sign };

struct SyntheticSpec {
    LabelRule rule = LabelRule::Linear;
    std::size_t dim = 10;
    /// Defaults to a uniform draw from the unit sphere when empty.
    ParamVector w_star;
    double feature_mu = 0.0;
    double feature_sigma = 0.78;
    NoiseSpec noise;
    std::size_t train_size = 1000;
    std::size_t test_size = 200;

    void validate() const;
};

struct TrainTest {
    Dataset train;
    Dataset test;
};

/// Uniform point on the unit sphere in R^dim.
ParamVector unit_sphere_point(std::size_t dim, Rng& rng);

/// y = <x, w*> + xi, features i.i.d. LogNormal(feature_mu, feature_sigma).
TrainTest gen_linear(const SyntheticSpec& spec, std::uint64_t seed);

/// y = sign(sigmoid(<x, w*> + xi) - 1/2) in {-1, +1}, sign(0) = +1.
TrainTest gen_logistic(const SyntheticSpec& spec, std::uint64_t seed);

/// Seeded shuffle followed by a contiguous split into m equal shards.
/// Throws IndivisibleSplit unless m divides |data|.
std::vector<Dataset> partition(const Dataset& data, std::size_t m, std::uint64_t seed);

/// In-place Fisher-Yates shuffle of the records.
void shuffle(Dataset& data, std::uint64_t seed);

struct CsvSchema {
    /// Empty means every column except the label.
    std::vector<std::string> feature_columns;
    std::string label_column;
    bool standardize = false;
    bool add_bias = false;
};

/// Per-feature affine map to zero mean, unit (population) variance.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;

    static Standardizer fit(const Dataset& data);
    void apply(Dataset& data) const;
};

/// Reads a numeric CSV with a header row. Standardization (when enabled)
/// is fitted on the loaded rows; the bias column is appended after it.
/// Throws ParseError (with row and column) or Error{MissingColumn}.
Dataset load_csv(const std::string& path, const CsvSchema& schema);

/// Appends a constant 1 feature to every record.
void append_bias(Dataset& data);

}  // namespace bhfl
