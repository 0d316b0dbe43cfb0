#pragma once

// Declarative experiment description and its INI-style text format.
//
//   [section]
//   key = value        ; or # comments on their own line
//
// Every key is optional except where noted in README.md; unknown sections
// or keys are rejected. to_ini() writes the fully resolved configuration
// back in the same format.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bhfl/adversary.hpp"
#include "bhfl/aggregation.hpp"
#include "bhfl/compression.hpp"
#include "bhfl/datagen.hpp"
#include "bhfl/losses.hpp"

namespace bhfl {

enum class Algorithm { Bhgd, BhgdC, Baseline };
enum class DataSource { Synthetic, Csv };
enum class EstimatorSchedule { Theory, Zeta, Manual };
enum class InitKind { Zero, Gaussian };

struct DataConfig {
    DataSource source = DataSource::Synthetic;
    std::size_t dim = 10;
    std::size_t train_size = 1000;
    std::size_t test_size = 200;
    double feature_mu = 0.0;
    /// Defaults to 0.78 (linear) or 3.0 (logistic) when unset.
    std::optional<double> feature_sigma;
    NoiseSpec noise;
    ParamVector w_star;

    std::string csv_path;
    std::vector<std::string> csv_features;
    std::string csv_label;
    bool standardize = true;
    bool add_bias = true;
};

struct EstimatorConfig {
    EstimatorSchedule schedule = EstimatorSchedule::Theory;
    /// Second-moment bound; defaults to the synthetic noise variance, else 1.
    std::optional<double> v;
    double diameter = 10.0;
    double lipschitz = 1.0;
    double zeta = 0.01;
    double s = 1.0;
    double tau = 1.0;
};

struct OptimizerConfig {
    /// Step size; defaults to 1 / smoothness.
    std::optional<double> eta;
    /// L_R; defaults to an estimate from the training features.
    std::optional<double> smoothness;
    double radius = 10.0;
    InitKind init = InitKind::Zero;
    double init_scale = 0.1;
};

struct ExperimentConfig {
    std::string name = "experiment";
    Algorithm algorithm = Algorithm::Bhgd;
    std::size_t rounds = 200;
    std::size_t repetitions = 10;
    std::uint64_t seed = 1;
    std::optional<std::uint64_t> data_seed;
    std::optional<std::uint64_t> init_seed;
    std::optional<std::uint64_t> adversary_seed;
    std::size_t threads = 1;
    std::string out_dir = "results";

    ModelKind model = ModelKind::Linear;
    std::size_t hidden = 8;
    MlpLoss mlp_loss = MlpLoss::Squared;

    DataConfig data;
    std::size_t devices = 10;
    double alpha = 0.2;
    /// Defaults to min(alpha + 0.05, 0.5 - 1e-9).
    std::optional<double> beta;

    EstimatorConfig estimator;
    AggregatorSpec aggregator;
    /// Krum-family f; defaults to floor(alpha m), capped at floor((m-3)/4)
    /// for Bulyan.
    std::optional<std::size_t> aggregator_f;
    CompressorSpec compressor;
    AttackSpec attack;
    OptimizerConfig optimizer;

    [[nodiscard]] double resolved_beta() const;
    [[nodiscard]] double resolved_feature_sigma() const;
    [[nodiscard]] double resolved_v() const;
    [[nodiscard]] std::size_t samples_per_device() const { return devices == 0 ? 0 : data.train_size / devices; }
    /// Byzantine fraction as used by the adversary (mirrors `alpha`).
    [[nodiscard]] AttackSpec resolved_attack() const;
    /// Aggregator used by the baseline loop with beta filled in.
    [[nodiscard]] AggregatorSpec resolved_aggregator() const;

    /// Throws ConfigError naming the offending field.
    void validate() const;
    /// validate() minus the rounds >= 1 requirement; the engine accepts
    /// zero rounds and reports only the initial point.
    void validate_structure() const;
};

/// Reads and validates a config file. Throws ConfigError.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Canonical text of the resolved configuration (defaults filled in).
std::string to_ini(const ExperimentConfig& config);

/// FNV-1a 64 of to_ini(config), hex encoded.
std::string config_digest(const ExperimentConfig& config);

std::string to_string(Algorithm algorithm);
std::string to_string(ModelKind kind);

/// Parses "identity", "topk:<k>", "randk:<p>" or "l1quant".
CompressorSpec parse_compressor(const std::string& text);

}  // namespace bhfl
