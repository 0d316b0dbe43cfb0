#pragma once

// Repeated seeded runs, sweeps and their CSV / JSON-lines output.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bhfl/config.hpp"
#include "bhfl/engine.hpp"

namespace bhfl {

struct RepetitionOutcome {
    std::size_t rep = 0;
    bool ok = true;
    std::string error;
    std::optional<std::size_t> divergence_round;
    /// Full stream on success; rows up to the failure otherwise.
    std::vector<RoundMetrics> rounds;
};

struct FinalStats {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for one repetition
    double min = 0.0;
    double max = 0.0;
};

struct RunSummary {
    std::string digest;
    std::string name;
    std::string axis;   // empty for a plain run
    std::string value;
    std::size_t repetitions = 0;
    std::size_t failed = 0;
    /// Over successful repetitions, indexed by round.
    std::vector<double> mean_test_loss;
    std::vector<double> std_test_loss;
    FinalStats final_loss;
    std::size_t total_bytes = 0;  // over successful repetitions
    std::size_t total_payload_bytes = 0;
    double wall_seconds = 0.0;
    std::vector<RepetitionOutcome> outcomes;

    [[nodiscard]] bool all_failed() const noexcept { return repetitions > 0 && failed == repetitions; }
};

/// Runs config.repetitions engines; repetitions go to config.threads
/// workers, results are ordered by repetition index.
RunSummary run_experiment(const ExperimentConfig& config);

/// Statistics from repetition outcomes (used by run_experiment).
RunSummary summarize(const ExperimentConfig& config, std::vector<RepetitionOutcome> outcomes);

/// Copy of config with one field replaced. Axes: alpha, N, m, sigma_x,
/// compressor. Throws ConfigError for an unknown axis or invalid value.
ExperimentConfig apply_axis(const ExperimentConfig& config, const std::string& axis, const std::string& value);

std::vector<RunSummary> sweep(const ExperimentConfig& config, const std::string& axis,
                              const std::vector<std::string>& values);

/// rep,round,test_loss,param_err,bytes_up; with axis,value in front when
/// with_axis is set.
void write_rounds_csv(std::ostream& out, const std::vector<RunSummary>& summaries, bool with_axis);
std::string summary_json(const RunSummary& summary);

/// Writes <out_dir>/rounds.csv and <out_dir>/summary.json-lines.
void write_outputs(const std::string& out_dir, const std::vector<RunSummary>& summaries, bool with_axis);

/// Shortest round-trip text for a double.
std::string format_number(double x);
/// RFC-4180 field quoting.
std::string csv_field(const std::string& text);

}  // namespace bhfl
