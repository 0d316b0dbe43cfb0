#pragma once

// Synchronous server/device simulation loop.
//
// One Engine owns one repetition: its data shards, estimator parameters,
// step size and seeds. run() executes rounds 0..T-1 and returns T+1 metric
// rows (row 0 is the initial point).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bhfl/config.hpp"
#include "bhfl/error.hpp"
#include "bhfl/robust_estimator.hpp"

namespace bhfl {

struct ParamSpace {
    ParamVector center;
    double radius = 10.0;
    void validate() const;
};

/// Euclidean projection onto the ball.
ParamVector project(ConstVec w, const ParamSpace& space);

struct RoundMetrics {
    std::size_t round = 0;
    double test_loss = 0.0;
    std::optional<double> param_err;
    std::size_t bytes_up = 0;       // sum of nominal message sizes
    std::size_t payload_bytes = 0;  // values only, no indices
    double grad_norm = 0.0;         // norm of the aggregated gradient
};

/// Snapshot handed to the observer after aggregation in every round.
struct RoundTrace {
    std::size_t round;
    const ParamVector& w;
    const std::vector<ParamVector>& honest;    // local estimates, before compression
    const std::vector<ParamVector>& received;  // what the server aggregated
    const std::vector<std::size_t>& byzantine;
    const ParamVector& aggregated;
};

class DivergenceError : public Error {
public:
    DivergenceError(std::size_t round, std::vector<RoundMetrics> partial);
    [[nodiscard]] std::size_t round() const noexcept { return round_; }
    [[nodiscard]] const std::vector<RoundMetrics>& partial() const noexcept { return partial_; }

private:
    std::size_t round_;
    std::vector<RoundMetrics> partial_;
};

struct RunSeeds {
    std::uint64_t data = 0;
    std::uint64_t w_star = 0;  // shared by all repetitions
    std::uint64_t init = 0;
    std::uint64_t adversary = 0;
    std::uint64_t compression = 0;

    /// Base seeds come from the explicit config seeds or from
    /// derive_seed(seed, stream); each is then XORed with rep.
    static RunSeeds for_repetition(const ExperimentConfig& config, std::size_t rep);
};

struct Problem {
    LossModel model;
    Dataset train;
    Dataset test;
    std::vector<Dataset> shards;
    std::optional<ParamVector> w_star;
};

/// Generates or loads the data and splits it over the devices.
Problem build_problem(const ExperimentConfig& config, const RunSeeds& seeds);

/// lambda_max of the pooled feature second-moment matrix; divided by 4 for
/// logistic loss, fixed at 4 for the MLP.
double estimate_smoothness(const LossModel& model, const Dataset& train);

struct RunResult {
    std::vector<RoundMetrics> rounds;
    ParamVector final_w;
};

class Engine {
public:
    Engine(ExperimentConfig config, const RunSeeds& seeds);
    Engine(ExperimentConfig config, Problem problem, const RunSeeds& seeds);

    void set_observer(std::function<void(const RoundTrace&)> observer) { observer_ = std::move(observer); }
    /// Worker threads for the per-device step; results do not depend on it.
    void set_device_threads(std::size_t threads) { device_threads_ = threads == 0 ? 1 : threads; }

    RunResult run();

    [[nodiscard]] const Problem& problem() const noexcept { return problem_; }
    [[nodiscard]] const ExperimentConfig& config() const noexcept { return config_; }
    [[nodiscard]] const EstimatorParams& estimator() const noexcept { return estimator_; }
    [[nodiscard]] const AggregatorSpec& aggregator() const noexcept { return aggregator_; }
    [[nodiscard]] const ParamSpace& space() const noexcept { return space_; }
    [[nodiscard]] double eta() const noexcept { return eta_; }
    [[nodiscard]] const ParamVector& initial_point() const noexcept { return w0_; }

private:
    void setup();
    RoundMetrics measure(std::size_t round, ConstVec w) const;
    void local_step(ConstVec w, std::vector<ParamVector>& honest) const;

    ExperimentConfig config_;
    Problem problem_;
    RunSeeds seeds_;
    EstimatorParams estimator_;
    AggregatorSpec aggregator_;
    ParamSpace space_;
    double eta_ = 0.0;
    ParamVector w0_;
    std::size_t device_threads_ = 1;
    std::function<void(const RoundTrace&)> observer_;
};

/// Convenience wrappers; the algorithm field of config is overridden.
RunResult run_bhgd(ExperimentConfig config, const RunSeeds& seeds);
RunResult run_bhgd_c(ExperimentConfig config, const RunSeeds& seeds);
RunResult run_baseline(ExperimentConfig config, const AggregatorSpec& aggregator, const RunSeeds& seeds);

}  // namespace bhfl
