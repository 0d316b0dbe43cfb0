#include "bhfl/engine.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <thread>

#include "bhfl/random.hpp"
#include "bhfl/simd.hpp"

namespace bhfl {
namespace {

enum : std::uint64_t {
    kStreamData = 1,
    kStreamInit = 2,
    kStreamAdversary = 3,
    kStreamCompression = 4,
    kStreamPartition = 5,
    kStreamSplit = 6,
};

bool all_finite(ConstVec v) {
    for (const double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

LossModel model_for(const ExperimentConfig& c, std::size_t features) {
    switch (c.model) {
        case ModelKind::Linear: return LossModel::linear(features);
        case ModelKind::Logistic: return LossModel::logistic(features);
        case ModelKind::Mlp: return LossModel::mlp(features, c.hidden, c.mlp_loss);
    }
    return LossModel::linear(features);
}

Problem synthetic_problem(const ExperimentConfig& c, const RunSeeds& seeds) {
    SyntheticSpec spec;
    const bool classification =
        c.model == ModelKind::Logistic || (c.model == ModelKind::Mlp && c.mlp_loss == MlpLoss::Logistic);
    spec.rule = classification ? LabelRule::Sign : LabelRule::Linear;
    spec.dim = c.data.dim;
    spec.feature_mu = c.data.feature_mu;
    spec.feature_sigma = c.resolved_feature_sigma();
    spec.noise = c.data.noise;
    spec.train_size = c.data.train_size;
    spec.test_size = c.data.test_size;
    spec.w_star = c.data.w_star;
    if (spec.w_star.empty()) {
        Rng rng(derive_seed(seeds.w_star, kStreamData));
        spec.w_star = unit_sphere_point(spec.dim, rng);
    }
    const TrainTest tt = classification ? gen_logistic(spec, seeds.data) : gen_linear(spec, seeds.data);

    Problem p;
    p.model = model_for(c, spec.dim);
    p.train = tt.train;
    p.test = tt.test;
    if (c.model != ModelKind::Mlp) p.w_star = spec.w_star;
    return p;
}

Problem csv_problem(const ExperimentConfig& c, const RunSeeds& seeds) {
    CsvSchema schema;
    schema.feature_columns = c.data.csv_features;
    schema.label_column = c.data.csv_label;
    Dataset all = load_csv(c.data.csv_path, schema);
    const std::size_t need = c.data.train_size + c.data.test_size;
    if (all.size() < need)
        throw ConfigError("data.train_size", "csv has " + std::to_string(all.size()) + " rows, need " +
                                                 std::to_string(need) + " for train + test");
    shuffle(all, derive_seed(seeds.data, kStreamSplit));

    Problem p;
    p.train.samples.assign(all.samples.begin(), all.samples.begin() + static_cast<std::ptrdiff_t>(c.data.train_size));
    p.test.samples.assign(all.samples.begin() + static_cast<std::ptrdiff_t>(c.data.train_size),
                          all.samples.begin() + static_cast<std::ptrdiff_t>(need));
    if (c.data.standardize) {
        const Standardizer st = Standardizer::fit(p.train);
        st.apply(p.train);
        st.apply(p.test);
    }
    if (c.data.add_bias) {
        append_bias(p.train);
        append_bias(p.test);
    }
    p.model = model_for(c, p.train.feature_dim());
    return p;
}

double squared_norm(ConstVec v) { return simd::squared_norm(v); }

}  // namespace

void ParamSpace::validate() const {
    require(radius > 0.0 && std::isfinite(radius), ErrorKind::InvalidConfig, "parameter radius must be > 0");
}

ParamVector project(ConstVec w, const ParamSpace& space) {
    space.validate();
    ParamVector out(w.begin(), w.end());
    if (space.center.empty()) {
        const double norm = std::sqrt(squared_norm(w));
        if (norm <= space.radius) return out;
        const double shrink = space.radius / norm;
        for (double& x : out) x *= shrink;
        return out;
    }
    require(space.center.size() == w.size(), ErrorKind::DimensionMismatch, "projection center has wrong dimension");
    const double dist = std::sqrt(simd::squared_distance(w, space.center));
    if (dist <= space.radius) return out;
    const double shrink = space.radius / dist;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = space.center[i] + shrink * (w[i] - space.center[i]);
    return out;
}

DivergenceError::DivergenceError(std::size_t round, std::vector<RoundMetrics> partial)
    : Error(ErrorKind::NonFiniteState, "non-finite state in round " + std::to_string(round)),
      round_(round),
      partial_(std::move(partial)) {}

RunSeeds RunSeeds::for_repetition(const ExperimentConfig& c, std::size_t rep) {
    const std::uint64_t r = rep;
    const std::uint64_t data_base = c.data_seed ? *c.data_seed : derive_seed(c.seed, kStreamData);
    RunSeeds s;
    s.w_star = data_base;
    s.data = data_base ^ r;
    s.init = (c.init_seed ? *c.init_seed : derive_seed(c.seed, kStreamInit)) ^ r;
    s.adversary = (c.adversary_seed ? *c.adversary_seed : derive_seed(c.seed, kStreamAdversary)) ^ r;
    s.compression = derive_seed(c.seed, kStreamCompression) ^ r;
    return s;
}

Problem build_problem(const ExperimentConfig& config, const RunSeeds& seeds) {
    Problem p = config.data.source == DataSource::Synthetic ? synthetic_problem(config, seeds)
                                                             : csv_problem(config, seeds);
    p.shards = partition(p.train, config.devices, derive_seed(seeds.data, kStreamPartition));
    return p;
}

double estimate_smoothness(const LossModel& model, const Dataset& train) {
    if (model.kind == ModelKind::Mlp) return 4.0;
    require(!train.empty(), ErrorKind::EmptyInput, "smoothness estimate needs training data");
    const auto d = static_cast<Eigen::Index>(train.feature_dim());
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
    for (const Sample& z : train.samples) {
        const Eigen::Map<const Eigen::VectorXd> x(z.x.data(), d);
        second.selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
    second = second.selfadjointView<Eigen::Lower>();
    second /= static_cast<double>(train.size());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(second, Eigen::EigenvaluesOnly);
    const double lambda = solver.eigenvalues().maxCoeff();
    return model.kind == ModelKind::Logistic ? lambda / 4.0 : lambda;
}

Engine::Engine(ExperimentConfig config, const RunSeeds& seeds) : config_(std::move(config)), seeds_(seeds) {
    config_.validate_structure();
    problem_ = build_problem(config_, seeds_);
    setup();
}

Engine::Engine(ExperimentConfig config, Problem problem, const RunSeeds& seeds)
    : config_(std::move(config)), problem_(std::move(problem)), seeds_(seeds) {
    config_.validate_structure();
    require(problem_.shards.size() == config_.devices, ErrorKind::DimensionMismatch,
            "problem has " + std::to_string(problem_.shards.size()) + " shards for " +
                std::to_string(config_.devices) + " devices");
    setup();
}

void Engine::setup() {
    const std::size_t d = problem_.model.dim();
    const std::size_t n = config_.samples_per_device();
    const std::size_t m = config_.devices;

    switch (config_.algorithm) {
        case Algorithm::Bhgd:
            aggregator_.kind = AggregatorKind::CoordTrimmedMean;
            aggregator_.beta = config_.resolved_beta();
            break;
        case Algorithm::BhgdC:
            aggregator_.kind = AggregatorKind::NormTrimmedMean;
            aggregator_.beta = config_.resolved_beta();
            config_.compressor.validate(d);
            break;
        case Algorithm::Baseline: aggregator_ = config_.resolved_aggregator(); break;
    }
    aggregator_.validate(m);
    config_.resolved_attack().validate(m);

    const double v = config_.resolved_v();
    switch (config_.estimator.schedule) {
        case EstimatorSchedule::Theory:
            estimator_ = default_params(n, m, d, v, config_.estimator.diameter, config_.estimator.lipschitz,
                                        config_.algorithm == Algorithm::BhgdC ? Variant::BhgdC : Variant::Bhgd);
            break;
        case EstimatorSchedule::Zeta: estimator_ = EstimatorParams::from_zeta(config_.estimator.zeta, n, v); break;
        case EstimatorSchedule::Manual:
            estimator_ = EstimatorParams::manual(config_.estimator.s, config_.estimator.tau, v);
            break;
    }
    estimator_.validate();

    if (config_.optimizer.eta) {
        eta_ = *config_.optimizer.eta;
    } else {
        const double smooth = config_.optimizer.smoothness ? *config_.optimizer.smoothness
                                                           : estimate_smoothness(problem_.model, problem_.train);
        require(smooth > 0.0 && std::isfinite(smooth), ErrorKind::InvalidConfig,
                "smoothness estimate is not positive; set optimizer.eta");
        eta_ = 1.0 / smooth;
    }

    space_.center.assign(d, 0.0);
    space_.radius = config_.optimizer.radius;
    space_.validate();

    w0_.assign(d, 0.0);
    if (config_.optimizer.init == InitKind::Gaussian) {
        Rng rng(seeds_.init);
        for (double& x : w0_) x = rng.normal(0.0, config_.optimizer.init_scale);
    }
    w0_ = project(w0_, space_);
}

RoundMetrics Engine::measure(std::size_t round, ConstVec w) const {
    RoundMetrics r;
    r.round = round;
    r.test_loss = empirical_risk(problem_.model, w, problem_.test);
    if (problem_.w_star) r.param_err = std::sqrt(simd::squared_distance(w, *problem_.w_star));
    return r;
}

void Engine::local_step(ConstVec w, std::vector<ParamVector>& honest) const {
    const bool robust = config_.algorithm != Algorithm::Baseline;
    const auto work = [&](std::size_t i) {
        honest[i] = robust ? robust_gradient(problem_.model, w, problem_.shards[i], estimator_)
                           : mean_gradient(problem_.model, w, problem_.shards[i]);
    };
    const std::size_t m = honest.size();
    const std::size_t workers = std::min(device_threads_, m);
    if (workers <= 1) {
        for (std::size_t i = 0; i < m; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < m; i += workers) work(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

RunResult Engine::run() {
    const std::size_t m = config_.devices;
    const std::size_t d = problem_.model.dim();
    const AttackSpec attack = config_.resolved_attack();
    const bool compressed = config_.algorithm == Algorithm::BhgdC;
    const bool momentum = config_.algorithm == Algorithm::Baseline && aggregator_.kind == AggregatorKind::MKrum;

    RunResult result;
    result.rounds.reserve(config_.rounds + 1);
    ParamVector w = w0_;
    result.rounds.push_back(measure(0, w));

    std::vector<ParamVector> honest(m);
    std::vector<ParamVector> uploads(m);
    std::vector<ParamVector> buffers(momentum ? m : 0, ParamVector(d, 0.0));
    std::vector<std::size_t> message_bytes(m);
    std::vector<std::size_t> message_payload(m);

    for (std::size_t t = 0; t < config_.rounds; ++t) {
        const std::vector<std::size_t> byzantine =
            select_byzantine(m, attack.alpha, attack.dynamic, t, seeds_.adversary);

        local_step(w, honest);

        if (momentum) {
            const double mu = aggregator_.momentum;
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < d; ++j) buffers[i][j] = mu * buffers[i][j] + (1.0 - mu) * honest[i][j];
                uploads[i] = buffers[i];
            }
        } else if (compressed) {
            const std::uint64_t round_seed = derive_seed(seeds_.compression, t);
            for (std::size_t i = 0; i < m; ++i) {
                const CompressedMessage msg = compress(config_.compressor, honest[i], derive_seed(round_seed, i));
                message_bytes[i] = msg.nominal_bytes();
                message_payload[i] = msg.payload_bytes();
                uploads[i] = decompress(msg);
            }
        } else {
            uploads = honest;
        }
        if (!compressed) {
            std::fill(message_bytes.begin(), message_bytes.end(), 8 * d);
            std::fill(message_payload.begin(), message_payload.end(), 8 * d);
        }

        std::vector<ParamVector> received = corrupt(attack, uploads, byzantine, derive_seed(seeds_.adversary ^ 0x5bd1e995ULL, t));
        // Byzantine devices ignore the compressor and send dense vectors.
        for (const std::size_t b : byzantine) {
            message_bytes[b] = 8 * d;
            message_payload[b] = 8 * d;
        }

        const ParamVector g = aggregate(aggregator_, received);
        if (observer_) observer_(RoundTrace{t, w, honest, received, byzantine, g});

        ParamVector next(d);
        for (std::size_t j = 0; j < d; ++j) next[j] = w[j] - eta_ * g[j];
        if (!all_finite(g) || !all_finite(next)) throw DivergenceError(t, std::move(result.rounds));
        w = project(next, space_);

        RoundMetrics row = measure(t + 1, w);
        for (std::size_t i = 0; i < m; ++i) {
            row.bytes_up += message_bytes[i];
            row.payload_bytes += message_payload[i];
        }
        row.grad_norm = std::sqrt(squared_norm(g));
        if (!std::isfinite(row.test_loss)) throw DivergenceError(t, std::move(result.rounds));
        result.rounds.push_back(row);
    }
    result.final_w = std::move(w);
    return result;
}

RunResult run_bhgd(ExperimentConfig config, const RunSeeds& seeds) {
    config.algorithm = Algorithm::Bhgd;
    return Engine(std::move(config), seeds).run();
}

RunResult run_bhgd_c(ExperimentConfig config, const RunSeeds& seeds) {
    config.algorithm = Algorithm::BhgdC;
    return Engine(std::move(config), seeds).run();
}

RunResult run_baseline(ExperimentConfig config, const AggregatorSpec& aggregator, const RunSeeds& seeds) {
    config.algorithm = Algorithm::Baseline;
    config.aggregator = aggregator;
    config.aggregator_f = aggregator.f;
    config.beta = aggregator.beta >= config.alpha ? std::optional<double>(aggregator.beta) : config.beta;
    Engine engine(std::move(config), seeds);
    return engine.run();
}

}  // namespace bhfl
