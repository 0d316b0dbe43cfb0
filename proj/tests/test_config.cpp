#include <string>

#include "bhfl/config.hpp"
#include "bhfl/error.hpp"
#include "doctest.h"

using namespace bhfl;

namespace {

std::string field_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

std::string reason_of(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.reason();
    }
    return "";
}

}  // namespace

TEST_CASE("empty config gives documented defaults") {
    const auto c = parse_config_text("");
    CHECK(c.algorithm == Algorithm::Bhgd);
    CHECK(c.rounds == 200);
    CHECK(c.repetitions == 10);
    CHECK(c.devices == 10);
    CHECK(c.samples_per_device() == 100);
    CHECK(c.data.dim == 10);
    CHECK(c.alpha == 0.2);
    CHECK(c.resolved_beta() == doctest::Approx(0.25));
    CHECK(c.resolved_feature_sigma() == 0.78);
    CHECK(c.resolved_v() == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(c.attack.kind == AttackKind::SignFlip);
    CHECK(c.attack.sign_flip_scale == 5.0);
    CHECK(c.optimizer.radius == 10.0);
    CHECK(c.estimator.diameter == 10.0);
}

TEST_CASE("full config round-trips through to_ini") {
    const std::string text = R"(
# comment line
[experiment]
name = demo
algorithm = bhgd_c
rounds = 50
repetitions = 3
seed = 9
data_seed = 11
threads = 2
out_dir = out/demo

[model]
kind = logistic

[data]
dim = 6
train_size = 600
test_size = 50
noise = pareto
pareto_shape = 4.0
w_star = 1, 0, 0, 0, 0, 0

[system]
devices = 12
alpha = 0.1
beta = 0.2

[estimator]
schedule = zeta
zeta = 0.05
v = 2.5

[compressor]
kind = topk
k = 3

[attack]
kind = mean_shift
shift = 1.5
dynamic = yes

[optimizer]
eta = 0.05
init = gaussian
init_scale = 0.01
)";
    const auto c = parse_config_text(text);
    CHECK(c.name == "demo");
    CHECK(c.algorithm == Algorithm::BhgdC);
    CHECK(c.rounds == 50);
    CHECK(*c.data_seed == 11);
    CHECK(c.model == ModelKind::Logistic);
    CHECK(c.resolved_feature_sigma() == 3.0);
    CHECK(c.data.noise.kind == NoiseKind::ParetoCentered);
    CHECK(c.data.w_star.size() == 6);
    CHECK(c.devices == 12);
    CHECK(c.resolved_beta() == 0.2);
    CHECK(c.estimator.schedule == EstimatorSchedule::Zeta);
    CHECK(c.resolved_v() == 2.5);
    CHECK(c.compressor.kind == CompressorKind::TopK);
    CHECK(c.compressor.k == 3);
    CHECK(c.attack.kind == AttackKind::MeanShift);
    CHECK(c.attack.dynamic);
    CHECK(*c.optimizer.eta == 0.05);
    CHECK(c.out_dir == "out/demo");

    const auto again = parse_config_text(to_ini(c));
    CHECK(to_ini(again) == to_ini(c));
    CHECK(config_digest(again) == config_digest(c));
    CHECK(config_digest(c).size() == 16);
    auto other = c;
    other.rounds = 51;
    CHECK(config_digest(other) != config_digest(c));
    CHECK(to_ini(parse_config_text("")) == to_ini(parse_config_text(to_ini(parse_config_text("")))));
}

TEST_CASE("config errors name the field") {
    CHECK(field_of("[system]\nalpha = 0.6\n") == "system.alpha");
    CHECK(reason_of("[system]\nalpha = 0.6\n") == "alpha must be < 0.5");
    CHECK(field_of("[system]\nalpha = 0.3\nbeta = 0.2\n") == "system.beta");
    CHECK(field_of("[system]\nalpah = 0.3\n") == "system.alpah");
    CHECK(reason_of("[system]\nalpah = 0.3\n") == "unknown key");
    CHECK(field_of("[sytem]\nalpha = 0.3\n") == "sytem");
    CHECK(field_of("[experiment]\nrounds = ten\n") == "experiment.rounds");
    CHECK(field_of("[experiment]\nrounds = 0\n") == "experiment.rounds");
    CHECK(field_of("[experiment]\nrepetitions = 0\n") == "experiment.repetitions");
    CHECK(field_of("[experiment]\nalgorithm = sgd\n") == "experiment.algorithm");
    CHECK(field_of("[data]\ntrain_size = 1001\n") == "data.train_size");
    CHECK(field_of("[optimizer]\neta = -1\n") == "optimizer.eta");
    CHECK(field_of("[optimizer]\nradius = 0\n") == "optimizer.radius");
    CHECK(field_of("[data]\nnoise = pareto\npareto_shape = 2\n") == "data.pareto_shape");
    CHECK(field_of("[data]\nw_star = 1,2\n") == "data.w_star");
    CHECK(field_of("[data]\nsource = csv\n") == "data.csv_path");
    CHECK(field_of("[experiment]\nalgorithm = baseline\n[aggregator]\nkind = bulyan\nf = 2\n") == "aggregator");
    CHECK(field_of("[experiment]\nalgorithm = bhgd_c\n[compressor]\nkind = topk\nk = 11\n") == "compressor.k");
    CHECK(field_of("[model]\nkind = mlp\n") == "optimizer.init");
    CHECK(field_of("[attack]\ndynamic = maybe\n") == "attack.dynamic");
    CHECK(field_of("[estimator]\nschedule = zeta\nzeta = 1.5\n") == "estimator.zeta");
    CHECK(field_of("[system]\nalpha = 0.45\n") == "system.beta");
    CHECK(field_of("[experiment]\nrounds = 5\nrounds = 6\n") != "");
    CHECK_THROWS_AS(parse_config("/nonexistent/config.ini"), ConfigError);
}

TEST_CASE("auto values and defaults for the Krum family") {
    const auto c = parse_config_text("[experiment]\nalgorithm = baseline\n[aggregator]\nkind = bulyan\n");
    CHECK(c.resolved_aggregator().f == 1);
    const auto k = parse_config_text("[experiment]\nalgorithm = baseline\n[aggregator]\nkind = krum\nf = auto\n");
    CHECK(k.resolved_aggregator().f == 2);
    const auto b = parse_config_text("[system]\nbeta = auto\n[optimizer]\neta = auto\n");
    CHECK_FALSE(b.optimizer.eta.has_value());
    CHECK(b.resolved_beta() == doctest::Approx(0.25));
}

TEST_CASE("compressor shorthand") {
    CHECK(parse_compressor("topk:5").k == 5);
    CHECK(parse_compressor("randk:0.25").p == 0.25);
    CHECK(parse_compressor("identity").kind == CompressorKind::Identity);
    CHECK(parse_compressor("l1quant").kind == CompressorKind::L1Quant);
    CHECK_THROWS_AS(parse_compressor("topk"), ConfigError);
    CHECK_THROWS_AS(parse_compressor("gzip"), ConfigError);
    CHECK(to_string(ErrorKind::ConfigError) == "ConfigError");
}
