#include "bhfl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bhfl/error.hpp"

namespace bhfl {
namespace {

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(field, "'" + t + "' is not a number");
    if (!std::isfinite(value)) throw ConfigError(field, "must be finite");
    return value;
}

std::uint64_t parse_uint(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(field, "'" + t + "' is not a non-negative integer");
    return value;
}

bool parse_bool(const std::string& field, const std::string& text) {
    const std::string t = trim(text);
    if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
    if (t == "false" || t == "no" || t == "off" || t == "0") return false;
    throw ConfigError(field, "'" + t + "' is not a boolean");
}

std::optional<double> parse_auto_double(const std::string& field, const std::string& text) {
    if (trim(text) == "auto") return std::nullopt;
    return parse_double(field, text);
}

template <typename Enum>
Enum parse_enum(const std::string& field, const std::string& text,
                std::initializer_list<std::pair<const char*, Enum>> options) {
    const std::string t = trim(text);
    std::string names;
    for (const auto& [name, value] : options) {
        if (t == name) return value;
        names += names.empty() ? name : std::string(", ") + name;
    }
    throw ConfigError(field, "'" + t + "' is not one of: " + names);
}

using Setter = std::function<void(ExperimentConfig&, const std::string& field, const std::string& value)>;
using SectionTable = std::map<std::string, Setter>;

const std::map<std::string, SectionTable>& schema() {
    static const std::map<std::string, SectionTable> table = {
        {"experiment",
         {
             {"name", [](auto& c, auto&, auto& v) { c.name = trim(v); }},
             {"algorithm",
              [](auto& c, auto& f, auto& v) {
                  c.algorithm = parse_enum<Algorithm>(
                      f, v, {{"bhgd", Algorithm::Bhgd}, {"bhgd_c", Algorithm::BhgdC}, {"baseline", Algorithm::Baseline}});
              }},
             {"rounds", [](auto& c, auto& f, auto& v) { c.rounds = parse_uint(f, v); }},
             {"repetitions", [](auto& c, auto& f, auto& v) { c.repetitions = parse_uint(f, v); }},
             {"seed", [](auto& c, auto& f, auto& v) { c.seed = parse_uint(f, v); }},
             {"data_seed", [](auto& c, auto& f, auto& v) { c.data_seed = parse_uint(f, v); }},
             {"init_seed", [](auto& c, auto& f, auto& v) { c.init_seed = parse_uint(f, v); }},
             {"adversary_seed", [](auto& c, auto& f, auto& v) { c.adversary_seed = parse_uint(f, v); }},
             {"threads", [](auto& c, auto& f, auto& v) { c.threads = parse_uint(f, v); }},
             {"out_dir", [](auto& c, auto&, auto& v) { c.out_dir = trim(v); }},
         }},
        {"model",
         {
             {"kind",
              [](auto& c, auto& f, auto& v) {
                  c.model = parse_enum<ModelKind>(
                      f, v, {{"linear", ModelKind::Linear}, {"logistic", ModelKind::Logistic}, {"mlp", ModelKind::Mlp}});
              }},
             {"hidden", [](auto& c, auto& f, auto& v) { c.hidden = parse_uint(f, v); }},
             {"mlp_loss",
              [](auto& c, auto& f, auto& v) {
                  c.mlp_loss =
                      parse_enum<MlpLoss>(f, v, {{"squared", MlpLoss::Squared}, {"logistic", MlpLoss::Logistic}});
              }},
         }},
        {"data",
         {
             {"source",
              [](auto& c, auto& f, auto& v) {
                  c.data.source =
                      parse_enum<DataSource>(f, v, {{"synthetic", DataSource::Synthetic}, {"csv", DataSource::Csv}});
              }},
             {"dim", [](auto& c, auto& f, auto& v) { c.data.dim = parse_uint(f, v); }},
             {"train_size", [](auto& c, auto& f, auto& v) { c.data.train_size = parse_uint(f, v); }},
             {"test_size", [](auto& c, auto& f, auto& v) { c.data.test_size = parse_uint(f, v); }},
             {"feature_mu", [](auto& c, auto& f, auto& v) { c.data.feature_mu = parse_double(f, v); }},
             {"feature_sigma", [](auto& c, auto& f, auto& v) { c.data.feature_sigma = parse_auto_double(f, v); }},
             {"noise",
              [](auto& c, auto& f, auto& v) {
                  c.data.noise.kind = parse_enum<NoiseKind>(f, v,
                                                            {{"lognormal", NoiseKind::LogNormalCentered},
                                                             {"pareto", NoiseKind::ParetoCentered},
                                                             {"none", NoiseKind::None}});
              }},
             {"noise_mu", [](auto& c, auto& f, auto& v) { c.data.noise.mu = parse_double(f, v); }},
             {"noise_sigma", [](auto& c, auto& f, auto& v) { c.data.noise.sigma = parse_double(f, v); }},
             {"pareto_scale", [](auto& c, auto& f, auto& v) { c.data.noise.scale = parse_double(f, v); }},
             {"pareto_shape", [](auto& c, auto& f, auto& v) { c.data.noise.shape = parse_double(f, v); }},
             {"w_star",
              [](auto& c, auto& f, auto& v) {
                  c.data.w_star.clear();
                  if (trim(v) == "auto") return;
                  for (const auto& item : split_list(v)) c.data.w_star.push_back(parse_double(f, item));
              }},
             {"csv_path", [](auto& c, auto&, auto& v) { c.data.csv_path = trim(v); }},
             {"csv_features", [](auto& c, auto&, auto& v) { c.data.csv_features = split_list(v); }},
             {"csv_label", [](auto& c, auto&, auto& v) { c.data.csv_label = trim(v); }},
             {"standardize", [](auto& c, auto& f, auto& v) { c.data.standardize = parse_bool(f, v); }},
             {"add_bias", [](auto& c, auto& f, auto& v) { c.data.add_bias = parse_bool(f, v); }},
         }},
        {"system",
         {
             {"devices", [](auto& c, auto& f, auto& v) { c.devices = parse_uint(f, v); }},
             {"alpha", [](auto& c, auto& f, auto& v) { c.alpha = parse_double(f, v); }},
             {"beta", [](auto& c, auto& f, auto& v) { c.beta = parse_auto_double(f, v); }},
         }},
        {"estimator",
         {
             {"schedule",
              [](auto& c, auto& f, auto& v) {
                  c.estimator.schedule = parse_enum<EstimatorSchedule>(f, v,
                                                                       {{"theory", EstimatorSchedule::Theory},
                                                                        {"zeta", EstimatorSchedule::Zeta},
                                                                        {"manual", EstimatorSchedule::Manual}});
              }},
             {"v", [](auto& c, auto& f, auto& v) { c.estimator.v = parse_auto_double(f, v); }},
             {"diameter", [](auto& c, auto& f, auto& v) { c.estimator.diameter = parse_double(f, v); }},
             {"lipschitz", [](auto& c, auto& f, auto& v) { c.estimator.lipschitz = parse_double(f, v); }},
             {"zeta", [](auto& c, auto& f, auto& v) { c.estimator.zeta = parse_double(f, v); }},
             {"s", [](auto& c, auto& f, auto& v) { c.estimator.s = parse_double(f, v); }},
             {"tau", [](auto& c, auto& f, auto& v) { c.estimator.tau = parse_double(f, v); }},
         }},
        {"aggregator",
         {
             {"kind",
              [](auto& c, auto& f, auto& v) {
                  c.aggregator.kind = parse_enum<AggregatorKind>(f, v,
                                                                 {{"mean", AggregatorKind::Mean},
                                                                  {"coord_trimmed_mean", AggregatorKind::CoordTrimmedMean},
                                                                  {"norm_trimmed_mean", AggregatorKind::NormTrimmedMean},
                                                                  {"coord_median", AggregatorKind::CoordMedian},
                                                                  {"geometric_median", AggregatorKind::GeoMedian},
                                                                  {"krum", AggregatorKind::Krum},
                                                                  {"bulyan", AggregatorKind::Bulyan},
                                                                  {"mkrum", AggregatorKind::MKrum}});
              }},
             {"f",
              [](auto& c, auto& f, auto& v) {
                  if (trim(v) == "auto")
                      c.aggregator_f.reset();
                  else
                      c.aggregator_f = parse_uint(f, v);
              }},
             {"tol", [](auto& c, auto& f, auto& v) { c.aggregator.tol = parse_double(f, v); }},
             {"max_iter", [](auto& c, auto& f, auto& v) { c.aggregator.max_iter = parse_uint(f, v); }},
             {"momentum", [](auto& c, auto& f, auto& v) { c.aggregator.momentum = parse_double(f, v); }},
         }},
        {"compressor",
         {
             {"kind",
              [](auto& c, auto& f, auto& v) {
                  c.compressor.kind = parse_enum<CompressorKind>(f, v,
                                                                 {{"identity", CompressorKind::Identity},
                                                                  {"topk", CompressorKind::TopK},
                                                                  {"randk", CompressorKind::RandK},
                                                                  {"l1quant", CompressorKind::L1Quant}});
              }},
             {"k", [](auto& c, auto& f, auto& v) { c.compressor.k = parse_uint(f, v); }},
             {"p", [](auto& c, auto& f, auto& v) { c.compressor.p = parse_double(f, v); }},
         }},
        {"attack",
         {
             {"kind",
              [](auto& c, auto& f, auto& v) {
                  c.attack.kind = parse_enum<AttackKind>(f, v,
                                                         {{"none", AttackKind::None},
                                                          {"sign_flip", AttackKind::SignFlip},
                                                          {"large_value", AttackKind::LargeValue},
                                                          {"gaussian", AttackKind::GaussianNoise},
                                                          {"mean_shift", AttackKind::MeanShift}});
              }},
             {"scale", [](auto& c, auto& f, auto& v) { c.attack.sign_flip_scale = parse_double(f, v); }},
             {"magnitude", [](auto& c, auto& f, auto& v) { c.attack.magnitude = parse_double(f, v); }},
             {"sigma", [](auto& c, auto& f, auto& v) { c.attack.noise_sigma = parse_double(f, v); }},
             {"shift", [](auto& c, auto& f, auto& v) { c.attack.shift = parse_double(f, v); }},
             {"dynamic", [](auto& c, auto& f, auto& v) { c.attack.dynamic = parse_bool(f, v); }},
         }},
        {"optimizer",
         {
             {"eta", [](auto& c, auto& f, auto& v) { c.optimizer.eta = parse_auto_double(f, v); }},
             {"smoothness", [](auto& c, auto& f, auto& v) { c.optimizer.smoothness = parse_auto_double(f, v); }},
             {"radius", [](auto& c, auto& f, auto& v) { c.optimizer.radius = parse_double(f, v); }},
             {"init",
              [](auto& c, auto& f, auto& v) {
                  c.optimizer.init =
                      parse_enum<InitKind>(f, v, {{"zero", InitKind::Zero}, {"gaussian", InitKind::Gaussian}});
              }},
             {"init_scale", [](auto& c, auto& f, auto& v) { c.optimizer.init_scale = parse_double(f, v); }},
         }},
    };
    return table;
}

void fail_if(bool bad, const char* field, const std::string& reason) {
    if (bad) throw ConfigError(field, reason);
}

}  // namespace

std::string to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::Bhgd: return "bhgd";
        case Algorithm::BhgdC: return "bhgd_c";
        case Algorithm::Baseline: return "baseline";
    }
    return "unknown";
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Linear: return "linear";
        case ModelKind::Logistic: return "logistic";
        case ModelKind::Mlp: return "mlp";
    }
    return "unknown";
}

CompressorSpec parse_compressor(const std::string& text) {
    const std::string t = trim(text);
    const auto colon = t.find(':');
    const std::string head = t.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : t.substr(colon + 1);
    if (head == "identity" && arg.empty()) return CompressorSpec::identity();
    if (head == "l1quant" && arg.empty()) return CompressorSpec::l1_quant();
    if (head == "topk" && !arg.empty()) return CompressorSpec::top_k(parse_uint("compressor.k", arg));
    if (head == "randk" && !arg.empty()) return CompressorSpec::rand_k(parse_double("compressor.p", arg));
    throw ConfigError("compressor", "'" + t + "' is not identity, l1quant, topk:<k> or randk:<p>");
}

double ExperimentConfig::resolved_beta() const {
    if (beta) return *beta;
    return std::min(alpha + 0.05, 0.5 - 1e-9);
}

double ExperimentConfig::resolved_feature_sigma() const {
    if (data.feature_sigma) return *data.feature_sigma;
    const bool classification = model == ModelKind::Logistic || (model == ModelKind::Mlp && mlp_loss == MlpLoss::Logistic);
    return classification ? 3.0 : 0.78;
}

double ExperimentConfig::resolved_v() const {
    if (estimator.v) return *estimator.v;
    if (data.source == DataSource::Synthetic && data.noise.kind != NoiseKind::None) return data.noise.variance();
    return 1.0;
}

AttackSpec ExperimentConfig::resolved_attack() const {
    AttackSpec a = attack;
    a.alpha = alpha;
    return a;
}

AggregatorSpec ExperimentConfig::resolved_aggregator() const {
    AggregatorSpec a = aggregator;
    a.beta = resolved_beta();
    if (aggregator_f) {
        a.f = *aggregator_f;
    } else {
        a.f = byzantine_count(devices, alpha);
        if (a.kind == AggregatorKind::Bulyan) a.f = std::min(a.f, devices >= 3 ? (devices - 3) / 4 : 0);
    }
    return a;
}

void ExperimentConfig::validate_structure() const {
    fail_if(repetitions < 1, "experiment.repetitions", "must be >= 1");
    fail_if(threads < 1, "experiment.threads", "must be >= 1");
    fail_if(out_dir.empty(), "experiment.out_dir", "must not be empty");
    fail_if(model == ModelKind::Mlp && hidden < 1, "model.hidden", "must be >= 1");
    fail_if(model == ModelKind::Mlp && optimizer.init == InitKind::Zero, "optimizer.init",
            "mlp needs init = gaussian (a zero start never breaks hidden-unit symmetry)");

    fail_if(devices < 1, "system.devices", "must be >= 1");
    fail_if(!(alpha >= 0.0), "system.alpha", "must be >= 0");
    fail_if(!(alpha < 0.5), "system.alpha", "alpha must be < 0.5");
    const double b = resolved_beta();
    fail_if(!(b >= alpha), "system.beta", "beta must be >= alpha");
    fail_if(!(b < 0.5), "system.beta", "beta must be < 0.5");

    fail_if(data.train_size < 1, "data.train_size", "must be >= 1");
    fail_if(data.train_size % devices != 0, "data.train_size",
            "must be divisible by system.devices (n * m = N)");
    fail_if(data.test_size < 1, "data.test_size", "must be >= 1");
    if (data.source == DataSource::Synthetic) {
        fail_if(data.dim < 1, "data.dim", "must be >= 1");
        fail_if(!data.w_star.empty() && data.w_star.size() != data.dim, "data.w_star", "must have data.dim entries");
        fail_if(!(resolved_feature_sigma() >= 0.0), "data.feature_sigma", "must be >= 0");
        if (data.noise.kind == NoiseKind::LogNormalCentered)
            fail_if(!(data.noise.sigma > 0.0), "data.noise_sigma", "must be > 0");
        if (data.noise.kind == NoiseKind::ParetoCentered) {
            fail_if(!(data.noise.scale > 0.0), "data.pareto_scale", "must be > 0");
            fail_if(!(data.noise.shape > 2.0), "data.pareto_shape", "must be > 2 for a finite variance");
        }
    } else {
        fail_if(data.csv_path.empty(), "data.csv_path", "required when data.source = csv");
        fail_if(data.csv_label.empty(), "data.csv_label", "required when data.source = csv");
    }

    fail_if(!(resolved_v() > 0.0), "estimator.v", "must be > 0");
    fail_if(!(estimator.diameter > 0.0), "estimator.diameter", "must be > 0");
    fail_if(!(estimator.lipschitz > 0.0), "estimator.lipschitz", "must be > 0");
    if (estimator.schedule == EstimatorSchedule::Zeta)
        fail_if(!(estimator.zeta > 0.0 && estimator.zeta < 1.0), "estimator.zeta", "must lie in (0, 1)");
    if (estimator.schedule == EstimatorSchedule::Manual) {
        fail_if(!(estimator.s > 0.0), "estimator.s", "must be > 0");
        fail_if(!(estimator.tau > 0.0), "estimator.tau", "must be > 0");
    }

    fail_if(optimizer.eta && !(*optimizer.eta > 0.0), "optimizer.eta", "must be > 0");
    fail_if(optimizer.smoothness && !(*optimizer.smoothness > 0.0), "optimizer.smoothness", "must be > 0");
    fail_if(!(optimizer.radius > 0.0), "optimizer.radius", "must be > 0");
    fail_if(!(optimizer.init_scale >= 0.0), "optimizer.init_scale", "must be >= 0");

    fail_if(!(attack.noise_sigma >= 0.0), "attack.sigma", "must be >= 0");

    const auto check_rule = [&](const AggregatorSpec& spec, const char* field) {
        try {
            spec.validate(devices);
        } catch (const Error& e) {
            throw ConfigError(field, e.what());
        }
    };
    AggregatorSpec trimmed;
    trimmed.beta = b;
    switch (algorithm) {
        case Algorithm::Bhgd:
            trimmed.kind = AggregatorKind::CoordTrimmedMean;
            check_rule(trimmed, "system.beta");
            break;
        case Algorithm::BhgdC:
            trimmed.kind = AggregatorKind::NormTrimmedMean;
            check_rule(trimmed, "system.beta");
            if (compressor.kind == CompressorKind::TopK) {
                fail_if(compressor.k < 1, "compressor.k", "must be >= 1");
                if (data.source == DataSource::Synthetic && model != ModelKind::Mlp)
                    fail_if(compressor.k > data.dim, "compressor.k", "must be <= model dimension");
            }
            if (compressor.kind == CompressorKind::RandK)
                fail_if(!(compressor.p > 0.0 && compressor.p <= 1.0), "compressor.p", "must lie in (0, 1]");
            break;
        case Algorithm::Baseline:
            check_rule(resolved_aggregator(), "aggregator");
            break;
    }
}

void ExperimentConfig::validate() const {
    fail_if(rounds < 1, "experiment.rounds", "must be >= 1");
    validate_structure();
}

ExperimentConfig parse_config_text(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("line " + std::to_string(e.line()), e.message());
    }
    ExperimentConfig cfg;
    const auto& table = schema();
    for (const auto& [section, body] : tree) {
        const auto sec = table.find(section);
        if (body.empty() && !body.data().empty())
            throw ConfigError(section, "key outside of any [section]");
        if (sec == table.end()) throw ConfigError(section, "unknown section");
        for (const auto& [key, value] : body) {
            const std::string field = section + "." + key;
            const auto setter = sec->second.find(key);
            if (setter == sec->second.end()) throw ConfigError(field, "unknown key");
            setter->second(cfg, field, value.data());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("file", "cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

std::string to_ini(const ExperimentConfig& c) {
    std::ostringstream out;
    const auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("auto"); };
    const auto opt_seed = [](const std::optional<std::uint64_t>& v) {
        return v ? std::to_string(*v) : std::string("auto");
    };
    const auto join = [](const auto& items, auto fmt) {
        std::string s;
        for (const auto& item : items) s += (s.empty() ? "" : ",") + fmt(item);
        return s.empty() ? std::string("auto") : s;
    };
    const char* const noise_names[] = {"none", "lognormal", "pareto"};
    const char* const schedule_names[] = {"theory", "zeta", "manual"};
    const char* const compressor_names[] = {"identity", "topk", "randk", "l1quant"};

    out << "[experiment]\n"
        << "name = " << c.name << "\n"
        << "algorithm = " << to_string(c.algorithm) << "\n"
        << "rounds = " << c.rounds << "\n"
        << "repetitions = " << c.repetitions << "\n"
        << "seed = " << c.seed << "\n";
    if (c.data_seed) out << "data_seed = " << opt_seed(c.data_seed) << "\n";
    if (c.init_seed) out << "init_seed = " << opt_seed(c.init_seed) << "\n";
    if (c.adversary_seed) out << "adversary_seed = " << opt_seed(c.adversary_seed) << "\n";
    out << "threads = " << c.threads << "\n"
        << "out_dir = " << c.out_dir << "\n\n";

    out << "[model]\n"
        << "kind = " << to_string(c.model) << "\n"
        << "hidden = " << c.hidden << "\n"
        << "mlp_loss = " << (c.mlp_loss == MlpLoss::Squared ? "squared" : "logistic") << "\n\n";

    out << "[data]\n"
        << "source = " << (c.data.source == DataSource::Synthetic ? "synthetic" : "csv") << "\n"
        << "dim = " << c.data.dim << "\n"
        << "train_size = " << c.data.train_size << "\n"
        << "test_size = " << c.data.test_size << "\n"
        << "feature_mu = " << format_double(c.data.feature_mu) << "\n"
        << "feature_sigma = " << format_double(c.resolved_feature_sigma()) << "\n"
        << "noise = " << noise_names[static_cast<int>(c.data.noise.kind)] << "\n"
        << "noise_mu = " << format_double(c.data.noise.mu) << "\n"
        << "noise_sigma = " << format_double(c.data.noise.sigma) << "\n"
        << "pareto_scale = " << format_double(c.data.noise.scale) << "\n"
        << "pareto_shape = " << format_double(c.data.noise.shape) << "\n"
        << "w_star = " << join(c.data.w_star, format_double) << "\n";
    if (c.data.source == DataSource::Csv) {
        out << "csv_path = " << c.data.csv_path << "\n"
            << "csv_features = " << join(c.data.csv_features, [](const std::string& s) { return s; }) << "\n"
            << "csv_label = " << c.data.csv_label << "\n";
    }
    out << "standardize = " << (c.data.standardize ? "true" : "false") << "\n"
        << "add_bias = " << (c.data.add_bias ? "true" : "false") << "\n\n";

    out << "[system]\n"
        << "devices = " << c.devices << "\n"
        << "alpha = " << format_double(c.alpha) << "\n"
        << "beta = " << format_double(c.resolved_beta()) << "\n\n";

    out << "[estimator]\n"
        << "schedule = " << schedule_names[static_cast<int>(c.estimator.schedule)] << "\n"
        << "v = " << format_double(c.resolved_v()) << "\n"
        << "diameter = " << format_double(c.estimator.diameter) << "\n"
        << "lipschitz = " << format_double(c.estimator.lipschitz) << "\n"
        << "zeta = " << format_double(c.estimator.zeta) << "\n"
        << "s = " << format_double(c.estimator.s) << "\n"
        << "tau = " << format_double(c.estimator.tau) << "\n\n";

    const AggregatorSpec agg = c.resolved_aggregator();
    out << "[aggregator]\n"
        << "kind = " << to_string(agg.kind) << "\n"
        << "f = " << agg.f << "\n"
        << "tol = " << format_double(agg.tol) << "\n"
        << "max_iter = " << agg.max_iter << "\n"
        << "momentum = " << format_double(agg.momentum) << "\n\n";

    out << "[compressor]\n"
        << "kind = " << compressor_names[static_cast<int>(c.compressor.kind)] << "\n"
        << "k = " << c.compressor.k << "\n"
        << "p = " << format_double(c.compressor.p) << "\n\n";

    out << "[attack]\n"
        << "kind = " << to_string(c.attack.kind) << "\n"
        << "scale = " << format_double(c.attack.sign_flip_scale) << "\n"
        << "magnitude = " << format_double(c.attack.magnitude) << "\n"
        << "sigma = " << format_double(c.attack.noise_sigma) << "\n"
        << "shift = " << format_double(c.attack.shift) << "\n"
        << "dynamic = " << (c.attack.dynamic ? "true" : "false") << "\n\n";

    out << "[optimizer]\n"
        << "eta = " << opt(c.optimizer.eta) << "\n"
        << "smoothness = " << opt(c.optimizer.smoothness) << "\n"
        << "radius = " << format_double(c.optimizer.radius) << "\n"
        << "init = " << (c.optimizer.init == InitKind::Zero ? "zero" : "gaussian") << "\n"
        << "init_scale = " << format_double(c.optimizer.init_scale) << "\n";
    return out.str();
}

std::string config_digest(const ExperimentConfig& config) {
    const std::string text = to_ini(config);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : text) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

}  // namespace bhfl
