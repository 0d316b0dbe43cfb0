#include "bhfl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "json.hpp"

namespace bhfl {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
    std::string out = "\"";
    for (const char ch : text) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

namespace {

RepetitionOutcome run_repetition(const ExperimentConfig& config, std::size_t rep) {
    RepetitionOutcome outcome;
    outcome.rep = rep;
    try {
        Engine engine(config, RunSeeds::for_repetition(config, rep));
        outcome.rounds = engine.run().rounds;
    } catch (const DivergenceError& e) {
        outcome.ok = false;
        outcome.error = e.what();
        outcome.divergence_round = e.round();
        outcome.rounds = e.partial();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        outcome.ok = false;
        outcome.error = e.what();
    }
    return outcome;
}

}  // namespace

RunSummary summarize(const ExperimentConfig& config, std::vector<RepetitionOutcome> outcomes) {
    RunSummary s;
    s.digest = config_digest(config);
    s.name = config.name;
    s.repetitions = outcomes.size();

    std::vector<const RepetitionOutcome*> good;
    for (const auto& o : outcomes) {
        if (o.ok)
            good.push_back(&o);
        else
            ++s.failed;
    }
    if (!good.empty()) {
        const std::size_t rows = good.front()->rounds.size();
        const double count = static_cast<double>(good.size());
        s.mean_test_loss.assign(rows, 0.0);
        s.std_test_loss.assign(rows, 0.0);
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (const auto* o : good) sum += o->rounds[r].test_loss;
            const double mu = sum / count;
            double ss = 0.0;
            for (const auto* o : good) ss += (o->rounds[r].test_loss - mu) * (o->rounds[r].test_loss - mu);
            s.mean_test_loss[r] = mu;
            s.std_test_loss[r] = good.size() > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
        }
        s.final_loss.mean = s.mean_test_loss.back();
        s.final_loss.stddev = s.std_test_loss.back();
        s.final_loss.min = good.front()->rounds.back().test_loss;
        s.final_loss.max = s.final_loss.min;
        for (const auto* o : good) {
            s.final_loss.min = std::min(s.final_loss.min, o->rounds.back().test_loss);
            s.final_loss.max = std::max(s.final_loss.max, o->rounds.back().test_loss);
            for (const auto& row : o->rounds) {
                s.total_bytes += row.bytes_up;
                s.total_payload_bytes += row.payload_bytes;
            }
        }
    } else {
        const double nan = std::nan("");
        s.final_loss = {nan, nan, nan, nan};
    }
    s.outcomes = std::move(outcomes);
    return s;
}

RunSummary run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const std::size_t reps = config.repetitions;
    std::vector<RepetitionOutcome> outcomes(reps);
    const std::size_t workers = std::min(config.threads, reps);
    if (workers <= 1) {
        for (std::size_t r = 0; r < reps; ++r) outcomes[r] = run_repetition(config, r);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < workers; ++t) {
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < reps; r = next++) {
                    try {
                        outcomes[r] = run_repetition(config, r);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    RunSummary s = summarize(config, std::move(outcomes));
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return s;
}

ExperimentConfig apply_axis(const ExperimentConfig& config, const std::string& axis, const std::string& value) {
    ExperimentConfig c = config;
    const std::string field = "sweep." + axis;
    const auto number = [&]() {
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
        if (value.empty() || ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(x))
            throw ConfigError(field, "'" + value + "' is not a number");
        return x;
    };
    const auto count = [&]() {
        std::size_t x = 0;
        const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), x);
        if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
            throw ConfigError(field, "'" + value + "' is not a non-negative integer");
        return x;
    };
    if (axis == "alpha")
        c.alpha = number();
    else if (axis == "N")
        c.data.train_size = count();
    else if (axis == "m")
        c.devices = count();
    else if (axis == "sigma_x")
        c.data.feature_sigma = number();
    else if (axis == "compressor")
        c.compressor = parse_compressor(value);
    else
        throw ConfigError("sweep.axis", "'" + axis + "' is not one of: alpha, N, m, sigma_x, compressor");
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(field, "value " + value + " gives " + e.what());
    }
    return c;
}

std::vector<RunSummary> sweep(const ExperimentConfig& config, const std::string& axis,
                              const std::vector<std::string>& values) {
    if (values.empty()) throw ConfigError("sweep.values", "must not be empty");
    std::vector<ExperimentConfig> configs;
    configs.reserve(values.size());
    for (const auto& v : values) configs.push_back(apply_axis(config, axis, v));
    std::vector<RunSummary> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        RunSummary s = run_experiment(configs[i]);
        s.axis = axis;
        s.value = values[i];
        out.push_back(std::move(s));
    }
    return out;
}

void write_rounds_csv(std::ostream& out, const std::vector<RunSummary>& summaries, bool with_axis) {
    if (with_axis) out << "axis,value,";
    out << "rep,round,test_loss,param_err,bytes_up\r\n";
    for (const auto& s : summaries) {
        const std::string prefix = with_axis ? csv_field(s.axis) + "," + csv_field(s.value) + "," : "";
        for (const auto& o : s.outcomes) {
            for (const auto& row : o.rounds) {
                out << prefix << o.rep << ',' << row.round << ',' << format_number(row.test_loss) << ','
                    << (row.param_err ? format_number(*row.param_err) : "") << ',' << row.bytes_up << "\r\n";
            }
        }
    }
}

std::string summary_json(const RunSummary& s) {
    using nlohmann::json;
    const auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    json j;
    j["digest"] = s.digest;
    j["name"] = s.name;
    if (!s.axis.empty()) {
        j["axis"] = s.axis;
        j["value"] = s.value;
    }
    j["repetitions"] = s.repetitions;
    j["failed_repetitions"] = s.failed;
    json failures = json::array();
    for (const auto& o : s.outcomes) {
        if (o.ok) continue;
        json f;
        f["rep"] = o.rep;
        f["round"] = o.divergence_round ? json(*o.divergence_round) : json(nullptr);
        f["reason"] = o.error;
        failures.push_back(f);
    }
    j["failures"] = failures;
    json mean = json::array(), sd = json::array();
    for (std::size_t r = 0; r < s.mean_test_loss.size(); ++r) {
        mean.push_back(num(s.mean_test_loss[r]));
        sd.push_back(num(s.std_test_loss[r]));
    }
    j["mean_test_loss"] = mean;
    j["std_test_loss"] = sd;
    j["final_test_loss"] = {{"mean", num(s.final_loss.mean)},
                            {"std", num(s.final_loss.stddev)},
                            {"min", num(s.final_loss.min)},
                            {"max", num(s.final_loss.max)}};
    j["total_bytes"] = s.total_bytes;
    j["total_payload_bytes"] = s.total_payload_bytes;
    j["wall_seconds"] = s.wall_seconds;
    return j.dump();
}

void write_outputs(const std::string& out_dir, const std::vector<RunSummary>& summaries, bool with_axis) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream csv(fs::path(out_dir) / "rounds.csv", std::ios::binary);
        if (!csv) throw Error(ErrorKind::InvalidConfig, "cannot write " + out_dir + "/rounds.csv");
        write_rounds_csv(csv, summaries, with_axis);
    }
    std::ofstream jl(fs::path(out_dir) / "summary.json-lines", std::ios::binary);
    if (!jl) throw Error(ErrorKind::InvalidConfig, "cannot write " + out_dir + "/summary.json-lines");
    for (const auto& s : summaries) jl << summary_json(s) << '\n';
}

}  // namespace bhfl
