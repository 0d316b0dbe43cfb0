#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "bhfl/experiment.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace bhfl;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny() {
    ExperimentConfig c;
    c.rounds = 15;
    c.repetitions = 4;
    c.data.train_size = 200;
    c.data.test_size = 50;
    c.devices = 5;
    c.data.dim = 4;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> cells;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::path(BHFL_TEST_TMP) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(BHFL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("summary statistics are recomputable from the csv") {
    const auto s = run_experiment(tiny());
    CHECK(s.repetitions == 4);
    CHECK(s.failed == 0);
    CHECK(s.mean_test_loss.size() == 16);
    std::ostringstream out;
    write_rounds_csv(out, {s}, false);
    const auto rows = parse_csv(out.str());
    REQUIRE(rows.size() == 1 + 4 * 16);
    CHECK(rows[0] == std::vector<std::string>{"rep", "round", "test_loss", "param_err", "bytes_up"});
    std::map<std::size_t, std::vector<double>> by_round;
    std::size_t bytes = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        by_round[std::stoul(rows[i][1])].push_back(std::strtod(rows[i][2].c_str(), nullptr));
        bytes += std::stoul(rows[i][4]);
    }
    CHECK(bytes == s.total_bytes);
    for (const auto& [r, losses] : by_round) {
        REQUIRE(losses.size() == 4);
        double sum = 0;
        for (double x : losses) sum += x;
        const double mean = sum / 4;
        double ss = 0;
        for (double x : losses) ss += (x - mean) * (x - mean);
        CHECK(s.mean_test_loss[r] == mean);
        CHECK(s.std_test_loss[r] == doctest::Approx(std::sqrt(ss / 3)).epsilon(1e-12));
    }
    CHECK(s.final_loss.mean == s.mean_test_loss.back());
    CHECK(s.final_loss.min <= s.final_loss.mean);
    CHECK(s.final_loss.max >= s.final_loss.mean);
}

TEST_CASE("single repetition summary equals the run") {
    auto c = tiny();
    c.repetitions = 1;
    const auto s = run_experiment(c);
    const auto direct = Engine(c, RunSeeds::for_repetition(c, 0)).run();
    CHECK(s.final_loss.mean == direct.rounds.back().test_loss);
    CHECK(s.final_loss.stddev == 0.0);
    for (std::size_t r = 0; r < direct.rounds.size(); ++r) CHECK(s.mean_test_loss[r] == direct.rounds[r].test_loss);
}

TEST_CASE("outputs are byte-identical across reruns and thread counts") {
    auto c = tiny();
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    write_outputs(a.string(), {run_experiment(c)}, false);
    c.threads = 3;
    write_outputs(b.string(), {run_experiment(c)}, false);
    CHECK(slurp(a / "rounds.csv") == slurp(b / "rounds.csv"));
    const auto j = nlohmann::json::parse(slurp(a / "summary.json-lines"));
    CHECK(j["repetitions"] == 4);
    CHECK(j["digest"] == config_digest(tiny()));
    CHECK(j["mean_test_loss"].size() == 16);
}

TEST_CASE("failed repetitions are recorded, not fatal") {
    auto c = tiny();
    c.algorithm = Algorithm::Baseline;
    c.aggregator.kind = AggregatorKind::Mean;
    c.attack.kind = AttackKind::LargeValue;
    c.attack.magnitude = 1e308;
    c.optimizer.eta = 1e10;
    const auto s = run_experiment(c);
    CHECK(s.failed == 4);
    CHECK(s.all_failed());
    REQUIRE(s.outcomes[0].divergence_round.has_value());
    const auto j = nlohmann::json::parse(summary_json(s));
    CHECK(j["failures"].size() == 4);
    CHECK(j["final_test_loss"]["mean"].is_null());
}

TEST_CASE("sweeps") {
    const auto c = tiny();
    const auto one = sweep(c, "alpha", {"0.2"});
    REQUIRE(one.size() == 1);
    CHECK(one[0].mean_test_loss == run_experiment(c).mean_test_loss);
    const auto many = sweep(c, "m", {"5", "10"});
    CHECK(many[1].outcomes[0].rounds.size() == 16);
    std::ostringstream out;
    write_rounds_csv(out, many, true);
    const auto rows = parse_csv(out.str());
    CHECK(rows[0][0] == "axis");
    CHECK(rows[1][0] == "m");
    CHECK(rows.back()[1] == "10");
    CHECK(sweep(c, "compressor", {"identity"}).size() == 1);
    CHECK(sweep(c, "sigma_x", {"0.1"})[0].failed == 0);
    CHECK(sweep(c, "N", {"400"})[0].failed == 0);
    CHECK_THROWS_AS(sweep(c, "alpha", {"0.7"}), ConfigError);
    CHECK_THROWS_AS(sweep(c, "m", {"7"}), ConfigError);
    CHECK_THROWS_AS(sweep(c, "speed", {"1"}), ConfigError);
    CHECK_THROWS_AS(sweep(c, "alpha", {"x"}), ConfigError);
}

TEST_CASE("csv quoting and number formatting") {
    CHECK(csv_field("plain") == "plain");
    CHECK(csv_field("a,b") == "\"a,b\"");
    CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(format_number(0.1) == "0.1");
    CHECK(std::strtod(format_number(1.0 / 3).c_str(), nullptr) == 1.0 / 3);
}

TEST_CASE("command line exit codes and outputs") {
    const auto dir = scratch("cli");
    const auto cfg = dir / "run.ini";
    std::ofstream(cfg) << "[experiment]\nrounds = 5\nrepetitions = 2\nout_dir = " << (dir / "out").string()
                       << "\n[data]\ntrain_size = 100\n";
    CHECK(run_cli("validate " + cfg.string()) == 0);
    CHECK(run_cli("run " + cfg.string()) == 0);
    const auto first = slurp(dir / "out" / "rounds.csv");
    CHECK(run_cli("run " + cfg.string()) == 0);
    CHECK(slurp(dir / "out" / "rounds.csv") == first);
    CHECK(parse_csv(first).size() == 1 + 2 * 6);
    CHECK(run_cli("sweep " + cfg.string() + " --axis alpha --values 0,0.1 --out-dir " + (dir / "sw").string()) == 0);
    CHECK(parse_csv(slurp(dir / "sw" / "rounds.csv")).size() == 1 + 2 * 2 * 6);
    std::size_t lines = 0;
    std::ifstream jl(dir / "sw" / "summary.json-lines");
    for (std::string line; std::getline(jl, line);) {
        CHECK_NOTHROW(nlohmann::json::parse(line));
        ++lines;
    }
    CHECK(lines == 2);

    const auto bad = dir / "bad.ini";
    std::ofstream(bad) << "[system]\nalpha = 0.6\n";
    CHECK(run_cli("run " + bad.string()) == 1);
    CHECK(run_cli("validate " + bad.string()) == 1);
    CHECK(run_cli("sweep " + cfg.string() + " --axis bogus --values 1") == 1);
    CHECK(run_cli("run /nonexistent.ini") == 1);
    CHECK(run_cli("") == 1);

    const auto div = dir / "div.ini";
    std::ofstream(div) << "[experiment]\nalgorithm = baseline\nrounds = 5\nrepetitions = 2\nout_dir = "
                       << (dir / "div").string()
                       << "\n[attack]\nkind = large_value\nmagnitude = 1e308\n[optimizer]\neta = 1e10\n";
    CHECK(run_cli("run " + div.string()) == 2);
}
