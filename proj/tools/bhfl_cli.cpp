// bhfl: run experiments described by an INI config.
//
//   bhfl run <config> [--out-dir DIR]
//   bhfl sweep <config> --axis alpha|N|m|sigma_x|compressor --values a,b,c
//   bhfl validate <config>
//
// Exit status: 0 ok, 1 configuration error, 2 every repetition diverged.

#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "bhfl/config.hpp"
#include "bhfl/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;

std::vector<std::string> split_values(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto first = item.find_first_not_of(" \t");
        const auto last = item.find_last_not_of(" \t");
        if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
    }
    return out;
}

void report(const std::vector<bhfl::RunSummary>& summaries) {
    for (const auto& s : summaries) {
        std::cerr << s.name;
        if (!s.axis.empty()) std::cerr << " [" << s.axis << "=" << s.value << "]";
        std::cerr << ": final test loss " << bhfl::format_number(s.final_loss.mean) << " +- "
                  << bhfl::format_number(s.final_loss.stddev) << " over " << (s.repetitions - s.failed) << "/"
                  << s.repetitions << " repetitions";
        if (s.failed > 0) std::cerr << " (" << s.failed << " diverged)";
        std::cerr << "\n";
    }
}

int finish(const std::vector<bhfl::RunSummary>& summaries, const std::string& out_dir, bool with_axis) {
    bhfl::write_outputs(out_dir, summaries, with_axis);
    report(summaries);
    for (const auto& s : summaries)
        if (!s.all_failed()) return 0;
    std::cerr << "error: every repetition diverged\n";
    return kExitDiverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Byzantine-resilient heavy-tailed federated learning simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string axis;
    std::string values;

    auto* run = app.add_subcommand("run", "Run all repetitions of one configuration");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--out-dir", out_dir, "Override experiment.out_dir");

    auto* sweep = app.add_subcommand("sweep", "Run one configuration per axis value");
    sweep->add_option("config", config_path, "Config file")->required();
    sweep->add_option("--axis", axis, "alpha, N, m, sigma_x or compressor")->required();
    sweep->add_option("--values", values, "Comma separated values")->required();
    sweep->add_option("--out-dir", out_dir, "Override experiment.out_dir");

    auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
    validate->add_option("config", config_path, "Config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        bhfl::ExperimentConfig config = bhfl::parse_config(config_path);
        if (!out_dir.empty()) config.out_dir = out_dir;
        if (*validate) {
            std::cout << bhfl::to_ini(config);
            return 0;
        }
        if (*run) return finish({bhfl::run_experiment(config)}, config.out_dir, false);
        return finish(bhfl::sweep(config, axis, split_values(values)), config.out_dir, true);
    } catch (const bhfl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
