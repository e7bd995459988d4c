#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "evilab/config.hpp"
#include "evilab/error.hpp"
#include "evilab/experiment.hpp"
#include "evilab/presets.hpp"

namespace {

using namespace evilab;

// A path to a YAML file, or the name of a shipped preset.
ExperimentConfig load(const std::string& what) {
    if (std::filesystem::exists(what)) return load_config(what);
    for (const auto& p : presets())
        if (p.name == what) return parse_config(p.yaml, "preset:" + p.name);
    throw ConfigError(what + ": no such file or preset");
}

int execute(Command command, const std::string& config, const std::string& out, bool strict) {
    const ExperimentConfig cfg = load(config);
    const Experiment ex = run_experiment(cfg, command, RunOptions{strict});
    std::string dir = out.empty() ? cfg.output : out;
    if (dir.empty()) dir = "out/" + cfg.name;
    write_artifacts(ex, dir);
    for (const auto& c : ex.report.checks) {
        std::printf("%-22s %-12s worst=%-12.4g tol=%-9.3g n=%zu\n", c.check_name.c_str(), to_string(c.verdict).c_str(),
                    c.worst_residual, c.tolerance, c.sweep_count);
    }
    std::printf("%s: %s (exit %d), report %s/report.json\n", cfg.name.c_str(), to_string(ex.report.verdict).c_str(),
                ex.report.exit_code, dir.c_str());
    return ex.report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical checks of EVI gradient flows for general costs"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

    std::string config, out, write_dir;
    bool strict = false;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("config", config, "Config file or preset name")->required();
        sub->add_option("-o,--out", out, "Output directory (default: the config's output)");
        sub->add_flag("--strict-tolerances", strict, "Drop the engineering slack from tolerances");
    };
    CLI::App* run = app.add_subcommand("run", "Run every check listed in the config");
    CLI::App* ladder = app.add_subcommand("ladder", "Run the dyadic ladder and its Cauchy check");
    CLI::App* certify = app.add_subcommand("certify", "Run the certificate checks listed in the config");
    CLI::App* transform = app.add_subcommand("transform", "Tabulate the c-transform of f on the search grid");
    for (auto* s : {run, ladder, certify, transform}) add_common(s);
    CLI::App* list = app.add_subcommand("presets", "List shipped presets");
    list->add_option("--write", write_dir, "Write every preset as <dir>/<name>.yaml");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

    try {
        if (*list) {
            if (!write_dir.empty()) std::filesystem::create_directories(write_dir);
            for (const auto& p : presets()) {
                std::printf("%s\n", p.name.c_str());
                if (!write_dir.empty()) {
                    std::ofstream f(std::filesystem::path(write_dir) / (p.name + ".yaml"), std::ios::binary);
                    f << p.yaml;
                }
            }
            return 0;
        }
        Command command = Command::run;
        if (*ladder) command = Command::ladder;
        if (*certify) command = Command::certify;
        if (*transform) command = Command::transform;
        return execute(command, config, out, strict);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
}
