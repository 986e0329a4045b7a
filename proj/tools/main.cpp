#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "orbitset/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSizeLimit = 3;
constexpr int kExitInternal = 4;

orbitset::ExperimentConfig load_config(const std::string& config_path,
                                       const std::string& preset) {
    using orbitset::config_error;
    if (config_path.empty() && preset.empty())
        throw config_error("run needs a config file, a --preset name, or both");

    orbitset::ExperimentConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in)
            throw config_error("cannot open config file: " + config_path);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw config_error(std::string("config is not valid JSON: ") + e.what());
        }
        cfg = orbitset::parse_config(j);
        if (!preset.empty()) {
            cfg.family_spec = preset;
            orbitset::validate_config(cfg);
        }
    } else {
        cfg = orbitset::preset_config(preset);
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"orbit-set entropy and chaos experiments for finitely generated families "
                 "of interval and circle maps"};
    app.require_subcommand(1);

    std::string config_path, preset, out_dir;
    unsigned workers = 0;
    std::uint64_t seed = 0;
    bool print_config = false;

    CLI::App* run = app.add_subcommand("run", "run one experiment described by a JSON config");
    run->add_option("config", config_path, "experiment config file (JSON)");
    run->add_option("--preset", preset, "use a built-in family (see list-presets)");
    run->add_option("--out", out_dir, "output directory (overrides the config)");
    auto* workers_opt = run->add_option("--workers", workers, "worker thread count");
    auto* seed_opt = run->add_option("--seed", seed, "random seed (overrides the config)");
    run->add_flag("--print-config", print_config,
                  "print the fully resolved config as JSON and exit without running");

    CLI::App* list = app.add_subcommand("list-presets", "list the built-in named families");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (list->parsed()) {
            for (const auto& [name, description] : orbitset::preset_catalog()) {
                orbitset::preset_config(name); // every preset must yield a valid config
                std::printf("%-12s %s\n", name.c_str(), description.c_str());
            }
            return kExitOk;
        }

        orbitset::ExperimentConfig cfg = load_config(config_path, preset);
        if (!out_dir.empty())
            cfg.out_dir = out_dir;
        if (workers_opt->count() > 0)
            cfg.workers = workers;
        if (seed_opt->count() > 0)
            cfg.seed = seed;
        orbitset::validate_config(cfg);

        if (print_config) {
            std::printf("%s\n", orbitset::config_to_json(cfg).dump(2).c_str());
            return kExitOk;
        }
        orbitset::run_experiment(cfg);
        return kExitOk;
    } catch (const orbitset::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const orbitset::size_limit_error& e) {
        std::fprintf(stderr, "size limit: %s\n", e.what());
        return kExitSizeLimit;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    }
}
