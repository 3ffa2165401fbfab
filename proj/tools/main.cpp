#include "invpend/commands.hpp"
#include "invpend/config.hpp"

#include <CLI11.hpp>

#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

int main(int argc, char** argv) {
    using namespace invpend;

    CLI::App app{"Periodic and finite-time solutions of the inverted pendulum on a moving carriage"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    bool verbose = false;

    const std::map<std::string, std::pair<std::string, std::function<int(const RunConfig&,
                                                                         const CommandIo&)>>>
        commands = {
            {"solve-periodic",
             {"Verify a bound set and continue to the periodic orbit", cmd_solve_periodic}},
            {"verify-bounds", {"Compute and verify the bound set only", cmd_verify_bounds}},
            {"whitney-search", {"Search for a release point that survives the journey", cmd_whitney}},
            {"simulate", {"Integrate one trajectory", cmd_simulate}},
            {"degree", {"Degree of the autonomous field on the bound set", cmd_degree}},
        };
    for (const auto& [name, entry] : commands) {
        CLI::App* sub = app.add_subcommand(name, entry.first);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "Seed for sample jitter and spot checks");
        sub->add_flag("--verbose", verbose, "Print intermediate results");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    RunConfig config;
    try {
        config = load_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    }
    if (!out_dir.empty()) {
        config.output_dir = out_dir;
    }
    if (seed) {
        config.seed = *seed;
    }

    const CommandIo io{std::cout, std::cerr, verbose};
    for (const auto& [name, entry] : commands) {
        if (app.got_subcommand(name)) {
            try {
                return entry.second(config, io);
            } catch (const ConfigError& e) {
                std::cerr << "config error: " << e.what() << '\n';
                return kExitConfig;
            } catch (const std::exception& e) {
                std::cerr << "error: " << e.what() << '\n';
                return kExitConfig;
            }
        }
    }
    return kExitConfig;
}
