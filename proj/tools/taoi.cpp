#include <CLI11.hpp>

#include <iostream>

#include "taoi/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"taoi: transmission-policy solver and simulator for task-oriented age"};
    app.require_subcommand(1);

    std::string config_path;
    taoi::cli::OutputOptions opts;
    std::uint64_t seed = 0;
    bool seed_given = false;

    const auto add_common = [&](CLI::App* sub, bool needs_config) {
        auto* cfg = sub->add_option("--config", config_path, "experiment config file");
        if (needs_config) cfg->required()->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_path, "output path (stdout when omitted)");
        sub->add_option("--format", opts.format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--jobs", opts.jobs, "worker threads")->check(CLI::PositiveNumber);
    };

    add_common(app.add_subcommand("solve", "solve for the optimal policy (both RVI variants)"),
               true);
    add_common(app.add_subcommand("compare",
                                  "exact and simulated average age per policy per sweep point"),
               true);
    add_common(app.add_subcommand("single-threshold",
                                  "closed-form J(omega) table and threshold search"),
               true);
    add_common(app.add_subcommand("simulate", "Monte-Carlo estimates per policy per sweep point"),
               true);
    add_common(app.add_subcommand("presets", "classifier accuracy presets"), false);

    CLI11_PARSE(app, argc, argv);
    if (seed_given) opts.seed_override = seed;

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        taoi::cli::ExperimentConfig config;
        if (command != "presets") config = taoi::cli::parse_config_file(config_path);
        return taoi::cli::run_command(command, config, opts);
    } catch (const taoi::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
