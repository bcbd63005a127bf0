#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "taoi/model.hpp"
#include "taoi/simulator.hpp"

namespace taoi::cli {

/// Classifier presets: accuracy-derived misidentification rates.
struct Preset {
    std::string name;
    double p_a;
    double p_b;
};

const std::vector<Preset>& presets();
std::optional<Preset> find_preset(std::string_view name);

/// Parse error carrying file/line diagnostics; rendered as "file:line: msg".
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& file, int line, const std::string& msg);
};

/// One experiment: base parameters, an optional one-variable sweep with an
/// explicit value list, the policies to evaluate, and simulation settings.
struct ExperimentConfig {
    SystemParams base;
    std::optional<std::string> preset;    // overrides p_a/p_b when set
    std::optional<std::string> sweep;     // t_u | q | p_u | p_a | p_b
    std::vector<double> sweep_values;
    std::vector<std::string> policies{"optimal", "single_threshold", "always_transmit",
                                      "pre_identification"};
    SimConfig sim;
    int max_iterations = 200000;
    int omega_max = -1;  // default_omega_max(base) when negative

    /// Parameter tuple of one sweep point (index ignored without a sweep).
    SystemParams at(std::size_t point) const;
    std::size_t points() const { return sweep ? sweep_values.size() : 1; }
};

/// Flat "key = value" text, '#' comments, lists comma-separated.
ExperimentConfig parse_config(std::istream& in, const std::string& filename);
ExperimentConfig parse_config_file(const std::string& path);

struct OutputOptions {
    std::string format = "csv";  // csv | json
    std::string out_path;        // empty writes to stdout
    int jobs = 1;
    std::optional<std::uint64_t> seed_override;
};

/// Exit codes: 0 ok, 2 config error (thrown as ConfigError before these run),
/// 3 solver non-convergence.
int cmd_solve(const ExperimentConfig& config, const OutputOptions& opts, std::ostream& out);
int cmd_compare(const ExperimentConfig& config, const OutputOptions& opts, std::ostream& out);
int cmd_single_threshold(const ExperimentConfig& config, const OutputOptions& opts,
                         std::ostream& out);
int cmd_simulate(const ExperimentConfig& config, const OutputOptions& opts, std::ostream& out);
int cmd_presets(const OutputOptions& opts, std::ostream& out);

/// File-writing wrapper used by the executable.
int run_command(const std::string& command, const ExperimentConfig& config,
                const OutputOptions& opts);

/// 6-significant-digit formatting used for CSV cells.
std::string fmt_g(double value);

}  // namespace taoi::cli
