#include "taoi/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "taoi/policy.hpp"
#include "taoi/single_threshold.hpp"
#include "taoi/solver.hpp"

namespace taoi::cli {

using nlohmann::json;

const std::vector<Preset>& presets() {
    static const std::vector<Preset> table{
        {"lenet", 0.3837, 0.4024},
        {"alexnet", 0.2124, 0.2433},
        {"vgg16", 0.1547, 0.1740},
        {"resnet18", 0.0483, 0.0648},
    };
    return table;
}

std::optional<Preset> find_preset(std::string_view name) {
    for (const auto& p : presets())
        if (p.name == name) return p;
    return std::nullopt;
}

ConfigError::ConfigError(const std::string& file, int line, const std::string& msg)
    : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg) {}

std::string fmt_g(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_number(const std::string& file, int line, const std::string& value) {
    try {
        std::size_t used = 0;
        const double x = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(file, line, "expected a number, got '" + value + "'");
    }
}

long long parse_int(const std::string& file, int line, const std::string& value) {
    const double x = parse_number(file, line, value);
    if (x != std::floor(x)) throw ConfigError(file, line, "expected an integer, got '" + value + "'");
    return static_cast<long long>(x);
}

void check_sweep_range(const std::string& file, int line, const std::string& key, double v) {
    if (key == "t_u") {
        if (v < 1 || v != std::floor(v))
            throw ConfigError(file, line, "sweep value for t_u must be an integer >= 1");
    } else if (key == "p_u") {
        if (v <= 0.0 || v > 1.0) throw ConfigError(file, line, "sweep value for p_u must lie in (0,1]");
    } else {
        if (v < 0.0 || v > 1.0)
            throw ConfigError(file, line, "sweep value for " + key + " must lie in [0,1]");
    }
}

}  // namespace

SystemParams ExperimentConfig::at(std::size_t point) const {
    SystemParams p = base;
    if (auto pre = preset ? find_preset(*preset) : std::nullopt) {
        p.p_a = pre->p_a;
        p.p_b = pre->p_b;
    }
    if (sweep) {
        const double v = sweep_values.at(point);
        if (*sweep == "t_u")
            p.t_u = static_cast<int>(v);
        else if (*sweep == "q")
            p.q = v;
        else if (*sweep == "p_u")
            p.p_u = v;
        else if (*sweep == "p_a")
            p.p_a = v;
        else if (*sweep == "p_b")
            p.p_b = v;
        else if (*sweep == "p_ab")
            p.p_a = p.p_b = v;  // joint misidentification sweep
    }
    return p;
}

ExperimentConfig parse_config(std::istream& in, const std::string& filename) {
    ExperimentConfig cfg;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string text = raw;
        if (const auto hash = text.find('#'); hash != std::string::npos) text.resize(hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos)
            throw ConfigError(filename, line, "expected 'key = value'");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError(filename, line, "expected 'key = value'");

        if (key == "t_u") cfg.base.t_u = static_cast<int>(parse_int(filename, line, value));
        else if (key == "q") cfg.base.q = parse_number(filename, line, value);
        else if (key == "p_u") cfg.base.p_u = parse_number(filename, line, value);
        else if (key == "p_a") cfg.base.p_a = parse_number(filename, line, value);
        else if (key == "p_b") cfg.base.p_b = parse_number(filename, line, value);
        else if (key == "delta_cap") cfg.base.delta_cap = static_cast<int>(parse_int(filename, line, value));
        else if (key == "epsilon") cfg.base.epsilon = parse_number(filename, line, value);
        else if (key == "lambda_bar") cfg.base.lambda_bar = parse_number(filename, line, value);
        else if (key == "max_iterations") cfg.max_iterations = static_cast<int>(parse_int(filename, line, value));
        else if (key == "omega_max") cfg.omega_max = static_cast<int>(parse_int(filename, line, value));
        else if (key == "preset") {
            if (!find_preset(value))
                throw ConfigError(filename, line, "unknown preset '" + value + "'");
            cfg.preset = value;
        } else if (key == "sweep") {
            static const char* allowed[] = {"t_u", "q", "p_u", "p_a", "p_b", "p_ab"};
            if (std::find(std::begin(allowed), std::end(allowed), value) == std::end(allowed))
                throw ConfigError(filename, line,
                                  "sweep must be one of t_u, q, p_u, p_a, p_b, p_ab");
            cfg.sweep = value;
        } else if (key == "sweep_values") {
            for (const auto& item : split_list(value))
                cfg.sweep_values.push_back(parse_number(filename, line, item));
        } else if (key == "policies") {
            cfg.policies = split_list(value);
            for (const auto& p : cfg.policies)
                if (p != "optimal" && p != "single_threshold" && p != "always_transmit" &&
                    p != "pre_identification")
                    throw ConfigError(filename, line, "unknown policy '" + p + "'");
        } else if (key == "horizon_slots") cfg.sim.horizon_slots = parse_int(filename, line, value);
        else if (key == "replications") cfg.sim.replications = static_cast<int>(parse_int(filename, line, value));
        else if (key == "warmup_slots") cfg.sim.warmup_slots = parse_int(filename, line, value);
        else if (key == "seed") cfg.sim.seed = static_cast<std::uint64_t>(parse_int(filename, line, value));
        else if (key == "aggregate_channel") cfg.sim.aggregate_channel = parse_int(filename, line, value) != 0;
        else throw ConfigError(filename, line, "unknown key '" + key + "'");
    }
    if (cfg.sweep && cfg.sweep_values.empty())
        throw ConfigError(filename, line, "sweep set but sweep_values is empty");
    if (!cfg.sweep && !cfg.sweep_values.empty())
        throw ConfigError(filename, line, "sweep_values given without a sweep variable");
    if (cfg.sweep)
        for (double v : cfg.sweep_values) check_sweep_range(filename, line, *cfg.sweep, v);

    // every sweep point must yield a valid parameter tuple
    for (std::size_t i = 0; i < cfg.points(); ++i) {
        try {
            cfg.at(i).validate();
        } catch (const std::exception& e) {
            throw ConfigError(filename, line,
                              "sweep point " + std::to_string(i) + " invalid: " + e.what());
        }
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "cannot open config file");
    return parse_config(in, path);
}

namespace {

std::uint64_t row_seed(std::uint64_t base, std::size_t point, std::size_t policy) {
    std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (point + 1)) ^
                      (0xc2b2ae3d27d4eb4fULL * (policy + 1));
    return splitmix64(s);
}

json params_json(const SystemParams& p) {
    return json{{"t_u", p.t_u},           {"q", p.q},
                {"p_u", p.p_u},           {"p_a", p.p_a},
                {"p_b", p.p_b},           {"delta_cap", p.delta_cap},
                {"epsilon", p.epsilon},   {"lambda_bar", p.lambda_bar}};
}

std::string param_cells(const SystemParams& p) {
    std::ostringstream os;
    os << p.t_u << ',' << fmt_g(p.q) << ',' << fmt_g(p.p_u) << ',' << fmt_g(p.p_a) << ','
       << fmt_g(p.p_b) << ',' << p.delta_cap << ',' << fmt_g(p.epsilon) << ','
       << fmt_g(p.lambda_bar);
    return os.str();
}

constexpr const char* kParamHeader = "t_u,q,p_u,p_a,p_b,delta_cap,epsilon,lambda_bar";

std::string omega_cell(const std::optional<int>& omega) {
    return omega ? std::to_string(*omega) : "inf";
}

json omega_field(const std::optional<int>& omega) {
    if (omega) return *omega;
    return nullptr;
}

std::string sweep_cells(const ExperimentConfig& cfg, std::size_t point) {
    if (!cfg.sweep) return ",";  // sweep_param,sweep_value empty
    return *cfg.sweep + "," + fmt_g(cfg.sweep_values[point]);
}

// run fn(0..n-1) on a small pool, results ordered by index
template <typename Fn>
void parallel_points(std::size_t n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    };
    std::vector<std::future<void>> pool;
    const int width = std::min<std::size_t>(jobs, n);
    for (int t = 0; t < width; ++t) pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();
}

SolveOptions solve_options(const ExperimentConfig& cfg, const SystemParams& p) {
    SolveOptions o = SolveOptions::from(p);
    o.max_iterations = cfg.max_iterations;
    return o;
}

}  // namespace

int cmd_solve(const ExperimentConfig& config, const OutputOptions& opts, std::ostream& out) {
    struct PointResult {
        SystemParams params;
        SolveResult plain;
        SolveResult thresh;
    };
    std::vector<PointResult> results(config.points());
    parallel_points(config.points(), opts.jobs, [&](std::size_t i) {
        const SystemParams p = config.at(i);
        const SolveOptions o = solve_options(config, p);
        results[i] = {p, rvi_solve(p, o), threshold_rvi_solve(p, o)};
    });

    bool all_converged = true;
    for (const auto& r : results) all_converged &= r.plain.converged && r.thresh.converged;

    if (opts.format == "json") {
        json doc = json::array();
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            auto telemetry = [](const SolveResult& s) {
                return json{{"v_star", s.v_star},
                            {"iterations", s.iterations},
                            {"min_ops", s.min_ops},
                            {"converged", s.converged},
                            {"threshold_structured", s.threshold_structured},
                            {"omega0", omega_field(s.thresholds.omega0)},
                            {"omega1", omega_field(s.thresholds.omega1)}};
            };
            json point{{"params", params_json(r.params)},
                       {"plain", telemetry(r.plain)},
                       {"threshold", telemetry(r.thresh)},
                       {"policy", json::parse(policy_to_json(r.plain.policy))}};
            if (config.sweep) point["sweep"] = {{"param", *config.sweep},
                                                {"value", config.sweep_values[i]}};
            doc.push_back(std::move(point));
        }
        out << doc.dump(2) << '\n';
    } else {
        out << "sweep_param,sweep_value," << kParamHeader
            << ",omega0,omega1,v_star,iterations_plain,min_ops_plain,iterations_threshold,"
               "min_ops_threshold,converged,threshold_structured\n";
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            out << sweep_cells(config, i) << ',' << param_cells(r.params) << ','
                << omega_cell(r.plain.thresholds.omega0) << ','
                << omega_cell(r.plain.thresholds.omega1) << ',' << fmt_g(r.plain.v_star) << ','
                << r.plain.iterations << ',' << r.plain.min_ops << ',' << r.thresh.iterations
                << ',' << r.thresh.min_ops << ',' << (r.plain.converged && r.thresh.converged)
                << ',' << r.plain.threshold_structured << '\n';
        }
    }
    return all_converged ? 0 : 3;
}

namespace {

int compare_impl(const ExperimentConfig& config, const OutputOptions& opts, std::ostream& out,
                 bool include_exact) {
    const std::uint64_t base_seed = opts.seed_override.value_or(config.sim.seed);
    struct Row {
        SystemParams params;
        std::string policy;
        std::optional<int> omega0, omega1;
        double exact = 0.0;
        SimStats sim;
        std::uint64_t seed = 0;
        bool converged = true;
    };
    const std::size_t n_pol = config.policies.size();
    std::vector<Row> rows(config.points() * n_pol);

    parallel_points(config.points(), opts.jobs, [&](std::size_t i) {
        const SystemParams p = config.at(i);
        for (std::size_t k = 0; k < n_pol; ++k) {
            Row& row = rows[i * n_pol + k];
            row.params = p;
            row.policy = config.policies[k];
            row.seed = row_seed(base_seed, i, k);

            Policy pol = Policy::always_transmit();
            if (row.policy == "optimal") {
                const SolveResult s = threshold_rvi_solve(p, solve_options(config, p));
                row.converged = s.converged;
                row.omega0 = s.thresholds.omega0;
                row.omega1 = s.thresholds.omega1;
                pol = s.policy;
            } else if (row.policy == "single_threshold") {
                const int omega_max = config.omega_max > 0 ? config.omega_max : default_omega_max(p);
                const ThresholdSearch ts = optimize_threshold(p, omega_max);
                row.omega0 = row.omega1 = ts.omega_star;
                pol = Policy::single_threshold(ts.omega_star);
            } else {
                pol = baseline(row.policy);
                if (row.policy == "always_transmit") row.omega0 = row.omega1 = 1;
                else row.omega1 = 1;
            }

            if (include_exact) row.exact = evaluate_policy_exact(pol, p);
            SimConfig sc = config.sim;
            sc.seed = row.seed;
            sc.jobs = config.points() > 1 ? 1 : opts.jobs;
            sc.initial_state = sc.initial_state.value_or(State{p.t_u, 0});
            row.sim = run(sc, pol, p);
        }
    });

    bool all_converged = true;
    for (const auto& r : rows) all_converged &= r.converged;

    if (opts.format == "json") {
        json doc = json::array();
        for (std::size_t i = 0; i < config.points(); ++i)
            for (std::size_t k = 0; k < n_pol; ++k) {
                const Row& r = rows[i * n_pol + k];
                json obj{{"params", params_json(r.params)},
                         {"policy", r.policy},
                         {"omega0", omega_field(r.omega0)},
                         {"omega1", omega_field(r.omega1)},
                         {"exact_taoi", include_exact ? json(r.exact) : json(nullptr)},
                         {"sim_mean_taoi", r.sim.mean_taoi_per_slot},
                         {"sim_ci95", r.sim.ci95},
                         {"per_epoch_mean_delta", r.sim.per_epoch_mean_delta},
                         {"per_epoch_ci95", r.sim.per_epoch_ci95},
                         {"epochs", r.sim.epochs},
                         {"transmissions", r.sim.transmissions},
                         {"successes", r.sim.successes},
                         {"seed", r.seed},
                         {"horizon_slots", config.sim.horizon_slots},
                         {"replications", config.sim.replications},
                         {"converged", r.converged}};
                if (config.sweep) obj["sweep"] = {{"param", *config.sweep},
                                                  {"value", config.sweep_values[i]}};
                doc.push_back(std::move(obj));
            }
        out << doc.dump(2) << '\n';
    } else {
        out << "sweep_param,sweep_value," << kParamHeader
            << ",policy,omega0,omega1,exact_taoi,sim_mean_taoi,sim_ci95,per_epoch_mean_delta,"
               "per_epoch_ci95,epochs,transmissions,successes,seed,horizon_slots,replications,"
               "converged\n";
        for (std::size_t i = 0; i < config.points(); ++i)
            for (std::size_t k = 0; k < n_pol; ++k) {
                const Row& r = rows[i * n_pol + k];
                out << sweep_cells(config, i) << ',' << param_cells(r.params) << ',' << r.policy
                    << ',' << omega_cell(r.omega0) << ',' << omega_cell(r.omega1) << ','
                    << (include_exact ? fmt_g(r.exact) : std::string()) << ','
                    << fmt_g(r.sim.mean_taoi_per_slot) << ','
                    << fmt_g(r.sim.ci95) << ',' << fmt_g(r.sim.per_epoch_mean_delta) << ','
                    << fmt_g(r.sim.per_epoch_ci95) << ',' << r.sim.epochs << ','
                    << r.sim.transmissions << ',' << r.sim.successes << ',' << r.seed << ','
                    << config.sim.horizon_slots << ',' << config.sim.replications << ','
                    << r.converged << '\n';
            }
    }
    return all_converged ? 0 : 3;
}

}  // namespace

int cmd_compare(const ExperimentConfig& config, const OutputOptions& opts, std::ostream& out) {
    return compare_impl(config, opts, out, true);
}

int cmd_single_threshold(const ExperimentConfig& config, const OutputOptions& opts,
                         std::ostream& out) {
    struct PointResult {
        SystemParams params;
        int omega_max;
        ThresholdSearch search;
        std::vector<std::pair<int, double>> table;
    };
    std::vector<PointResult> results(config.points());
    parallel_points(config.points(), opts.jobs, [&](std::size_t i) {
        PointResult& r = results[i];
        r.params = config.at(i);
        r.omega_max = config.omega_max > 0 ? config.omega_max : default_omega_max(r.params);
        r.search = optimize_threshold(r.params, r.omega_max);
        for (int omega = r.params.t_u; omega <= r.omega_max; ++omega)
            r.table.emplace_back(omega, average_cost_j(omega, r.params));
    });

    if (opts.format == "json") {
        json doc = json::array();
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            json tab = json::array();
            for (const auto& [omega, j_val] : r.table) tab.push_back({{"omega", omega}, {"j", j_val}});
            json obj{{"params", params_json(r.params)},
                     {"omega_max", r.omega_max},
                     {"omega_star", r.search.omega_star},
                     {"j_star", r.search.j_star},
                     {"brent_x", r.search.brent_x},
                     {"brent_omega", r.search.brent_omega},
                     {"scan_omega", r.search.scan_omega},
                     {"j_table", std::move(tab)}};
            if (config.sweep) obj["sweep"] = {{"param", *config.sweep},
                                              {"value", config.sweep_values[i]}};
            doc.push_back(std::move(obj));
        }
        out << doc.dump(2) << '\n';
    } else {
        out << "sweep_param,sweep_value," << kParamHeader
            << ",omega,j,omega_star,j_star,brent_omega,scan_omega\n";
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            for (const auto& [omega, j_val] : r.table)
                out << sweep_cells(config, i) << ',' << param_cells(r.params) << ',' << omega
                    << ',' << fmt_g(j_val) << ',' << r.search.omega_star << ','
                    << fmt_g(r.search.j_star) << ',' << r.search.brent_omega << ','
                    << r.search.scan_omega << '\n';
        }
    }
    return 0;
}

int cmd_simulate(const ExperimentConfig& config, const OutputOptions& opts, std::ostream& out) {
    return compare_impl(config, opts, out, false);
}

int cmd_presets(const OutputOptions& opts, std::ostream& out) {
    if (opts.format == "json") {
        json doc = json::array();
        for (const auto& p : presets())
            doc.push_back({{"name", p.name}, {"p_a", p.p_a}, {"p_b", p.p_b}});
        out << doc.dump(2) << '\n';
    } else {
        out << "name,p_a,p_b\n";
        for (const auto& p : presets())
            out << p.name << ',' << fmt_g(p.p_a) << ',' << fmt_g(p.p_b) << '\n';
    }
    return 0;
}

int run_command(const std::string& command, const ExperimentConfig& config,
                const OutputOptions& opts) {
    const auto dispatch = [&](std::ostream& out) -> int {
        if (command == "solve") return cmd_solve(config, opts, out);
        if (command == "compare") return cmd_compare(config, opts, out);
        if (command == "single-threshold") return cmd_single_threshold(config, opts, out);
        if (command == "simulate") return cmd_simulate(config, opts, out);
        if (command == "presets") return cmd_presets(opts, out);
        throw std::invalid_argument("unknown command '" + command + "'");
    };
    if (opts.out_path.empty()) return dispatch(std::cout);
    std::ofstream file(opts.out_path);
    if (!file) throw std::runtime_error("cannot open output file '" + opts.out_path + "'");
    return dispatch(file);
}

}  // namespace taoi::cli
