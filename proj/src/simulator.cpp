#include "taoi/simulator.hpp"

#include <cmath>
#include <future>
#include <stdexcept>
#include <string>
#include <vector>

namespace taoi {

void SimConfig::validate() const {
    if (horizon_slots <= 0) throw std::invalid_argument("SimConfig: horizon_slots must be > 0");
    if (replications < 1) throw std::invalid_argument("SimConfig: replications must be >= 1");
    if (effective_warmup() >= horizon_slots)
        throw std::invalid_argument("SimConfig: warmup must be shorter than the horizon");
    if (jobs < 1) throw std::invalid_argument("SimConfig: jobs must be >= 1");
}

StepOutcome step(const State& s, const Policy& policy, RngStream& rng,
                 const SystemParams& params, const DerivedParams& derived,
                 bool aggregate_channel) {
    if (s.delta < 1 || s.delta > params.delta_cap)
        throw std::invalid_argument("step: delta out of range");

    StepOutcome out;
    out.y = rng.bernoulli(params.q) ? 1 : 0;
    out.f = rng.bernoulli(out.y ? 1.0 - params.p_b : params.p_a) ? 1 : 0;
    out.a = policy.action(State{s.delta, out.f});

    if (out.a == Action::Transmit) {
        if (aggregate_channel) {
            out.b = rng.bernoulli(derived.p_succ) ? 1 : 0;
        } else {
            int delivered = 1;
            for (int i = 0; i < params.t_u; ++i)
                delivered &= rng.bernoulli(params.p_u) ? 1 : 0;
            out.b = delivered;
        }
        out.d = out.b & out.y;
    }
    out.slots_consumed = slot_count(out.a, params);
    out.cost = smdp_cost(State{s.delta, out.f}, out.a, params);
    out.next_delta = next_taoi(s.delta, out.a, out.d, params);
    return out;
}

namespace {

struct RepResult {
    double cost = 0.0;
    std::int64_t slots = 0;
    std::int64_t epochs = 0;
    std::int64_t transmissions = 0;
    std::int64_t successes = 0;
    double delta_sum = 0.0;
};

RepResult run_replication(const SimConfig& config, const Policy& policy,
                          const SystemParams& params, const DerivedParams& derived, int rep) {
    RngStream rng(config.seed, static_cast<std::uint64_t>(rep));
    const State init = config.initial_state.value_or(State{params.t_u, 0});
    const std::int64_t warmup = config.effective_warmup();

    RepResult r;
    int delta = init.delta;
    std::int64_t slot = 0;
    while (slot < config.horizon_slots) {
        const StepOutcome o = step(State{delta, 0}, policy, rng, params, derived,
                                   config.aggregate_channel);
        if (slot >= warmup) {
            r.cost += o.cost;
            r.slots += o.slots_consumed;
            r.epochs += 1;
            r.delta_sum += delta;
            if (o.a == Action::Transmit) {
                r.transmissions += 1;
                r.successes += o.d;
            }
        }
        slot += o.slots_consumed;
        delta = o.next_delta;
    }
    return r;
}

}  // namespace

SimStats run(const SimConfig& config, const Policy& policy, const SystemParams& params) {
    config.validate();
    params.validate();
    const DerivedParams derived = derive(params);

    std::vector<RepResult> reps(config.replications);
    if (config.jobs > 1 && config.replications > 1) {
        std::vector<std::future<RepResult>> futures;
        futures.reserve(config.replications);
        for (int rep = 0; rep < config.replications; ++rep)
            futures.push_back(std::async(std::launch::async, run_replication, std::cref(config),
                                         std::cref(policy), std::cref(params), std::cref(derived),
                                         rep));
        for (int rep = 0; rep < config.replications; ++rep) reps[rep] = futures[rep].get();
    } else {
        for (int rep = 0; rep < config.replications; ++rep)
            reps[rep] = run_replication(config, policy, params, derived, rep);
    }

    SimStats stats;
    stats.replications = config.replications;
    std::vector<double> slot_means(reps.size()), epoch_means(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i) {
        slot_means[i] = reps[i].cost / static_cast<double>(reps[i].slots);
        epoch_means[i] = reps[i].delta_sum / static_cast<double>(reps[i].epochs);
        stats.epochs += reps[i].epochs;
        stats.transmissions += reps[i].transmissions;
        stats.successes += reps[i].successes;
        stats.slots += reps[i].slots;
    }

    const auto mean_ci = [](const std::vector<double>& xs) {
        const double n = static_cast<double>(xs.size());
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= n;
        if (xs.size() < 2) return std::pair<double, double>{mean, 0.0};
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double sd = std::sqrt(ss / (n - 1.0));
        return std::pair<double, double>{mean, 1.96 * sd / std::sqrt(n)};
    };
    std::tie(stats.mean_taoi_per_slot, stats.ci95) = mean_ci(slot_means);
    std::tie(stats.per_epoch_mean_delta, stats.per_epoch_ci95) = mean_ci(epoch_means);
    return stats;
}

Policy baseline(std::string_view name) {
    if (name == "always_transmit") return Policy::always_transmit();
    if (name == "pre_identification") return Policy::pre_identification();
    throw std::invalid_argument("baseline: unknown policy '" + std::string(name) + "'");
}

}  // namespace taoi
