#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "taoi/model.hpp"
#include "taoi/policy.hpp"
#include "taoi/rng.hpp"

namespace taoi {

struct SimConfig {
    std::int64_t horizon_slots = 1000000;
    int replications = 8;
    std::uint64_t seed = 0x5eedULL;
    /// Starting state; (t_u, 0) when unset. The pre-identification bit is
    /// redrawn at every epoch, so only the age component matters.
    std::optional<State> initial_state;
    /// Slots discarded from the front of each replication; 5% of the horizon
    /// when negative.
    std::int64_t warmup_slots = -1;
    /// Draw one Bernoulli(p_u^t_u) per transmission instead of t_u per-packet
    /// draws; same law for the epoch outcome, fewer RNG calls.
    bool aggregate_channel = false;
    int jobs = 1;

    std::int64_t effective_warmup() const {
        return warmup_slots >= 0 ? warmup_slots : horizon_slots / 20;
    }
    void validate() const;
};

/// Everything observable about one decision epoch.
struct StepOutcome {
    int y = 0;          // relevance of the capture
    int f = 0;          // pre-identification result acted upon
    Action a = Action::Idle;
    int b = 0;          // data-level delivery (0 when idle)
    int d = 0;          // monitoring success = b & y under Transmit
    int slots_consumed = 1;
    double cost = 0.0;  // age summed over the epoch's slots
    int next_delta = 1;
};

struct SimStats {
    double mean_taoi_per_slot = 0.0;
    double ci95 = 0.0;  // half-width across replications
    std::int64_t epochs = 0;
    std::int64_t transmissions = 0;
    std::int64_t successes = 0;
    double per_epoch_mean_delta = 0.0;
    double per_epoch_ci95 = 0.0;
    std::int64_t slots = 0;
    int replications = 0;
};

/// One decision epoch from age s.delta: draws the capture (Y, F), applies the
/// policy, runs the packetized channel when transmitting, and updates the age.
StepOutcome step(const State& s, const Policy& policy, RngStream& rng,
                 const SystemParams& params, const DerivedParams& derived,
                 bool aggregate_channel = false);

/// Slot-driven Monte-Carlo estimate of the per-slot average age (and the
/// per-epoch mean age at decision instants) under a policy. Replications run
/// on independent substreams and aggregate deterministically.
SimStats run(const SimConfig& config, const Policy& policy, const SystemParams& params);

/// Reference policies: "always_transmit" | "pre_identification".
Policy baseline(std::string_view name);

}  // namespace taoi
