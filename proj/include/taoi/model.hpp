#pragma once

#include <cstdint>
#include <vector>

namespace taoi {

/// All scalar inputs of the monitoring model.
///
/// t_u       packets (= slots) per data transmission
/// q         probability that a capture is task-relevant
/// p_u       per-packet delivery probability
/// p_a       false-positive rate of the on-device pre-identifier
/// p_b       false-negative rate of the on-device pre-identifier
/// delta_cap upper limit of the task-oriented age counter
/// epsilon   uniformization constant, 0 < epsilon <= 1
/// lambda_bar convergence tolerance used by the solvers
struct SystemParams {
    int t_u = 1;
    double q = 0.5;
    double p_u = 1.0;
    double p_a = 0.0;
    double p_b = 0.0;
    int delta_cap = 100;
    double epsilon = 1.0;
    double lambda_bar = 1e-4;

    /// Throws std::invalid_argument if any field is out of range
    /// (t_u >= 1, probabilities in [0,1] with p_u > 0, delta_cap >= 2*t_u,
    /// 0 < epsilon <= 1, lambda_bar > 0).
    void validate() const;
};

/// Quantities derived from SystemParams.
struct DerivedParams {
    double g = 0.0;        // Pr(F = 1)
    double p_hat_a = 0.0;  // Pr(Y = 0 | F = 1)
    double p_hat_b = 0.0;  // Pr(Y = 1 | F = 0)
    double p_succ = 0.0;   // p_u^{t_u}, data-level delivery probability
    double p_fail_1 = 0.0; // Pr(no reset | transmit, F = 1)
    double p_fail_0 = 0.0; // Pr(no reset | transmit, F = 0)

    /// Pr(reset | transmit, F = f).
    double reset_prob(int f) const { return f ? (1.0 - p_hat_a) * p_succ : p_hat_b * p_succ; }
    double fail_prob(int f) const { return f ? p_fail_1 : p_fail_0; }
};

/// Posteriors with zero-probability conditioning events are defined as 0;
/// the rows they would weight carry zero mass.
DerivedParams derive(const SystemParams& params);

enum class Action : int { Idle = 0, Transmit = 1 };

/// Age/pre-identification pair (delta in 1..delta_cap, f in {0,1}).
struct State {
    int delta = 1;
    int f = 0;

    friend bool operator==(const State&, const State&) = default;
};

struct TransitionEntry {
    State next;
    double prob = 0.0;
};

/// Number of slots spent by an action: 1 when idle, t_u when transmitting.
int slot_count(Action a, const SystemParams& params);

/// Age update given the action and the monitoring-success flag d.
/// d = 1 is only meaningful for Transmit; passing d = 1 with Idle throws.
int next_taoi(int delta, Action a, int d, const SystemParams& params);

/// Cost of one decision epoch: the age summed over the slots it spans,
/// L*delta + L*(L-1)/2.
double smdp_cost(const State& s, Action a, const SystemParams& params);

/// Per-slot cost rate of an epoch: delta + (L-1)/2.
double uniformized_cost(const State& s, Action a, const SystemParams& params);

/// Epoch-level transition distribution. Entries with identical next state
/// are merged; relevant when age arithmetic clamps at delta_cap.
std::vector<TransitionEntry> transition_distribution(const State& s, Action a,
                                                     const SystemParams& params,
                                                     const DerivedParams& derived);

/// Unit-step transition distribution of the uniformized chain. The self-loop
/// carries 1 - (eps/L)(1 - p(s|s,a)) so rows stay stochastic at the cap,
/// where the epoch-level kernel already has self mass.
std::vector<TransitionEntry> uniformized_distribution(const State& s, Action a,
                                                      const SystemParams& params,
                                                      const DerivedParams& derived,
                                                      double epsilon);

inline int state_count(const SystemParams& params) { return 2 * params.delta_cap; }
inline int state_index(const State& s) { return 2 * (s.delta - 1) + s.f; }
inline State state_at(int index) { return State{index / 2 + 1, index % 2}; }

}  // namespace taoi
