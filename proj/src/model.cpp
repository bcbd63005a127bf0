#include "taoi/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace taoi {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("SystemParams: " + what);
}

}  // namespace

void SystemParams::validate() const {
    require(t_u >= 1, "t_u must be >= 1");
    require(q >= 0.0 && q <= 1.0, "q must lie in [0,1]");
    require(p_u > 0.0 && p_u <= 1.0, "p_u must lie in (0,1]");
    require(p_a >= 0.0 && p_a <= 1.0, "p_a must lie in [0,1]");
    require(p_b >= 0.0 && p_b <= 1.0, "p_b must lie in [0,1]");
    require(delta_cap >= 2 * t_u, "delta_cap must be >= 2*t_u");
    require(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0,1]");
    require(lambda_bar > 0.0, "lambda_bar must be > 0");
}

DerivedParams derive(const SystemParams& params) {
    params.validate();
    DerivedParams d;
    d.g = params.p_a * (1.0 - params.q) + (1.0 - params.p_b) * params.q;

    const double den_a = (1.0 - params.q) * params.p_a + params.q * (1.0 - params.p_b);
    d.p_hat_a = den_a > 0.0 ? (1.0 - params.q) * params.p_a / den_a : 0.0;

    const double den_b = (1.0 - params.q) * (1.0 - params.p_a) + params.q * params.p_b;
    d.p_hat_b = den_b > 0.0 ? params.q * params.p_b / den_b : 0.0;

    d.p_succ = std::pow(params.p_u, params.t_u);
    d.p_fail_1 = 1.0 - d.p_succ + d.p_hat_a * d.p_succ;
    d.p_fail_0 = 1.0 - d.p_hat_b * d.p_succ;
    return d;
}

int slot_count(Action a, const SystemParams& params) {
    return a == Action::Transmit ? params.t_u : 1;
}

int next_taoi(int delta, Action a, int d, const SystemParams& params) {
    if (delta < 1 || delta > params.delta_cap)
        throw std::invalid_argument("next_taoi: delta out of range");
    if (d != 0 && a == Action::Idle)
        throw std::invalid_argument("next_taoi: monitoring success requires a transmission");
    if (a == Action::Idle) return std::min(delta + 1, params.delta_cap);
    if (d) return params.t_u;
    return std::min(delta + params.t_u, params.delta_cap);
}

double smdp_cost(const State& s, Action a, const SystemParams& params) {
    const long long len = slot_count(a, params);
    return static_cast<double>(len * s.delta + len * (len - 1) / 2);
}

double uniformized_cost(const State& s, Action a, const SystemParams& params) {
    const int len = slot_count(a, params);
    return s.delta + 0.5 * (len - 1);
}

namespace {

void push_merged(std::vector<TransitionEntry>& out, State next, double prob) {
    for (auto& e : out) {
        if (e.next == next) {
            e.prob += prob;
            return;
        }
    }
    out.push_back({next, prob});
}

}  // namespace

std::vector<TransitionEntry> transition_distribution(const State& s, Action a,
                                                     const SystemParams& params,
                                                     const DerivedParams& derived) {
    std::vector<TransitionEntry> out;
    out.reserve(4);
    const double g = derived.g;
    if (a == Action::Idle) {
        const int up = std::min(s.delta + 1, params.delta_cap);
        push_merged(out, State{up, 1}, g);
        push_merged(out, State{up, 0}, 1.0 - g);
        return out;
    }
    const double reset = derived.reset_prob(s.f);
    const double fail = derived.fail_prob(s.f);
    const int up = std::min(s.delta + params.t_u, params.delta_cap);
    push_merged(out, State{params.t_u, 1}, reset * g);
    push_merged(out, State{params.t_u, 0}, reset * (1.0 - g));
    push_merged(out, State{up, 1}, fail * g);
    push_merged(out, State{up, 0}, fail * (1.0 - g));
    return out;
}

std::vector<TransitionEntry> uniformized_distribution(const State& s, Action a,
                                                      const SystemParams& params,
                                                      const DerivedParams& derived,
                                                      double epsilon) {
    if (epsilon <= 0.0 || epsilon > 1.0)
        throw std::invalid_argument("uniformized_distribution: epsilon must lie in (0,1]");
    const double rate = epsilon / slot_count(a, params);
    double self_mass = 0.0;
    std::vector<TransitionEntry> out;
    out.reserve(5);
    for (const auto& e : transition_distribution(s, a, params, derived)) {
        if (e.next == s)
            self_mass += e.prob;
        else
            push_merged(out, e.next, rate * e.prob);
    }
    // 1 - rate*(1 - p(s|s,a)): the epoch-level self mass folds into the loop.
    push_merged(out, s, 1.0 - rate * (1.0 - self_mass));
    return out;
}

}  // namespace taoi
