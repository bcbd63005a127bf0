#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "taoi/model.hpp"
#include "taoi/policy.hpp"

namespace taoi {

/// Converged value tables of the uniformized chain, indexed (delta-1, f).
/// h is normalized so that h(reference state) = 0.
struct ValueTable {
    Eigen::ArrayXXd h;
    Eigen::ArrayXXd v;
};

struct Thresholds {
    std::optional<int> omega0;  // F = 0; nullopt when the column never transmits
    std::optional<int> omega1;  // F = 1
};

struct SolveOptions {
    double epsilon = 1.0;
    double lambda_bar = 1e-4;
    int max_iterations = 200000;
    /// Reference state for the relative-value normalization; (t_u, 0) when unset.
    std::optional<State> reference_state;
    /// Convergence on the span seminorm of the h-difference instead of the sup-norm.
    bool span_seminorm = false;

    static SolveOptions from(const SystemParams& params) {
        SolveOptions o;
        o.epsilon = params.epsilon;
        o.lambda_bar = params.lambda_bar;
        return o;
    }
};

struct SolveResult {
    Policy policy = Policy::always_transmit();  // Table form after a solve
    Thresholds thresholds;      // least transmitting delta per F
    bool threshold_structured = false;  // each policy column monotone in delta
    double v_star = 0.0;        // V at the reference state; per-slot average age
    ValueTable values;
    int iterations = 0;
    std::int64_t min_ops = 0;   // argmin evaluations executed
    bool converged = false;
};

/// Relative value iteration on the uniformized chain: synchronous sweeps
/// Q_k(s,a) = cbar(s,a) + sum_s' pbar(s'|s,a) h_{k-1}(s'), V_k = min_a Q_k,
/// h_k = V_k - V_k(ref), stopping when the h-difference norm drops below
/// lambda_bar. Ties prefer Idle. One argmin is counted per state per sweep.
SolveResult rvi_solve(const SystemParams& params, const SolveOptions& options);

/// Same iteration, but states sweep in ascending delta (F = 0 column first)
/// and once an argmin picks Transmit at some delta, every larger delta of
/// that column inherits Transmit without an argmin; only executed argmins
/// count towards min_ops. Converges to the same policy and v_star whenever
/// the optimal policy is threshold-structured.
SolveResult threshold_rvi_solve(const SystemParams& params, const SolveOptions& options);

/// Thrown by extract_thresholds when some column is not monotone in delta.
struct NotThresholdStructured : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Least transmitting delta per F of a table policy; requires each column to
/// be monotone non-decreasing in delta, else throws NotThresholdStructured.
Thresholds extract_thresholds(const Policy& policy);

/// Long-run average age per slot of the epoch-level chain induced by the
/// policy: stationary distribution restricted to the recurrent class, then
/// sum pi*C / sum pi*L. Throws std::runtime_error if the chain has more than
/// one recurrent class.
double evaluate_policy_exact(const Policy& policy, const SystemParams& params);

/// Empirical checks of the structural properties of a converged h table.
struct StructureReport {
    bool monotone[2] = {false, false};          // h(.,F) non-decreasing in delta
    double max_monotone_violation = 0.0;
    bool concave_interior[2] = {false, false};  // second differences <= 0 below the cap region
    double max_convexity = 0.0;
    bool f_order_consistent = false;  // sign of h(.,1)-h(.,0) matches sign of (1-p_a)-p_b
    double max_f_order_violation = 0.0;
    // informational slope diagnostic (transmit step length), not a gate:
    // least interior slope per F against t_u / (eps * reset_prob(F))
    double min_slope[2] = {0.0, 0.0};
    double slope_bound[2] = {0.0, 0.0};
    bool all_ok() const {
        return monotone[0] && monotone[1] && concave_interior[0] && concave_interior[1] &&
               f_order_consistent;
    }
};

StructureReport check_structure(const ValueTable& values, const SystemParams& params,
                                double tol = 1e-9);

}  // namespace taoi
