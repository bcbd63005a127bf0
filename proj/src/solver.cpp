#include "taoi/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace taoi {

namespace {

// One synchronous RVI sweep over the uniformized chain. h holds h_{k-1} on
// entry and h_k on exit. Returns the norm of the h-difference.
struct SweepContext {
    const SystemParams& params;
    const DerivedParams& derived;
    double epsilon;
    int ref_row;
    int ref_col;
    bool shortcut;
};

double sweep(const SweepContext& ctx, Eigen::ArrayXXd& h, Eigen::ArrayXXd& v,
             Eigen::ArrayXXi& actions, std::int64_t& min_ops, bool span) {
    const int cap = ctx.params.delta_cap;
    const int t_u = ctx.params.t_u;
    const double eps = ctx.epsilon;
    const double g = ctx.derived.g;

    // F-marginal continuation value m(delta) = (1-g) h(delta,0) + g h(delta,1).
    Eigen::ArrayXd m = (1.0 - g) * h.col(0) + g * h.col(1);
    const double m_reset = m(t_u - 1);

    const double idle_keep = 1.0 - eps;
    const double tx_rate = eps / t_u;
    const double tx_keep = 1.0 - tx_rate;

    for (int f = 0; f < 2; ++f) {
        const double w_reset = ctx.derived.reset_prob(f);
        const double w_fail = ctx.derived.fail_prob(f);
        int omega = std::numeric_limits<int>::max();  // reset each sweep
        for (int i = 0; i < cap; ++i) {
            const int delta = i + 1;
            const double m_up1 = m(std::min(i + 1, cap - 1));
            const double m_uptu = m(std::min(i + t_u, cap - 1));
            const double q_tx = delta + 0.5 * (t_u - 1) + tx_keep * h(i, f) +
                                tx_rate * (w_reset * m_reset + w_fail * m_uptu);
            double value;
            int a;
            if (ctx.shortcut && delta >= omega) {
                a = 1;
                value = q_tx;
            } else {
                const double q_idle = delta + idle_keep * h(i, f) + eps * m_up1;
                ++min_ops;
                a = q_tx < q_idle ? 1 : 0;  // ties resolve to Idle
                value = a ? q_tx : q_idle;
                if (a && ctx.shortcut) omega = delta;
            }
            v(i, f) = value;
            actions(i, f) = a;
        }
    }

    const double v_ref = v(ctx.ref_row, ctx.ref_col);
    double max_diff = -std::numeric_limits<double>::infinity();
    double min_diff = std::numeric_limits<double>::infinity();
    for (int f = 0; f < 2; ++f) {
        for (int i = 0; i < cap; ++i) {
            const double hn = v(i, f) - v_ref;
            const double d = hn - h(i, f);
            max_diff = std::max(max_diff, d);
            min_diff = std::min(min_diff, d);
            h(i, f) = hn;
        }
    }
    return span ? max_diff - min_diff : std::max(std::abs(max_diff), std::abs(min_diff));
}

Thresholds lenient_thresholds(const Eigen::ArrayXXi& actions) {
    Thresholds t;
    for (int f = 0; f < 2; ++f) {
        std::optional<int>& omega = f ? t.omega1 : t.omega0;
        for (int i = 0; i < actions.rows(); ++i) {
            if (actions(i, f) == 1) {
                omega = i + 1;
                break;
            }
        }
    }
    return t;
}

bool column_monotone(const Eigen::ArrayXXi& actions, int f) {
    for (int i = 1; i < actions.rows(); ++i)
        if (actions(i, f) < actions(i - 1, f)) return false;
    return true;
}

SolveResult solve_impl(const SystemParams& params, const SolveOptions& options, bool shortcut) {
    params.validate();
    if (options.max_iterations < 1)
        throw std::invalid_argument("SolveOptions: max_iterations must be >= 1");
    if (options.epsilon <= 0.0 || options.epsilon > 1.0)
        throw std::invalid_argument("SolveOptions: epsilon must lie in (0,1]");
    if (options.lambda_bar <= 0.0)
        throw std::invalid_argument("SolveOptions: lambda_bar must be > 0");

    const DerivedParams derived = derive(params);
    const State ref = options.reference_state.value_or(State{params.t_u, 0});
    if (ref.delta < 1 || ref.delta > params.delta_cap || ref.f < 0 || ref.f > 1)
        throw std::invalid_argument("SolveOptions: reference state out of range");

    const int cap = params.delta_cap;
    SolveResult res;
    Eigen::ArrayXXd h = Eigen::ArrayXXd::Zero(cap, 2);
    Eigen::ArrayXXd v = Eigen::ArrayXXd::Zero(cap, 2);
    Eigen::ArrayXXi actions = Eigen::ArrayXXi::Zero(cap, 2);

    const SweepContext ctx{params, derived, options.epsilon, ref.delta - 1, ref.f, shortcut};
    for (int k = 1; k <= options.max_iterations; ++k) {
        const double diff = sweep(ctx, h, v, actions, res.min_ops, options.span_seminorm);
        res.iterations = k;
        if (diff < options.lambda_bar) {
            res.converged = true;
            break;
        }
    }

    res.v_star = v(ref.delta - 1, ref.f);
    res.policy = Policy::table(actions);
    res.thresholds = lenient_thresholds(actions);
    res.threshold_structured = column_monotone(actions, 0) && column_monotone(actions, 1);
    res.values = ValueTable{std::move(h), std::move(v)};
    return res;
}

}  // namespace

SolveResult rvi_solve(const SystemParams& params, const SolveOptions& options) {
    return solve_impl(params, options, false);
}

SolveResult threshold_rvi_solve(const SystemParams& params, const SolveOptions& options) {
    return solve_impl(params, options, true);
}

Thresholds extract_thresholds(const Policy& policy) {
    // Closed forms are monotone by construction.
    if (policy.kind() != Policy::Kind::Table) return Thresholds{policy.omega0(), policy.omega1()};

    const Eigen::ArrayXXi& actions = policy.actions();
    Thresholds t;
    for (int f = 0; f < 2; ++f) {
        std::optional<int> omega;
        for (int i = 0; i < actions.rows(); ++i) {
            if (actions(i, f) == 1) {
                omega = i + 1;
                break;
            }
        }
        if (omega) {
            for (int i = *omega - 1; i < actions.rows(); ++i) {
                if (actions(i, f) != 1)
                    throw NotThresholdStructured(
                        "policy column F=" + std::to_string(f) + " is not monotone: idle at delta=" +
                        std::to_string(i + 1) + " above first transmit delta=" +
                        std::to_string(*omega));
            }
        }
        (f ? t.omega1 : t.omega0) = omega;
    }
    return t;
}

namespace {

// Closed strongly connected components of the directed graph, Tarjan with an
// explicit stack. Returns the component id per node and flags per component.
struct SccResult {
    std::vector<int> comp;
    int n_comps = 0;
};

SccResult tarjan_scc(const std::vector<std::vector<int>>& adj) {
    const int n = static_cast<int>(adj.size());
    SccResult r;
    r.comp.assign(n, -1);
    std::vector<int> index(n, -1), low(n, 0), on(n, 0);
    std::vector<int> stack;
    int next_index = 0;

    struct Frame {
        int node;
        std::size_t edge;
    };
    for (int root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on[root] = 1;
        while (!call.empty()) {
            Frame& fr = call.back();
            if (fr.edge < adj[fr.node].size()) {
                const int w = adj[fr.node][fr.edge++];
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on[w] = 1;
                    call.push_back({w, 0});
                } else if (on[w]) {
                    low[fr.node] = std::min(low[fr.node], index[w]);
                }
            } else {
                if (low[fr.node] == index[fr.node]) {
                    while (true) {
                        const int w = stack.back();
                        stack.pop_back();
                        on[w] = 0;
                        r.comp[w] = r.n_comps;
                        if (w == fr.node) break;
                    }
                    ++r.n_comps;
                }
                const int done = fr.node;
                call.pop_back();
                if (!call.empty())
                    low[call.back().node] = std::min(low[call.back().node], low[done]);
            }
        }
    }
    return r;
}

}  // namespace

double evaluate_policy_exact(const Policy& policy, const SystemParams& params) {
    params.validate();
    const DerivedParams derived = derive(params);
    const int n = state_count(params);
    if (n > 6000)
        throw std::invalid_argument(
            "evaluate_policy_exact: dense stationary solve limited to delta_cap <= 3000");

    std::vector<Action> act(n);
    std::vector<std::vector<TransitionEntry>> rows(n);
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
        const State s = state_at(i);
        act[i] = policy.action(s);
        rows[i] = transition_distribution(s, act[i], params, derived);
        for (const auto& e : rows[i])
            if (e.prob > 0.0) adj[i].push_back(state_index(e.next));
    }

    const SccResult scc = tarjan_scc(adj);
    std::vector<char> closed(scc.n_comps, 1);
    for (int i = 0; i < n; ++i)
        for (int w : adj[i])
            if (scc.comp[w] != scc.comp[i]) closed[scc.comp[i]] = 0;

    int closed_comp = -1;
    for (int c = 0; c < scc.n_comps; ++c) {
        if (!closed[c]) continue;
        if (closed_comp != -1)
            throw std::runtime_error("evaluate_policy_exact: chain has multiple recurrent classes");
        closed_comp = c;
    }
    if (closed_comp == -1) throw std::runtime_error("evaluate_policy_exact: no recurrent class");

    std::vector<int> nodes;
    std::vector<int> local(n, -1);
    for (int i = 0; i < n; ++i)
        if (scc.comp[i] == closed_comp) {
            local[i] = static_cast<int>(nodes.size());
            nodes.push_back(i);
        }
    const int m = static_cast<int>(nodes.size());

    // pi P = pi, sum pi = 1: replace one balance equation by the normalization.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    for (int li = 0; li < m; ++li) {
        for (const auto& e : rows[nodes[li]]) {
            const int lj = local[state_index(e.next)];
            a(lj, li) += e.prob;  // transposed
        }
        a(li, li) -= 1.0;
    }
    a.row(0).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
    b(0) = 1.0;
    const Eigen::VectorXd pi = a.partialPivLu().solve(b);

    double cost = 0.0, slots = 0.0;
    for (int li = 0; li < m; ++li) {
        const State s = state_at(nodes[li]);
        cost += pi(li) * smdp_cost(s, act[nodes[li]], params);
        slots += pi(li) * slot_count(act[nodes[li]], params);
    }
    return cost / slots;
}

StructureReport check_structure(const ValueTable& values, const SystemParams& params,
                                double tol) {
    const DerivedParams derived = derive(params);
    const auto& h = values.h;
    const int cap = static_cast<int>(h.rows());
    StructureReport rep;

    for (int f = 0; f < 2; ++f) {
        double worst = 0.0;
        for (int i = 1; i < cap; ++i) worst = std::max(worst, h(i - 1, f) - h(i, f));
        rep.monotone[f] = worst <= tol;
        rep.max_monotone_violation = std::max(rep.max_monotone_violation, worst);
    }

    // Concavity away from the cap region, where clamping distorts the tail.
    const int interior = std::max(0, cap - params.t_u);
    for (int f = 0; f < 2; ++f) {
        double worst = 0.0;
        for (int i = 0; i + 2 < interior; ++i)
            worst = std::max(worst, h(i + 2, f) - 2.0 * h(i + 1, f) + h(i, f));
        rep.concave_interior[f] = worst <= tol;
        rep.max_convexity = std::max(rep.max_convexity, worst);
    }

    const double order = (1.0 - params.p_a) - params.p_b;
    double worst = 0.0;
    for (int i = 0; i < cap; ++i) {
        const double d = h(i, 1) - h(i, 0);
        if (order > 0.0)
            worst = std::max(worst, d);   // expect h(.,1) <= h(.,0)
        else if (order < 0.0)
            worst = std::max(worst, -d);  // expect h(.,1) >= h(.,0)
        else
            worst = std::max(worst, std::abs(d));
    }
    rep.f_order_consistent = worst <= tol;
    rep.max_f_order_violation = worst;

    // Slope diagnostic against t_u/(eps * reset_prob); asymptotic and
    // interior-only, the clamped tail flattens towards slope ~1.
    const int slope_end = std::max(1, static_cast<int>(0.8 * interior));
    for (int f = 0; f < 2; ++f) {
        double lo = std::numeric_limits<double>::infinity();
        for (int i = 1; i < slope_end; ++i) lo = std::min(lo, h(i, f) - h(i - 1, f));
        rep.min_slope[f] = lo;
        const double reset = derived.reset_prob(f);
        rep.slope_bound[f] = reset > 0.0 ? params.t_u / (params.epsilon * reset)
                                         : std::numeric_limits<double>::infinity();
    }
    return rep;
}

}  // namespace taoi
