#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dmc/distribution.hpp"
#include "dmc/forward.hpp"
#include "dmc/model.hpp"

namespace dmc {

// Evenly spaced risk-budget atoms b_1 < ... < b_n with b_1 = vmin, b_n = vmax.
struct SlackGrid {
    double vmin = 0.0;
    double vmax = 1.0;
    std::uint32_t atoms = 101;

    double stride() const { return (vmax - vmin) / static_cast<double>(atoms - 1); }
    double atom(std::uint32_t j) const { return vmin + stride() * static_cast<double>(j); }
    // Index of the nearest atom at or below `value` (clamped into the grid);
    // the budget left after paying a reward rounds down through this.
    std::uint32_t round_down(double value) const;
    void check() const;
};

struct DviOptions {
    double epsilon = 0.01;           // sup-distance convergence threshold
    std::uint32_t max_iterations = 5000;
    std::uint32_t threads = 0;       // 0 = hardware concurrency
};

// Representation-agnostic wrapper around a converged per-state distribution.
struct ApproxDist {
    ReprKind kind = ReprKind::categorical;
    CategoricalDist categorical;
    QuantileDist quantile;

    std::vector<WeightedPoint> points() const;
    double mean() const;
    double cvar_at(RiskLevel level) const;
    double stat(int kind, double alpha) const;  // see StatQuery::Kind
};

struct DviResult {
    Policy policy;                 // total: targets get action 0
    ApproxDist initial;            // value distribution at the initial state
    std::uint32_t iterations = 0;
    double residual = 0.0;
    // Set when the oscillation guard froze the argmin policy and finished
    // with policy-evaluation sweeps; the convergence threshold then applies
    // to the frozen-policy fixpoint.
    bool frozen_policy = false;
};

// Risk-neutral distributional value iteration: synchronous sweeps of the
// projected distributional Bellman operator, action = argmin of the expected
// value, ties to the smallest action index. Requires every state reachable
// from the initial one to admit a policy reaching the target almost surely.
DviResult risk_neutral_dvi(const Mdp& mdp, const ActionRewards& rewards, const StateSet& target,
                           const ReprParams& params, const DviOptions& options = {});

// MDP x budget-grid product: <s,b> -a-> <s',b'> with b' = the grid atom at or
// below b - r(s,a), probabilities unchanged, labels copied, one entry state
// <s0,b> per atom. State ids are s * atoms + budget_index.
struct SlackProduct {
    Mdp mdp;
    ActionRewards rewards;
    StateSet target;
    SlackGrid grid;
    std::uint32_t base_states = 0;
    std::vector<StateId> entries;

    StateId state_of(StateId s, std::uint32_t budget_index) const {
        return s * grid.atoms + budget_index;
    }
    StateId base_state(StateId product_state) const { return product_state / grid.atoms; }
    std::uint32_t budget_index(StateId product_state) const { return product_state % grid.atoms; }
};

SlackProduct build_slack_product(const Mdp& mdp, const ActionRewards& rewards,
                                 const StateSet& target, const SlackGrid& grid);

struct RiskSensitiveResult {
    SlackProduct product;
    DviResult dvi;                       // policy over product states
    std::uint32_t budget_index = 0;      // chosen entry b*
    double budget = 0.0;
    std::vector<double> budget_cvars;    // CVaR_alpha at every entry state
    std::vector<ApproxDist> budget_dists;
};

// Risk-sensitive DVI: runs the same sweeps on the slack product with action
// = argmin of E([X - b]^+), then picks the entry budget minimising CVaR.
RiskSensitiveResult risk_sensitive_dvi(const Mdp& mdp, const ActionRewards& rewards,
                                       const StateSet& target, RiskLevel level,
                                       const SlackGrid& grid, const ReprParams& params,
                                       const DviOptions& options = {});

// ---- precise policy evaluation ----------------------------------------------

struct StatQuery {
    enum Kind { E = 0, Var, Sd, Mode, VaR, CVaR };
    Kind kind = E;
    double alpha = 0.0;
};

struct StatResult {
    StatQuery query;
    double exact = 0.0;            // from the forward distribution
    double approx = 0.0;           // from the approximate distribution, if given
    double delta_percent = 0.0;    // 100 * |approx - exact| / exact
};

struct Evaluation {
    SparseDist dist;
    double residual = 0.0;
    std::uint64_t iterations = 0;
    std::vector<StatResult> stats;
};

// Induces the DTMC of the policy and runs the forward engine at accuracy
// `eps`; each requested statistic is evaluated on the exact distribution and,
// when `reference` is given, compared against the approximate one.
Evaluation evaluate_policy(const Mdp& mdp, const Policy& policy, const ActionRewards& rewards,
                           const StateSet& target, double eps, std::span<const StatQuery> queries,
                           const ApproxDist* reference = nullptr,
                           const ForwardOptions& forward_options = {});

double evaluate_stat(const SparseDist& dist, const StatQuery& query);

} // namespace dmc
