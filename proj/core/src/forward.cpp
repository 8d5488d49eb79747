#include "dmc/forward.hpp"

#include <unordered_map>

#include "dmc/graph.hpp"

namespace dmc {

namespace {

// Frontier key (state, accumulated reward). Rewards stay well below 2^40 at
// any feasible iteration count, states below 2^24.
using Cell = std::uint64_t;
inline Cell cell(StateId s, std::int64_t reward) {
    return (static_cast<std::uint64_t>(reward) << 24) | s;
}
inline StateId cell_state(Cell c) { return static_cast<StateId>(c & 0xFFFFFF); }
inline std::int64_t cell_reward(Cell c) { return static_cast<std::int64_t>(c >> 24); }

} // namespace

ForwardResult forward_distribution(const Dtmc& dtmc, const StateRewards& rewards,
                                   const StateSet& target, double epsilon,
                                   const ForwardOptions& options) {
    if (!(epsilon > 0.0)) throw Error("forward accuracy must be positive");
    if (dtmc.num_states >= (1u << 24)) throw Error("model too large for the frontier encoding");

    const StateSet sink = infinite_reward_states(dtmc, target);

    // Mass that has entered a target state, by accumulated reward. Target
    // cells never change again, so they live here instead of the frontier.
    std::map<std::int64_t, double> absorbed;
    std::unordered_map<Cell, double> frontier;
    double p_inf = 0.0;
    double p_not_target = 1.0;
    double pruned = 0.0;

    if (target.contains(dtmc.initial)) {
        absorbed[0] = 1.0;
        p_not_target = 0.0;
    } else if (sink.contains(dtmc.initial)) {
        p_inf = 1.0;
    } else {
        frontier[cell(dtmc.initial, 0)] = 1.0;
    }

    ForwardResult result;
    std::unordered_map<Cell, double> next;
    while (p_not_target - p_inf > epsilon - pruned) {
        if (result.iterations >= options.max_iterations)
            throw ConvergenceError("forward distribution: iteration cap " +
                                   std::to_string(options.max_iterations) +
                                   " reached before accuracy " + std::to_string(epsilon));
        ++result.iterations;
        next.clear();
        next.reserve(frontier.size() * 2);
        double not_target = 0.0;
        for (const auto& [key, mass] : frontier) {
            const StateId s = cell_state(key);
            const std::int64_t acc = cell_reward(key) + rewards[s];
            for (const auto& t : dtmc.rows[s]) {
                const double m = mass * t.prob;
                if (target.contains(t.target)) {
                    absorbed[acc] += m;
                } else if (sink.contains(t.target)) {
                    p_inf += m;
                    not_target += m;
                } else {
                    not_target += m;
                    next[cell(t.target, acc)] += m;
                }
            }
        }
        // Keep pruning within a sliver of the budget so the certified bound
        // cannot be dominated by dropped cells.
        const double prune_budget = std::min(epsilon, 1e-9) * 0.1;
        if (options.prune_threshold > 0.0 && pruned < prune_budget) {
            for (auto it = next.begin(); it != next.end();) {
                if (it->second < options.prune_threshold && pruned + it->second < prune_budget) {
                    pruned += it->second;
                    it = next.erase(it);
                } else {
                    ++it;
                }
            }
        }
        frontier.swap(next);
        p_not_target = not_target;
        if (frontier.empty()) break;
    }

    // Residual frontier mass stays in the output at its current level; true
    // absorption can only happen at that level or above, so the returned CDF
    // is an upper envelope of the true one.
    for (const auto& [key, mass] : frontier) absorbed[cell_reward(key)] += mass;

    result.dist = SparseDist::from_map(absorbed, p_inf);
    result.residual = std::max(0.0, p_not_target - p_inf) + pruned;
    result.pruned = pruned;
    return result;
}

} // namespace dmc
