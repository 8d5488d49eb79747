#pragma once

#include <vector>

#include "dmc/model.hpp"

namespace dmc {

// SCCs of the DTMC's underlying digraph, iterative Tarjan (no recursion, so
// long chains cannot overflow the call stack). Returned in reverse
// topological order of the condensation.
std::vector<std::vector<StateId>> strongly_connected_components(const Dtmc& dtmc);

// SCCs with no edge leaving the component.
std::vector<StateSet> bottom_sccs(const Dtmc& dtmc);

// Union of all bottom SCCs disjoint from the target set: exactly the states
// that accumulate infinite reward with probability 1.
StateSet infinite_reward_states(const Dtmc& dtmc, const StateSet& target);

// States from which some policy reaches the target with probability 1.
// Pure graph fixpoint, no numerics.
StateSet almost_sure_reach_exists(const Mdp& mdp, const StateSet& target);

// States reachable from the initial state (all actions considered).
StateSet reachable_states(const Mdp& mdp);
StateSet reachable_states(const Dtmc& dtmc);

} // namespace dmc
