#pragma once

#include "dmc/ltl.hpp"
#include "dmc/model.hpp"

namespace dmc {

// Model x DFA product restricted to reachable states. The DFA reads the
// label of the successor state after each model step, with the initial DFA
// state pre-advanced on the initial label, so a formula already satisfied at
// the initial state yields the empty-prefix reward 0. Target states (those
// whose DFA component accepts) are made absorbing: reward accumulation stops
// there, so nothing beyond them matters.
struct DtmcProduct {
    Dtmc dtmc;
    StateRewards rewards;
    StateSet target;
    std::vector<StateId> model_state;       // product -> original state
    std::vector<std::uint32_t> automaton_state;  // product -> DFA state
};

struct MdpProduct {
    Mdp mdp;
    ActionRewards rewards;
    StateSet target;
    std::vector<StateId> model_state;
    std::vector<std::uint32_t> automaton_state;
};

DtmcProduct product_dtmc(const Dtmc& dtmc, const StateRewards& rewards, const Dfa& dfa);
MdpProduct product_mdp(const Mdp& mdp, const ActionRewards& rewards, const Dfa& dfa);

// Valuation bitmask of a state's labels over the DFA's atom order. Throws
// AtomMismatchError if the DFA uses an atom the model does not define.
std::vector<std::uint32_t> state_valuations(const Labeling& labeling, std::uint32_t num_states,
                                            const Dfa& dfa);

} // namespace dmc
