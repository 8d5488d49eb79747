#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dmc/errors.hpp"

namespace dmc {

using StateId = std::uint32_t;

// Fixed-capacity bitset over the states of one model.
class StateSet {
  public:
    StateSet() = default;
    explicit StateSet(std::size_t num_states)
        : size_(num_states), bits_((num_states + 63) / 64, 0) {}

    std::size_t size() const { return size_; }

    bool contains(StateId s) const { return (bits_[s >> 6] >> (s & 63)) & 1; }
    void insert(StateId s) { bits_[s >> 6] |= std::uint64_t{1} << (s & 63); }
    void erase(StateId s) { bits_[s >> 6] &= ~(std::uint64_t{1} << (s & 63)); }

    std::size_t count() const;
    bool empty() const { return count() == 0; }
    std::vector<StateId> elements() const;

    bool operator==(const StateSet&) const = default;

  private:
    std::size_t size_ = 0;
    std::vector<std::uint64_t> bits_;
};

struct Transition {
    StateId target;
    double prob;
    bool operator==(const Transition&) const = default;
};

// One available action of an MDP state: a label and a distribution over
// successors. Within a state, actions are identified by their index; the
// index order is the order of first appearance in the source file/generator.
struct Choice {
    std::string label;
    std::vector<Transition> transitions;
    bool operator==(const Choice&) const = default;
};

// Atomic propositions are interned per model; `labels[s]` holds sorted ids.
struct Labeling {
    std::vector<std::string> atom_names;
    std::vector<std::vector<std::uint32_t>> labels;

    std::int32_t atom_id(const std::string& name) const;
    std::uint32_t intern(const std::string& name);
    bool state_has(StateId s, std::uint32_t atom) const;
    void add_label(StateId s, std::uint32_t atom);
    bool operator==(const Labeling&) const = default;
};

struct Dtmc {
    std::uint32_t num_states = 0;
    StateId initial = 0;
    std::vector<std::vector<Transition>> rows;
    Labeling labeling;
    bool operator==(const Dtmc&) const = default;
};

struct Mdp {
    std::uint32_t num_states = 0;
    StateId initial = 0;
    std::vector<std::vector<Choice>> choices;
    Labeling labeling;
    bool operator==(const Mdp&) const = default;
};

// Nonnegative integer rewards: per state for a DTMC, per state/action for
// an MDP. Missing file entries default to zero.
using StateRewards = std::vector<std::int64_t>;
using ActionRewards = std::vector<std::vector<std::int64_t>>;

// Memoryless policy; -1 marks "no choice recorded" which is only legal on
// states unreachable under the policy.
struct Policy {
    std::vector<std::int32_t> choice;
    bool defined(StateId s) const { return choice[s] >= 0; }
};

inline constexpr double kRowSumTolerance = 1e-9;

// Diagnostic invariant checks; empty result means the model is well-formed.
std::vector<std::string> validate(const Dtmc& dtmc);
std::vector<std::string> validate(const Mdp& mdp);
std::vector<std::string> validate_rewards(const Dtmc& dtmc, const StateRewards& rewards);
std::vector<std::string> validate_rewards(const Mdp& mdp, const ActionRewards& rewards);

// Resolves all states carrying the given label into a target set.
StateSet states_with_label(const Labeling& labeling, std::uint32_t num_states,
                           const std::string& atom);

// Fixes a policy in an MDP: row of s = chosen action's row, reward of s =
// reward of the chosen action, labels preserved. Throws UndefinedChoiceError
// if a state reachable from the initial state has no policy entry.
std::pair<Dtmc, StateRewards> induce_dtmc(const Mdp& mdp, const Policy& policy,
                                          const ActionRewards& rewards);

} // namespace dmc
