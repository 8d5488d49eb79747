#include "dmc/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>

namespace dmc {

std::size_t StateSet::count() const {
    std::size_t n = 0;
    for (auto w : bits_) n += std::popcount(w);
    return n;
}

std::vector<StateId> StateSet::elements() const {
    std::vector<StateId> out;
    for (StateId s = 0; s < size_; ++s)
        if (contains(s)) out.push_back(s);
    return out;
}

std::int32_t Labeling::atom_id(const std::string& name) const {
    for (std::size_t i = 0; i < atom_names.size(); ++i)
        if (atom_names[i] == name) return static_cast<std::int32_t>(i);
    return -1;
}

std::uint32_t Labeling::intern(const std::string& name) {
    auto id = atom_id(name);
    if (id >= 0) return static_cast<std::uint32_t>(id);
    atom_names.push_back(name);
    return static_cast<std::uint32_t>(atom_names.size() - 1);
}

bool Labeling::state_has(StateId s, std::uint32_t atom) const {
    const auto& row = labels[s];
    return std::binary_search(row.begin(), row.end(), atom);
}

void Labeling::add_label(StateId s, std::uint32_t atom) {
    auto& row = labels[s];
    auto it = std::lower_bound(row.begin(), row.end(), atom);
    if (it == row.end() || *it != atom) row.insert(it, atom);
}

namespace {

void check_row(std::vector<std::string>& out, const std::vector<Transition>& row,
               std::uint32_t num_states, const std::string& where) {
    if (row.empty()) {
        out.push_back(where + ": empty distribution");
        return;
    }
    double sum = 0.0;
    for (const auto& t : row) {
        if (t.target >= num_states)
            out.push_back(where + ": target " + std::to_string(t.target) + " out of range");
        if (!(t.prob > 0.0) || t.prob > 1.0 + kRowSumTolerance)
            out.push_back(where + ": probability " + std::to_string(t.prob) + " outside (0,1]");
        sum += t.prob;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance)
        out.push_back(where + ": row-sum " + std::to_string(sum) + " != 1");
}

} // namespace

std::vector<std::string> validate(const Dtmc& dtmc) {
    std::vector<std::string> out;
    if (dtmc.initial >= dtmc.num_states) out.push_back("initial state out of range");
    if (dtmc.rows.size() != dtmc.num_states) out.push_back("row count != num_states");
    if (dtmc.labeling.labels.size() != dtmc.num_states) out.push_back("label rows != num_states");
    for (std::uint32_t s = 0; s < dtmc.rows.size(); ++s)
        check_row(out, dtmc.rows[s], dtmc.num_states, "state " + std::to_string(s));
    return out;
}

std::vector<std::string> validate(const Mdp& mdp) {
    std::vector<std::string> out;
    if (mdp.initial >= mdp.num_states) out.push_back("initial state out of range");
    if (mdp.choices.size() != mdp.num_states) out.push_back("choice count != num_states");
    if (mdp.labeling.labels.size() != mdp.num_states) out.push_back("label rows != num_states");
    for (std::uint32_t s = 0; s < mdp.choices.size(); ++s) {
        if (mdp.choices[s].empty())
            out.push_back("state " + std::to_string(s) + ": no available action");
        for (std::size_t a = 0; a < mdp.choices[s].size(); ++a)
            check_row(out, mdp.choices[s][a].transitions, mdp.num_states,
                      "state " + std::to_string(s) + " action " + mdp.choices[s][a].label);
    }
    return out;
}

std::vector<std::string> validate_rewards(const Dtmc& dtmc, const StateRewards& rewards) {
    std::vector<std::string> out;
    if (rewards.size() != dtmc.num_states) out.push_back("reward entries != num_states");
    for (std::size_t s = 0; s < rewards.size(); ++s)
        if (rewards[s] < 0)
            out.push_back("state " + std::to_string(s) + ": negative reward");
    return out;
}

std::vector<std::string> validate_rewards(const Mdp& mdp, const ActionRewards& rewards) {
    std::vector<std::string> out;
    if (rewards.size() != mdp.num_states) {
        out.push_back("reward rows != num_states");
        return out;
    }
    for (std::uint32_t s = 0; s < mdp.num_states; ++s) {
        if (rewards[s].size() != mdp.choices[s].size())
            out.push_back("state " + std::to_string(s) + ": reward entries != action count");
        for (auto r : rewards[s])
            if (r < 0) out.push_back("state " + std::to_string(s) + ": negative reward");
    }
    return out;
}

StateSet states_with_label(const Labeling& labeling, std::uint32_t num_states,
                           const std::string& atom) {
    StateSet set(num_states);
    auto id = labeling.atom_id(atom);
    if (id < 0) return set;
    for (StateId s = 0; s < num_states; ++s)
        if (labeling.state_has(s, static_cast<std::uint32_t>(id))) set.insert(s);
    return set;
}

std::pair<Dtmc, StateRewards> induce_dtmc(const Mdp& mdp, const Policy& policy,
                                          const ActionRewards& rewards) {
    Dtmc dtmc;
    dtmc.num_states = mdp.num_states;
    dtmc.initial = mdp.initial;
    dtmc.labeling = mdp.labeling;
    dtmc.rows.resize(mdp.num_states);
    StateRewards out_rewards(mdp.num_states, 0);

    // Reachability under the policy itself; unreachable states fall back to
    // action 0 so the result is a total DTMC with stable state indices.
    StateSet reached(mdp.num_states);
    std::deque<StateId> queue{mdp.initial};
    reached.insert(mdp.initial);
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop_front();
        if (!policy.defined(s))
            throw UndefinedChoiceError("policy undefined on reachable state " + std::to_string(s));
        auto a = static_cast<std::size_t>(policy.choice[s]);
        if (a >= mdp.choices[s].size())
            throw UndefinedChoiceError("policy picks invalid action " + std::to_string(a) +
                                       " in state " + std::to_string(s));
        for (const auto& t : mdp.choices[s][a].transitions) {
            if (!reached.contains(t.target)) {
                reached.insert(t.target);
                queue.push_back(t.target);
            }
        }
    }

    for (StateId s = 0; s < mdp.num_states; ++s) {
        std::size_t a = policy.defined(s) ? static_cast<std::size_t>(policy.choice[s]) : 0;
        if (a >= mdp.choices[s].size()) a = 0;
        dtmc.rows[s] = mdp.choices[s][a].transitions;
        out_rewards[s] = rewards[s][a];
    }
    return {std::move(dtmc), std::move(out_rewards)};
}

} // namespace dmc
