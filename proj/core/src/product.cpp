#include "dmc/product.hpp"

#include <deque>
#include <unordered_map>

namespace dmc {

std::vector<std::uint32_t> state_valuations(const Labeling& labeling, std::uint32_t num_states,
                                            const Dfa& dfa) {
    std::vector<std::int32_t> atom_ids;
    for (const auto& name : dfa.atoms) {
        auto id = labeling.atom_id(name);
        if (id < 0) throw AtomMismatchError("formula atom '" + name + "' not labelled in model");
        atom_ids.push_back(id);
    }
    std::vector<std::uint32_t> masks(num_states, 0);
    for (StateId s = 0; s < num_states; ++s)
        for (std::size_t i = 0; i < atom_ids.size(); ++i)
            if (labeling.state_has(s, static_cast<std::uint32_t>(atom_ids[i])))
                masks[s] |= 1u << i;
    return masks;
}

namespace {

// Shared frontier exploration; Emit is called once per discovered product
// state to build its rows from the expand callback.
struct ProductBuilder {
    std::unordered_map<std::uint64_t, StateId> ids;
    std::vector<StateId> model_state;
    std::vector<std::uint32_t> automaton_state;
    std::deque<StateId> queue;

    StateId intern(StateId s, std::uint32_t q) {
        const std::uint64_t key = (static_cast<std::uint64_t>(s) << 32) | q;
        auto [it, inserted] = ids.emplace(key, static_cast<StateId>(model_state.size()));
        if (inserted) {
            model_state.push_back(s);
            automaton_state.push_back(q);
            queue.push_back(it->second);
        }
        return it->second;
    }
};

} // namespace

DtmcProduct product_dtmc(const Dtmc& dtmc, const StateRewards& rewards, const Dfa& dfa) {
    const auto masks = state_valuations(dtmc.labeling, dtmc.num_states, dfa);
    ProductBuilder b;
    b.intern(dtmc.initial, dfa.step(dfa.initial, masks[dtmc.initial]));

    DtmcProduct out;
    while (!b.queue.empty()) {
        const StateId p = b.queue.front();
        b.queue.pop_front();
        const StateId s = b.model_state[p];
        const std::uint32_t q = b.automaton_state[p];
        out.dtmc.rows.resize(std::max<std::size_t>(out.dtmc.rows.size(), p + 1));
        if (dfa.accepting[q]) {
            out.dtmc.rows[p] = {{p, 1.0}};
            continue;
        }
        auto& row = out.dtmc.rows[p];
        row.reserve(dtmc.rows[s].size());
        for (const auto& t : dtmc.rows[s])
            row.push_back({b.intern(t.target, dfa.step(q, masks[t.target])), t.prob});
    }

    const auto n = static_cast<std::uint32_t>(b.model_state.size());
    out.dtmc.num_states = n;
    out.dtmc.initial = 0;
    out.dtmc.rows.resize(n);
    out.dtmc.labeling.atom_names = dtmc.labeling.atom_names;
    out.dtmc.labeling.labels.resize(n);
    out.rewards.resize(n);
    out.target = StateSet(n);
    for (StateId p = 0; p < n; ++p) {
        out.dtmc.labeling.labels[p] = dtmc.labeling.labels[b.model_state[p]];
        out.rewards[p] = rewards[b.model_state[p]];
        if (dfa.accepting[b.automaton_state[p]]) out.target.insert(p);
    }
    out.model_state = std::move(b.model_state);
    out.automaton_state = std::move(b.automaton_state);
    return out;
}

MdpProduct product_mdp(const Mdp& mdp, const ActionRewards& rewards, const Dfa& dfa) {
    const auto masks = state_valuations(mdp.labeling, mdp.num_states, dfa);
    ProductBuilder b;
    b.intern(mdp.initial, dfa.step(dfa.initial, masks[mdp.initial]));

    MdpProduct out;
    std::vector<std::vector<std::int64_t>> out_rewards;
    while (!b.queue.empty()) {
        const StateId p = b.queue.front();
        b.queue.pop_front();
        const StateId s = b.model_state[p];
        const std::uint32_t q = b.automaton_state[p];
        out.mdp.choices.resize(std::max<std::size_t>(out.mdp.choices.size(), p + 1));
        out_rewards.resize(out.mdp.choices.size());
        if (dfa.accepting[q]) {
            out.mdp.choices[p] = {{"done", {{p, 1.0}}}};
            out_rewards[p] = {0};
            continue;
        }
        auto& actions = out.mdp.choices[p];
        actions.reserve(mdp.choices[s].size());
        out_rewards[p].reserve(mdp.choices[s].size());
        for (std::size_t a = 0; a < mdp.choices[s].size(); ++a) {
            Choice choice;
            choice.label = mdp.choices[s][a].label;
            for (const auto& t : mdp.choices[s][a].transitions)
                choice.transitions.push_back(
                    {b.intern(t.target, dfa.step(q, masks[t.target])), t.prob});
            actions.push_back(std::move(choice));
            out_rewards[p].push_back(rewards[s][a]);
        }
    }

    const auto n = static_cast<std::uint32_t>(b.model_state.size());
    out.mdp.num_states = n;
    out.mdp.initial = 0;
    out.mdp.choices.resize(n);
    out_rewards.resize(n);
    out.mdp.labeling.atom_names = mdp.labeling.atom_names;
    out.mdp.labeling.labels.resize(n);
    out.target = StateSet(n);
    for (StateId p = 0; p < n; ++p) {
        out.mdp.labeling.labels[p] = mdp.labeling.labels[b.model_state[p]];
        if (dfa.accepting[b.automaton_state[p]]) out.target.insert(p);
    }
    out.rewards = std::move(out_rewards);
    out.model_state = std::move(b.model_state);
    out.automaton_state = std::move(b.automaton_state);
    return out;
}

} // namespace dmc
