#include "dmc/graph.hpp"

#include <algorithm>
#include <deque>

namespace dmc {

namespace {

// Tarjan with an explicit DFS stack.
struct TarjanState {
    std::vector<std::int32_t> index, lowlink, component;
    std::vector<bool> on_stack;
    std::vector<StateId> stack;
    std::int32_t next_index = 0;
    std::int32_t num_components = 0;
};

struct Frame {
    StateId v;
    std::size_t edge;
};

void tarjan_from(StateId root, const std::vector<std::vector<Transition>>& rows,
                 TarjanState& st, std::vector<std::vector<StateId>>& sccs) {
    std::vector<Frame> frames{{root, 0}};
    st.index[root] = st.lowlink[root] = st.next_index++;
    st.stack.push_back(root);
    st.on_stack[root] = true;

    while (!frames.empty()) {
        auto& [v, edge] = frames.back();
        if (edge < rows[v].size()) {
            StateId w = rows[v][edge].target;
            ++edge;
            if (st.index[w] < 0) {
                st.index[w] = st.lowlink[w] = st.next_index++;
                st.stack.push_back(w);
                st.on_stack[w] = true;
                frames.push_back({w, 0});
            } else if (st.on_stack[w]) {
                st.lowlink[v] = std::min(st.lowlink[v], st.index[w]);
            }
        } else {
            if (st.lowlink[v] == st.index[v]) {
                std::vector<StateId> scc;
                StateId w;
                do {
                    w = st.stack.back();
                    st.stack.pop_back();
                    st.on_stack[w] = false;
                    st.component[w] = st.num_components;
                    scc.push_back(w);
                } while (w != v);
                ++st.num_components;
                sccs.push_back(std::move(scc));
            }
            StateId child = v;
            frames.pop_back();
            if (!frames.empty()) {
                StateId parent = frames.back().v;
                st.lowlink[parent] = std::min(st.lowlink[parent], st.lowlink[child]);
            }
        }
    }
}

} // namespace

std::vector<std::vector<StateId>> strongly_connected_components(const Dtmc& dtmc) {
    TarjanState st;
    st.index.assign(dtmc.num_states, -1);
    st.lowlink.assign(dtmc.num_states, -1);
    st.component.assign(dtmc.num_states, -1);
    st.on_stack.assign(dtmc.num_states, false);

    std::vector<std::vector<StateId>> sccs;
    for (StateId s = 0; s < dtmc.num_states; ++s)
        if (st.index[s] < 0) tarjan_from(s, dtmc.rows, st, sccs);
    return sccs;
}

std::vector<StateSet> bottom_sccs(const Dtmc& dtmc) {
    auto sccs = strongly_connected_components(dtmc);
    std::vector<std::int32_t> component(dtmc.num_states, -1);
    for (std::size_t i = 0; i < sccs.size(); ++i)
        for (StateId s : sccs[i]) component[s] = static_cast<std::int32_t>(i);

    std::vector<StateSet> out;
    for (const auto& scc : sccs) {
        bool bottom = true;
        for (StateId s : scc) {
            for (const auto& t : dtmc.rows[s])
                if (component[t.target] != component[s]) {
                    bottom = false;
                    break;
                }
            if (!bottom) break;
        }
        if (bottom) {
            StateSet set(dtmc.num_states);
            for (StateId s : scc) set.insert(s);
            out.push_back(std::move(set));
        }
    }
    return out;
}

StateSet infinite_reward_states(const Dtmc& dtmc, const StateSet& target) {
    StateSet out(dtmc.num_states);
    for (const auto& bscc : bottom_sccs(dtmc)) {
        bool hits_target = false;
        for (StateId s : bscc.elements())
            if (target.contains(s)) {
                hits_target = true;
                break;
            }
        if (!hits_target)
            for (StateId s : bscc.elements()) out.insert(s);
    }
    return out;
}

StateSet almost_sure_reach_exists(const Mdp& mdp, const StateSet& target) {
    // Greatest fixpoint over candidate sets Y, with a nested least fixpoint:
    // keep s if some action stays inside Y and can make progress towards
    // states already known to reach the target.
    StateSet y(mdp.num_states);
    for (StateId s = 0; s < mdp.num_states; ++s) y.insert(s);

    bool y_changed = true;
    while (y_changed) {
        StateSet x = target;
        bool x_changed = true;
        while (x_changed) {
            x_changed = false;
            for (StateId s = 0; s < mdp.num_states; ++s) {
                if (x.contains(s) || !y.contains(s)) continue;
                for (const auto& choice : mdp.choices[s]) {
                    bool stays_in_y = true, progresses = false;
                    for (const auto& t : choice.transitions) {
                        if (!y.contains(t.target)) stays_in_y = false;
                        if (x.contains(t.target)) progresses = true;
                    }
                    if (stays_in_y && progresses) {
                        x.insert(s);
                        x_changed = true;
                        break;
                    }
                }
            }
        }
        y_changed = !(x == y);
        y = x;
    }
    return y;
}

namespace {

template <typename Successors>
StateSet reachable_impl(std::uint32_t num_states, StateId initial, Successors successors) {
    StateSet reached(num_states);
    std::deque<StateId> queue{initial};
    reached.insert(initial);
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop_front();
        successors(s, [&](StateId t) {
            if (!reached.contains(t)) {
                reached.insert(t);
                queue.push_back(t);
            }
        });
    }
    return reached;
}

} // namespace

StateSet reachable_states(const Mdp& mdp) {
    return reachable_impl(mdp.num_states, mdp.initial, [&](StateId s, auto visit) {
        for (const auto& c : mdp.choices[s])
            for (const auto& t : c.transitions) visit(t.target);
    });
}

StateSet reachable_states(const Dtmc& dtmc) {
    return reachable_impl(dtmc.num_states, dtmc.initial, [&](StateId s, auto visit) {
        for (const auto& t : dtmc.rows[s]) visit(t.target);
    });
}

} // namespace dmc
