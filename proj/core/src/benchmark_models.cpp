#include "dmc/benchmark_models.hpp"

#include <algorithm>
#include <random>

namespace dmc {

namespace {

constexpr std::int64_t kBettingAllowance = 100;
constexpr std::int64_t kBettingMaxBet = 5;

// Betting game: money capped at the allowance, stages-1 rounds of betting,
// then the remaining shortfall is paid on a final collect step.
GeneratedBenchmark generate_betting(const BenchmarkSpec& spec) {
    const auto cap = static_cast<std::uint32_t>(kBettingAllowance);
    const std::uint32_t stages = std::max(2u, spec.betting_stages);
    const std::uint32_t money_levels = cap + 1;
    const std::uint32_t num_states = stages * money_levels + 1;
    const StateId done = num_states - 1;
    auto id = [&](std::uint32_t stage, std::uint32_t money) {
        return stage * money_levels + money;
    };

    MdpModel model;
    auto& mdp = model.mdp;
    ActionRewards rewards(num_states);
    mdp.num_states = num_states;
    mdp.initial = id(0, 5);
    mdp.choices.resize(num_states);
    mdp.labeling.labels.resize(num_states);
    const auto goal = mdp.labeling.intern("goal");
    const auto init = mdp.labeling.intern("init");
    mdp.labeling.add_label(done, goal);
    mdp.labeling.add_label(mdp.initial, init);

    for (std::uint32_t k = 0; k < stages; ++k) {
        for (std::uint32_t m = 0; m <= cap; ++m) {
            const StateId s = id(k, m);
            if (k + 1 == stages) {
                mdp.choices[s].push_back({"collect", {{done, 1.0}}});
                rewards[s].push_back(kBettingAllowance - m);
                continue;
            }
            const auto max_bet = std::min<std::uint32_t>(kBettingMaxBet, m);
            for (std::uint32_t bet = 0; bet <= max_bet; ++bet) {
                const std::uint32_t win = std::min(cap, m + bet);
                const std::uint32_t lose = m - bet;
                const std::uint32_t jackpot = std::min<std::uint32_t>(cap, m + 10 * bet);
                Choice c{"bet" + std::to_string(bet), {}};
                if (bet == 0) {
                    c.transitions = {{id(k + 1, m), 1.0}};
                } else {
                    // accumulate: win and jackpot may collide at the cap
                    std::map<StateId, double> row;
                    row[id(k + 1, win)] += 0.7;
                    row[id(k + 1, lose)] += 0.25;
                    row[id(k + 1, jackpot)] += 0.05;
                    for (auto [t, p] : row) c.transitions.push_back({t, p});
                }
                mdp.choices[s].push_back(std::move(c));
                rewards[s].push_back(0);
            }
        }
    }
    mdp.choices[done].push_back({"loop", {{done, 1.0}}});
    rewards[done].push_back(0);

    model.rewards["cost"] = std::move(rewards);
    return {std::move(model), "cost", "F goal", "R{E,cost}min=? [ F goal ]",
            static_cast<double>(kBettingAllowance)};
}

// Deep sea treasure, classic layout. Values are the classic ones scaled by
// 3 with the deepest treasure (19 moves away, beyond the 15-step horizon)
// set to 353; the opportunity cost on every outcome is measured against
// that maximum.
constexpr int kDstRows = 11, kDstCols = 10, kDstHorizon = 15;
constexpr int kDstDepth[kDstCols] = {1, 2, 3, 4, 4, 4, 7, 7, 9, 10};
constexpr std::int64_t kDstValue[kDstCols] = {3, 6, 9, 15, 24, 48, 72, 150, 222, 353};
constexpr std::int64_t kDstMaxValue = 353;
constexpr std::int64_t kDstStepCost = 5;

GeneratedBenchmark generate_deepsea(const BenchmarkSpec&) {
    auto valid = [](int r, int c) {
        return c >= 0 && c < kDstCols && r >= 0 && r <= kDstDepth[c];
    };
    auto is_treasure = [](int r, int c) { return r == kDstDepth[c]; };

    // enumerate states (t, r, c)
    std::vector<std::int32_t> index(kDstRows * kDstCols * (kDstHorizon + 1), -1);
    auto flat = [&](int r, int c, int t) { return (t * kDstRows + r) * kDstCols + c; };
    std::uint32_t count = 0;
    for (int t = 0; t <= kDstHorizon; ++t)
        for (int c = 0; c < kDstCols; ++c)
            for (int r = 0; r <= kDstDepth[c]; ++r) index[flat(r, c, t)] = count++;
    const StateId done = count;
    const std::uint32_t num_states = count + 1;

    MdpModel model;
    auto& mdp = model.mdp;
    ActionRewards rewards(num_states);
    mdp.num_states = num_states;
    mdp.initial = static_cast<StateId>(index[flat(0, 0, 0)]);
    mdp.choices.resize(num_states);
    mdp.labeling.labels.resize(num_states);
    mdp.labeling.add_label(done, mdp.labeling.intern("goal"));
    mdp.labeling.add_label(mdp.initial, mdp.labeling.intern("init"));

    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    const char* names[4] = {"up", "down", "left", "right"};
    auto dest = [&](int r, int c, int d) {
        const int rr = r + dr[d], cc = c + dc[d];
        return valid(rr, cc) ? std::pair{rr, cc} : std::pair{r, c};
    };

    for (int t = 0; t <= kDstHorizon; ++t) {
        for (int c = 0; c < kDstCols; ++c) {
            for (int r = 0; r <= kDstDepth[c]; ++r) {
                const auto s = static_cast<StateId>(index[flat(r, c, t)]);
                if (is_treasure(r, c)) {
                    mdp.choices[s].push_back({"collect", {{done, 1.0}}});
                    rewards[s].push_back(kDstMaxValue - kDstValue[c]);
                    continue;
                }
                if (t == kDstHorizon) {
                    mdp.choices[s].push_back({"surface", {{done, 1.0}}});
                    rewards[s].push_back(kDstMaxValue);
                    continue;
                }
                for (int d = 0; d < 4; ++d) {
                    // intended 0.6, perpendicular slips 0.2 each
                    const int p1 = d < 2 ? 2 : 0, p2 = d < 2 ? 3 : 1;
                    std::map<StateId, double> row;
                    auto add = [&](int dir, double p) {
                        auto [rr, cc] = dest(r, c, dir);
                        row[static_cast<StateId>(index[flat(rr, cc, t + 1)])] += p;
                    };
                    add(d, 0.6);
                    add(p1, 0.2);
                    add(p2, 0.2);
                    Choice choice{names[d], {}};
                    for (auto [tgt, p] : row) choice.transitions.push_back({tgt, p});
                    mdp.choices[s].push_back(std::move(choice));
                    rewards[s].push_back(kDstStepCost);
                }
            }
        }
    }
    mdp.choices[done].push_back({"loop", {{done, 1.0}}});
    rewards[done].push_back(0);

    model.rewards["cost"] = std::move(rewards);
    return {std::move(model), "cost", "F goal", "R{E,cost}min=? [ F goal ]", 800.0};
}

// Obstacle gridworld: time to the far corner, obstacle cells cost an extra
// delay on the step leaving them.
GeneratedBenchmark generate_obstacle(const BenchmarkSpec& spec) {
    const std::uint32_t n = std::max(2u, spec.n);
    const std::uint32_t num_states = n * n;
    auto id = [&](std::uint32_t r, std::uint32_t c) { return r * n + c; };
    const StateId goal_state = id(n - 1, n - 1);

    std::vector<bool> obstacle(num_states, false);
    {
        std::vector<StateId> candidates;
        for (StateId s = 0; s < num_states; ++s)
            if (s != 0 && s != goal_state) candidates.push_back(s);
        std::mt19937_64 rng(spec.seed);
        std::shuffle(candidates.begin(), candidates.end(), rng);
        const auto want = static_cast<std::size_t>(spec.obstacle_density *
                                                   static_cast<double>(candidates.size()));
        for (std::size_t i = 0; i < want; ++i) obstacle[candidates[i]] = true;
    }

    MdpModel model;
    auto& mdp = model.mdp;
    ActionRewards rewards(num_states);
    mdp.num_states = num_states;
    mdp.initial = 0;
    mdp.choices.resize(num_states);
    mdp.labeling.labels.resize(num_states);
    mdp.labeling.add_label(goal_state, mdp.labeling.intern("goal"));
    mdp.labeling.add_label(0, mdp.labeling.intern("init"));

    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    const char* names[4] = {"up", "down", "left", "right"};
    auto dest = [&](std::uint32_t r, std::uint32_t c, int d) {
        const int rr = static_cast<int>(r) + dr[d], cc = static_cast<int>(c) + dc[d];
        if (rr < 0 || cc < 0 || rr >= static_cast<int>(n) || cc >= static_cast<int>(n))
            return id(r, c);
        return id(static_cast<std::uint32_t>(rr), static_cast<std::uint32_t>(cc));
    };

    for (std::uint32_t r = 0; r < n; ++r) {
        for (std::uint32_t c = 0; c < n; ++c) {
            const StateId s = id(r, c);
            if (s == goal_state) {
                mdp.choices[s].push_back({"stay", {{s, 1.0}}});
                rewards[s].push_back(0);
                continue;
            }
            const std::int64_t step_cost = 1 + (obstacle[s] ? spec.obstacle_delay : 0);
            for (int d = 0; d < 4; ++d) {
                const int p1 = d < 2 ? 2 : 0, p2 = d < 2 ? 3 : 1;
                std::map<StateId, double> row;
                row[dest(r, c, d)] += 0.9;
                row[dest(r, c, p1)] += 0.05;
                row[dest(r, c, p2)] += 0.05;
                Choice choice{names[d], {}};
                for (auto [tgt, p] : row) choice.transitions.push_back({tgt, p});
                mdp.choices[s].push_back(std::move(choice));
                rewards[s].push_back(step_cost);
            }
        }
    }

    model.rewards["time"] = std::move(rewards);
    return {std::move(model), "time", "F goal", "R{E,time}min=? [ F goal ]",
            std::max(100.0, 4.0 * n)};
}

// Energy gridworld: battery decreases every move, recharging only at the
// station, depletion teleports there after a delay. Mission = visit three
// waypoints in any order.
GeneratedBenchmark generate_energy(const BenchmarkSpec& spec) {
    const std::uint32_t n = std::max(2u, spec.n);
    const std::uint32_t e0 = std::max(2u, spec.initial_energy);
    const std::uint32_t levels = e0 + 1;
    const std::uint32_t num_states = n * n * levels;
    auto id = [&](std::uint32_t r, std::uint32_t c, std::uint32_t e) {
        return (r * n + c) * levels + e;
    };
    const std::uint32_t station_r = n / 2, station_c = n / 2;

    MdpModel model;
    auto& mdp = model.mdp;
    ActionRewards rewards(num_states);
    mdp.num_states = num_states;
    mdp.initial = id(0, 0, e0);
    mdp.choices.resize(num_states);
    mdp.labeling.labels.resize(num_states);
    const auto w1 = mdp.labeling.intern("w1");
    const auto w2 = mdp.labeling.intern("w2");
    const auto w3 = mdp.labeling.intern("w3");
    const auto init = mdp.labeling.intern("init");
    mdp.labeling.add_label(mdp.initial, init);
    for (std::uint32_t e = 0; e < levels; ++e) {
        mdp.labeling.add_label(id(0, n - 1, e), w1);
        mdp.labeling.add_label(id(n - 1, 0, e), w2);
        mdp.labeling.add_label(id(n - 1, n - 1, e), w3);
    }

    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, -1, 1};
    const char* names[4] = {"up", "down", "left", "right"};
    auto cell_after = [&](std::uint32_t r, std::uint32_t c, int d) {
        const int rr = static_cast<int>(r) + dr[d], cc = static_cast<int>(c) + dc[d];
        if (rr < 0 || cc < 0 || rr >= static_cast<int>(n) || cc >= static_cast<int>(n))
            return std::pair{r, c};
        return std::pair{static_cast<std::uint32_t>(rr), static_cast<std::uint32_t>(cc)};
    };

    for (std::uint32_t r = 0; r < n; ++r) {
        for (std::uint32_t c = 0; c < n; ++c) {
            for (std::uint32_t e = 0; e < levels; ++e) {
                const StateId s = id(r, c, e);
                if (e == 0) {
                    mdp.choices[s].push_back(
                        {"recover", {{id(station_r, station_c, e0), 1.0}}});
                    rewards[s].push_back(spec.depletion_delay);
                    continue;
                }
                for (int d = 0; d < 4; ++d) {
                    std::map<StateId, double> row;
                    for (int d2 = 0; d2 < 4; ++d2) {
                        auto [rr, cc] = cell_after(r, c, d2);
                        row[id(rr, cc, e - 1)] += d2 == d ? 0.7 : 0.1;
                    }
                    Choice choice{names[d], {}};
                    for (auto [tgt, p] : row) choice.transitions.push_back({tgt, p});
                    mdp.choices[s].push_back(std::move(choice));
                    rewards[s].push_back(1);
                }
                if (r == station_r && c == station_c) {
                    mdp.choices[s].push_back({"charge", {{id(r, c, e0), 1.0}}});
                    rewards[s].push_back(1);
                }
            }
        }
    }

    model.rewards["time"] = std::move(rewards);
    return {std::move(model), "time", "(F w1) & (F w2) & (F w3)",
            "R{E,time}min=? [ (F w1) & (F w2) & (F w3) ]", 500.0};
}

// Mud & nails: two corridors from the start to g1 and back. Mud cells cost
// a fixed 3 per step; nail cells cost 1, but entering one lands on a nail
// with probability 0.2, which adds 5 to the step leaving it (the "nailed"
// twin states). A short obstacle corridor (cost 35 per step) also exists.
GeneratedBenchmark generate_mudnails(const BenchmarkSpec&) {
    constexpr int kMud = 8, kNails = 11, kObstacle = 2;

    MdpModel model;
    auto& mdp = model.mdp;
    std::vector<std::vector<std::int64_t>> rewards;

    std::vector<std::int64_t> exit_cost;       // reward on every action leaving the state
    std::vector<std::string> names;
    auto add_state = [&](const std::string& name, std::int64_t cost) {
        names.push_back(name);
        exit_cost.push_back(cost);
        return static_cast<StateId>(names.size() - 1);
    };

    const StateId start = add_state("start", 1);
    const StateId goal1 = add_state("g1", 1);
    std::vector<StateId> mud(kMud), nails(kNails), nailed(kNails), obst(kObstacle);
    for (int i = 0; i < kMud; ++i) mud[i] = add_state("m" + std::to_string(i), 3);
    for (int i = 0; i < kNails; ++i) nails[i] = add_state("n" + std::to_string(i), 1);
    for (int i = 0; i < kNails; ++i) nailed[i] = add_state("nx" + std::to_string(i), 6);
    for (int i = 0; i < kObstacle; ++i) obst[i] = add_state("o" + std::to_string(i), 35);

    const auto num_states = static_cast<std::uint32_t>(names.size());
    mdp.num_states = num_states;
    mdp.initial = start;
    mdp.choices.resize(num_states);
    mdp.labeling.labels.resize(num_states);
    mdp.labeling.add_label(goal1, mdp.labeling.intern("g1"));
    mdp.labeling.add_label(start, mdp.labeling.intern("g2"));
    mdp.labeling.add_label(start, mdp.labeling.intern("init"));
    rewards.resize(num_states);

    auto is_nail_cell = [&](StateId s) {
        for (int i = 0; i < kNails; ++i)
            if (nails[i] == s) return i;
        return -1;
    };
    auto add_move = [&](StateId from, const std::string& label, StateId to) {
        Choice c{label, {}};
        if (int i = is_nail_cell(to); i >= 0)
            c.transitions = {{to, 0.8}, {nailed[i], 0.2}};
        else
            c.transitions = {{to, 1.0}};
        mdp.choices[from].push_back(std::move(c));
        rewards[from].push_back(exit_cost[from]);
    };
    // both directions along each corridor; the twin shares the cell's moves
    auto corridor = [&](const std::vector<StateId>& cells) {
        add_move(start, "to_" + names[cells.front()], cells.front());
        add_move(cells.front(), "back", start);
        for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
            add_move(cells[i], "fwd", cells[i + 1]);
            add_move(cells[i + 1], "back", cells[i]);
        }
        add_move(cells.back(), "fwd", goal1);
        add_move(goal1, "to_" + names[cells.back()], cells.back());
    };
    corridor(mud);
    corridor(nails);
    corridor(obst);
    for (int i = 0; i < kNails; ++i) {
        // twins move exactly like their cell, at the higher exit cost
        for (const auto& c : mdp.choices[nails[i]]) {
            mdp.choices[nailed[i]].push_back(c);
            rewards[nailed[i]].push_back(exit_cost[nailed[i]]);
        }
    }

    model.rewards["cost"] = std::move(rewards);
    return {std::move(model), "cost", "F (g1 & F g2)",
            "R{E,cost}min=? [ F (g1 & F g2) ]", 160.0};
}

} // namespace

GeneratedBenchmark generate(const BenchmarkSpec& spec) {
    if (spec.name == "betting") return generate_betting(spec);
    if (spec.name == "deepsea") return generate_deepsea(spec);
    if (spec.name == "obstacle") return generate_obstacle(spec);
    if (spec.name == "energy") return generate_energy(spec);
    if (spec.name == "mudnails") return generate_mudnails(spec);
    throw UnsupportedError("unknown benchmark '" + spec.name + "'");
}

} // namespace dmc
