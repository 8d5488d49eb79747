#include "dmc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dmc/graph.hpp"
#include "dmc/product.hpp"

namespace dmc {

int exit_code_for(const Error& e) {
    if (dynamic_cast<const StagedError*>(&e) != nullptr)
        return static_cast<const StagedError&>(e).exit_code;
    if (dynamic_cast<const PreconditionError*>(&e) != nullptr) return 3;
    if (dynamic_cast<const ConvergenceError*>(&e) != nullptr) return 4;
    return 2;
}

namespace {

template <typename F>
auto staged(const std::string& stage, F&& f) {
    try {
        return f();
    } catch (const StagedError&) {
        throw;
    } catch (const Error& e) {
        throw StagedError(stage, exit_code_for(e), e.what());
    }
}

struct StageTimer {
    using clock = std::chrono::steady_clock;
    clock::time_point start = clock::now();
    nlohmann::json stages = nlohmann::json::object();
    clock::time_point mark = clock::now();

    void lap(const std::string& name) {
        auto now = clock::now();
        stages[name] =
            std::chrono::duration_cast<std::chrono::milliseconds>(now - mark).count();
        mark = now;
    }
    nlohmann::json finish() {
        nlohmann::json t;
        t["total_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - start).count();
        t["stages_ms"] = stages;
        return t;
    }
};

nlohmann::json dist_json(std::span<const WeightedPoint> points, double p_inf) {
    nlohmann::json d;
    d["support"] = nlohmann::json::array();
    d["probs"] = nlohmann::json::array();
    for (const auto& pt : points) {
        d["support"].push_back(pt.value);
        d["probs"].push_back(pt.prob);
    }
    d["p_inf"] = p_inf;
    return d;
}

double json_safe(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::max(); }

nlohmann::json stat_json(double value) {
    if (std::isinf(value)) return "inf";
    return value;
}

void maybe_emit_dist(const std::string& path, std::span<const WeightedPoint> points,
                     double p_inf) {
    if (path.empty()) return;
    const bool json = path.size() > 5 && path.substr(path.size() - 5) == ".json";
    write_distribution(points, p_inf, path, json ? DistFormat::json : DistFormat::csv);
}

const ActionRewards& reward_structure(const MdpModel& model, const std::string& name) {
    auto it = model.rewards.find(name);
    if (it == model.rewards.end()) throw Error("unknown reward structure '" + name + "'");
    return it->second;
}

} // namespace

const char* stat_name(StatQuery::Kind kind) {
    static const char* names[] = {"E", "Var", "sd", "mode", "VaR", "CVaR"};
    return names[kind];
}

nlohmann::json run_check(const DtmcModel& model, const Query& query, const RunConfig& cfg) {
    StageTimer timer;
    nlohmann::json out;
    out["schema"] = 1;
    out["kind"] = "check";
    out["query"] = to_string(query);

    const auto& rewards = staged("model", [&]() -> const StateRewards& {
        auto it = model.rewards.find(query.reward_name);
        if (it == model.rewards.end())
            throw Error("unknown reward structure '" + query.reward_name + "'");
        return it->second;
    });
    const Dfa dfa = staged("automaton", [&] { return to_dfa(query.formula); });
    timer.lap("automaton");
    const DtmcProduct product =
        staged("product", [&] { return product_dtmc(model.dtmc, rewards, dfa); });
    timer.lap("product");
    const ForwardResult fwd = staged("forward", [&] {
        return forward_distribution(product.dtmc, product.rewards, product.target,
                                    cfg.forward_eps, {cfg.forward_max_iters, 1e-15});
    });
    timer.lap("forward");
    const double value =
        staged("statistic", [&] { return evaluate_stat(fwd.dist, query.stat); });

    out["statistic"] = stat_name(query.stat.kind);
    if (query.stat.kind == StatQuery::VaR || query.stat.kind == StatQuery::CVaR)
        out["alpha"] = query.stat.alpha;
    out["value"] = stat_json(value);
    out["residual"] = fwd.residual;
    out["iterations"] = fwd.iterations;
    out["product_states"] = product.dtmc.num_states;
    out["automaton_states"] = dfa.num_states;
    out["distribution"] = dist_json(fwd.dist.points(), fwd.dist.p_inf);
    staged("report", [&] {
        maybe_emit_dist(cfg.emit_dist, fwd.dist.points(), fwd.dist.p_inf);
        return 0;
    });
    out["timings"] = timer.finish();
    return out;
}

nlohmann::json run_optimize(const MdpModel& model, const Query& query, const RunConfig& cfg) {
    if (!query.minimize)
        throw StagedError("query", 2, "optimisation needs a min=? query");
    StageTimer timer;
    nlohmann::json out;
    out["schema"] = 1;
    out["kind"] = "optimize";
    out["query"] = to_string(query);

    const auto& rewards =
        staged("model", [&]() -> const ActionRewards& { return reward_structure(model, query.reward_name); });
    const Dfa dfa = staged("automaton", [&] { return to_dfa(query.formula); });
    timer.lap("automaton");
    const MdpProduct product =
        staged("product", [&] { return product_mdp(model.mdp, rewards, dfa); });
    timer.lap("product");

    DviOptions dvi_options{cfg.dvi_epsilon, cfg.dvi_max_iters, cfg.threads};
    out["product_states"] = product.mdp.num_states;
    out["automaton_states"] = dfa.num_states;

    ApproxDist approx;
    double value = 0.0;
    nlohmann::json dvi_info;
    // For the precise evaluation below: the MDP the policy lives on and the
    // matching target set.
    const Mdp* policy_space = &product.mdp;
    const ActionRewards* policy_rewards = &product.rewards;
    const StateSet* policy_target = &product.target;
    Policy policy;
    std::optional<RiskSensitiveResult> sensitive;

    if (query.stat.kind == StatQuery::E) {
        auto res = staged("dvi", [&] {
            return risk_neutral_dvi(product.mdp, product.rewards, product.target, cfg.repr,
                                    dvi_options);
        });
        value = res.initial.mean();
        approx = res.initial;
        policy = res.policy;
        dvi_info = {{"iterations", res.iterations},
                    {"residual", res.residual},
                    {"frozen_policy", res.frozen_policy},
                    {"mode", "risk-neutral"}};
        staged("report", [&] {
            if (!cfg.emit_policy.empty())
                write_policy_file(cfg.emit_policy, policy, product.mdp, product.target, 0);
            return 0;
        });
    } else {
        sensitive = staged("dvi", [&] {
            return risk_sensitive_dvi(product.mdp, product.rewards, product.target,
                                      RiskLevel(query.stat.alpha),
                                      SlackGrid{cfg.repr.vmin, cfg.repr.vmax, cfg.budget_atoms},
                                      cfg.repr, dvi_options);
        });
        value = sensitive->budget_cvars[sensitive->budget_index];
        approx = sensitive->dvi.initial;
        policy = sensitive->dvi.policy;
        policy_space = &sensitive->product.mdp;
        policy_rewards = &sensitive->product.rewards;
        policy_target = &sensitive->product.target;
        dvi_info = {{"iterations", sensitive->dvi.iterations},
                    {"residual", sensitive->dvi.residual},
                    {"frozen_policy", sensitive->dvi.frozen_policy},
                    {"mode", "risk-sensitive"},
                    {"budget", sensitive->budget},
                    {"budget_index", sensitive->budget_index}};
        nlohmann::json cvars = nlohmann::json::array();
        for (double c : sensitive->budget_cvars) cvars.push_back(json_safe(c));
        dvi_info["budget_cvars"] = cvars;
        staged("report", [&] {
            if (!cfg.emit_policy.empty())
                write_policy_file(cfg.emit_policy, policy, sensitive->product);
            return 0;
        });
    }
    timer.lap("dvi");

    out["value"] = stat_json(value);
    out["statistic"] = stat_name(query.stat.kind);
    if (query.stat.kind == StatQuery::CVaR) out["alpha"] = query.stat.alpha;
    out["dvi"] = dvi_info;
    out["distribution"] = dist_json(approx.points(), 0.0);

    if (approx.kind == ReprKind::categorical && !approx.categorical.probs.empty() &&
        approx.categorical.probs.back() > 1e-6)
        out["warnings"] = {"mass on the top atom: consider a larger --vmax"};

    if (cfg.evaluate) {
        const StatQuery q{query.stat.kind, query.stat.alpha};
        auto eval = staged("evaluate", [&] {
            return evaluate_policy(*policy_space, policy, *policy_rewards, *policy_target,
                                   cfg.forward_eps, {&q, 1}, &approx,
                                   {cfg.forward_max_iters, 1e-15});
        });
        timer.lap("evaluate");
        out["evaluation"] = {{"value", stat_json(eval.stats[0].exact)},
                             {"approx", stat_json(eval.stats[0].approx)},
                             {"delta_percent", json_safe(eval.stats[0].delta_percent)},
                             {"residual", eval.residual},
                             {"iterations", eval.iterations}};
        out["exact_distribution"] = dist_json(eval.dist.points(), eval.dist.p_inf);
        staged("report", [&] {
            maybe_emit_dist(cfg.emit_dist, eval.dist.points(), eval.dist.p_inf);
            return 0;
        });
    } else {
        staged("report", [&] {
            maybe_emit_dist(cfg.emit_dist, approx.points(), 0.0);
            return 0;
        });
    }
    out["timings"] = timer.finish();
    return out;
}

void write_policy_file(const std::string& path, const Policy& policy, const Mdp& mdp,
                       const StateSet& target, StateId initial) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "# policy\n# kind: product\n# initial: " << initial << "\n";
    for (StateId s = 0; s < mdp.num_states; ++s) {
        if (target.contains(s) || !policy.defined(s)) continue;
        out << s << ' ' << mdp.choices[s][policy.choice[s]].label << '\n';
    }
}

void write_policy_file(const std::string& path, const Policy& policy,
                       const SlackProduct& product) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    out << "# policy\n# kind: slack " << product.grid.atoms << ' ' << product.grid.vmin << ' '
        << product.grid.vmax << "\n# initial: " << product.mdp.initial << "\n";
    for (StateId p = 0; p < product.mdp.num_states; ++p) {
        if (product.target.contains(p) || !policy.defined(p)) continue;
        out << product.base_state(p) << ' ' << product.grid.atom(product.budget_index(p)) << ' '
            << product.mdp.choices[p][policy.choice[p]].label << '\n';
    }
}

StoredPolicy read_policy_file(const std::string& path, const Mdp& mdp) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    StoredPolicy stored;
    std::string line;
    long number = 0;
    std::vector<std::tuple<StateId, double, std::string>> slack_lines;
    std::vector<std::pair<StateId, std::string>> plain_lines;
    while (std::getline(in, line)) {
        ++number;
        if (line.rfind("# kind: slack", 0) == 0) {
            std::istringstream ss(line.substr(13));
            stored.slack = true;
            if (!(ss >> stored.grid.atoms >> stored.grid.vmin >> stored.grid.vmax))
                throw ParseError("bad slack policy header", number);
            continue;
        }
        if (line.rfind("# initial:", 0) == 0) {
            stored.initial = static_cast<StateId>(std::stoul(line.substr(10)));
            continue;
        }
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        if (stored.slack) {
            StateId s;
            double b;
            std::string label;
            if (!(ss >> s >> b >> label)) throw ParseError("expected 'state budget action'", number);
            slack_lines.emplace_back(s, b, label);
        } else {
            StateId s;
            std::string label;
            if (!(ss >> s >> label)) throw ParseError("expected 'state action'", number);
            plain_lines.emplace_back(s, label);
        }
    }

    auto action_of = [&](StateId s, const std::string& label, long ln) {
        for (std::size_t a = 0; a < mdp.choices[s].size(); ++a)
            if (mdp.choices[s][a].label == label) return static_cast<std::int32_t>(a);
        throw ParseError("state " + std::to_string(s) + " has no action '" + label + "'", ln);
    };

    if (stored.slack) {
        stored.grid.check();
        stored.policy.choice.assign(mdp.num_states * stored.grid.atoms, -1);
        for (const auto& [s, b, label] : slack_lines) {
            if (s >= mdp.num_states) throw ParseError("state out of range in policy", 0);
            const auto j = stored.grid.round_down(b);
            stored.policy.choice[s * stored.grid.atoms + j] = action_of(s, label, 0);
        }
    } else {
        stored.policy.choice.assign(mdp.num_states, -1);
        for (const auto& [s, label] : plain_lines) {
            if (s >= mdp.num_states) throw ParseError("state out of range in policy", 0);
            stored.policy.choice[s] = action_of(s, label, 0);
        }
    }
    return stored;
}

nlohmann::json run_evaluate(const MdpModel& model, const Query& optimized_for,
                            const StoredPolicy& stored, const std::vector<Query>& queries,
                            const RunConfig& cfg) {
    StageTimer timer;
    nlohmann::json out;
    out["schema"] = 1;
    out["kind"] = "evaluate";
    out["optimized_for"] = to_string(optimized_for);

    // Rebuild the structure the policy was computed on, then fix it.
    const auto& rewards = staged("model", [&]() -> const ActionRewards& {
        return reward_structure(model, optimized_for.reward_name);
    });
    const Dfa dfa = staged("automaton", [&] { return to_dfa(optimized_for.formula); });
    const MdpProduct product =
        staged("product", [&] { return product_mdp(model.mdp, rewards, dfa); });

    Dtmc induced;
    Policy policy = stored.policy;
    std::optional<SlackProduct> slack;
    staged("induce", [&] {
        if (stored.slack) {
            slack = build_slack_product(product.mdp, product.rewards, product.target,
                                        stored.grid);
            if (stored.initial >= slack->mdp.num_states)
                throw Error("policy initial state out of range");
            if (policy.choice.size() != slack->mdp.num_states)
                throw Error("policy does not match the rebuilt budget product");
            for (StateId p = 0; p < slack->mdp.num_states; ++p)
                if (!policy.defined(p) && slack->target.contains(p)) policy.choice[p] = 0;
            slack->mdp.initial = stored.initial;
            induced = induce_dtmc(slack->mdp, policy, slack->rewards).first;
        } else {
            Mdp fixed = product.mdp;
            fixed.initial = stored.initial;
            for (StateId p = 0; p < fixed.num_states; ++p)
                if (!policy.defined(p) && product.target.contains(p)) policy.choice[p] = 0;
            induced = induce_dtmc(fixed, policy, product.rewards).first;
        }
        return 0;
    });
    timer.lap("induce");

    // State rewards of the induced chain under any of the model's reward
    // structures: the policy fixes one action per state.
    auto rewards_under_policy = [&](const std::string& name) {
        const ActionRewards& named = reward_structure(model, name);
        StateRewards out_rewards(induced.num_states, 0);
        for (StateId p = 0; p < induced.num_states; ++p) {
            const StateId q = stored.slack ? slack->base_state(p) : p;
            const bool is_target =
                stored.slack ? slack->target.contains(p) : product.target.contains(p);
            if (is_target || !policy.defined(p)) continue;
            const auto a = static_cast<std::size_t>(policy.choice[p]);
            const StateId model_s = product.model_state[q];
            if (a < named[model_s].size()) out_rewards[p] = named[model_s][a];
        }
        return out_rewards;
    };

    // Each evaluation query runs the full check pipeline on the induced DTMC.
    out["results"] = nlohmann::json::array();
    for (const auto& q : queries) {
        const Dfa qdfa = staged("automaton", [&] { return to_dfa(q.formula); });
        const StateRewards qrewards =
            staged("model", [&] { return rewards_under_policy(q.reward_name); });
        const DtmcProduct qproduct = staged("product", [&] {
            return product_dtmc(induced, qrewards, qdfa);
        });
        const ForwardResult fwd = staged("forward", [&] {
            return forward_distribution(qproduct.dtmc, qproduct.rewards, qproduct.target,
                                        cfg.forward_eps, {cfg.forward_max_iters, 1e-15});
        });
        const double value =
            staged("statistic", [&] { return evaluate_stat(fwd.dist, q.stat); });
        nlohmann::json r;
        r["query"] = to_string(q);
        r["statistic"] = stat_name(q.stat.kind);
        if (q.stat.kind == StatQuery::VaR || q.stat.kind == StatQuery::CVaR)
            r["alpha"] = q.stat.alpha;
        r["value"] = stat_json(value);
        r["residual"] = fwd.residual;
        r["distribution"] = dist_json(fwd.dist.points(), fwd.dist.p_inf);
        out["results"].push_back(std::move(r));
    }
    timer.lap("queries");
    if (!cfg.emit_policy.empty())
        throw StagedError("report", 2, "NotAnOptimization: --emit-policy needs optimize");
    if (!cfg.emit_dist.empty() && !out["results"].empty()) {
        const auto& d = out["results"][0]["distribution"];
        std::vector<WeightedPoint> pts;
        for (std::size_t i = 0; i < d["support"].size(); ++i)
            pts.push_back({d["support"][i].get<double>(), d["probs"][i].get<double>()});
        staged("report", [&] {
            maybe_emit_dist(cfg.emit_dist, pts, d["p_inf"].get<double>());
            return 0;
        });
    }
    out["timings"] = timer.finish();
    return out;
}

} // namespace dmc
