#include "dmc/dvi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "dmc/graph.hpp"

namespace dmc {

namespace {
constexpr double kScoreSlack = 1e-12;
} // namespace

std::uint32_t SlackGrid::round_down(double value) const {
    const double clamped = std::max(vmin, value);
    const double idx = std::floor((clamped - vmin) / stride() + 1e-9);
    return static_cast<std::uint32_t>(std::min<double>(idx, atoms - 1));
}

void SlackGrid::check() const {
    if (atoms < 2) throw Error("slack grid needs at least 2 atoms");
    if (!(vmin < vmax)) throw Error("slack grid needs vmin < vmax");
}

std::vector<WeightedPoint> ApproxDist::points() const {
    return kind == ReprKind::categorical ? categorical.points() : quantile.points();
}

double ApproxDist::mean() const {
    return kind == ReprKind::categorical ? dmc::mean(categorical) : dmc::mean(quantile);
}

double ApproxDist::cvar_at(RiskLevel level) const {
    return kind == ReprKind::categorical ? dmc::cvar(categorical, level)
                                         : dmc::cvar(quantile, level);
}

double ApproxDist::stat(int kind_, double alpha) const {
    const auto pts = points();
    switch (static_cast<StatQuery::Kind>(kind_)) {
        case StatQuery::E: return dmc::mean(pts, 0.0);
        case StatQuery::Var: return dmc::variance(pts, 0.0);
        case StatQuery::Sd: return std::sqrt(dmc::variance(pts, 0.0));
        case StatQuery::Mode: return dmc::mode(pts);
        case StatQuery::VaR: return dmc::var_at_risk(pts, 0.0, RiskLevel(alpha));
        case StatQuery::CVaR: return dmc::cvar(pts, 0.0, RiskLevel(alpha));
    }
    return 0.0;
}

namespace {

void parallel_for(std::uint32_t n, std::uint32_t threads, auto&& fn) {
    std::uint32_t k = threads == 0 ? std::thread::hardware_concurrency() : threads;
    k = std::max(1u, std::min({k, n, 64u}));
    if (k == 1) {
        fn(0u, n, 0u);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(k);
    const std::uint32_t chunk = (n + k - 1) / k;
    for (std::uint32_t t = 0; t < k; ++t) {
        const std::uint32_t begin = t * chunk, end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, begin, end, t] { fn(begin, end, t); });
    }
    for (auto& th : pool) th.join();
}

// Representation backends: row layout, projected Bellman backup, action
// scores and the convergence distance. Tables are flat num_states x m.

struct CategoricalBackend {
    ReprParams params;
    double theta1, stride;
    std::size_t m;

    explicit CategoricalBackend(const ReprParams& p)
        : params(p), theta1(p.vmin), stride(p.stride()), m(p.atoms) {}

    void init_row(std::span<double> row) const {
        std::fill(row.begin(), row.end(), 0.0);
        // delta_0 on the grid (clamped like any other projection)
        const double pos = (0.0 - theta1) / stride;
        if (pos <= 0.0) {
            row[0] = 1.0;
        } else if (pos >= static_cast<double>(m - 1)) {
            row[m - 1] = 1.0;
        } else {
            auto lo = static_cast<std::size_t>(pos);
            const double frac = pos - static_cast<double>(lo);
            row[lo] = 1.0 - frac;
            if (frac > 0.0) row[lo + 1] = frac;
        }
    }

    void backup(std::span<double> out, const std::vector<Transition>& transitions,
                std::int64_t reward, const std::vector<double>& table) const {
        std::fill(out.begin(), out.end(), 0.0);
        const double shift = static_cast<double>(reward) / stride;
        for (const auto& t : transitions)
            accumulate_shifted_categorical(out, {table.data() + t.target * m, m}, t.prob,
                                           shift);
    }

    double mean_of(std::span<const double> row) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) acc += static_cast<double>(i) * row[i];
        return theta1 + stride * acc;
    }

    double excess_of(std::span<const double> row, double b) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double x = theta1 + stride * static_cast<double>(i);
            if (x > b) acc += (x - b) * row[i];
        }
        return acc;
    }

    double distance(std::span<const double> a, std::span<const double> b) const {
        return cramer_l2(a, b, stride);
    }

    ApproxDist wrap(std::span<const double> row) const {
        ApproxDist d;
        d.kind = ReprKind::categorical;
        d.categorical = {theta1, stride, std::vector<double>(row.begin(), row.end())};
        return d;
    }
};

struct QuantileBackend {
    ReprParams params;
    std::size_t m;
    // per-thread scratch for the mixture sort
    mutable std::vector<std::vector<std::pair<double, double>>> scratch;

    explicit QuantileBackend(const ReprParams& p) : params(p), m(p.atoms) {
        scratch.resize(65);
    }

    void init_row(std::span<double> row) const { std::fill(row.begin(), row.end(), 0.0); }

    void backup_t(std::span<double> out, const std::vector<Transition>& transitions,
                  std::int64_t reward, const std::vector<double>& table,
                  std::uint32_t thread) const {
        std::vector<std::pair<double, std::span<const double>>> views;
        views.reserve(transitions.size());
        for (const auto& t : transitions)
            views.emplace_back(t.prob, std::span<const double>(table.data() + t.target * m, m));
        project_quantile_mixture(out, static_cast<double>(reward), views, scratch[thread]);
    }

    double mean_of(std::span<const double> row) const {
        double acc = 0.0;
        for (double v : row) acc += v;
        return acc / static_cast<double>(m);
    }

    double excess_of(std::span<const double> row, double b) const {
        double acc = 0.0;
        for (double v : row)
            if (v > b) acc += v - b;
        return acc / static_cast<double>(m);
    }

    double distance(std::span<const double> a, std::span<const double> b) const {
        return wasserstein_w1(a, b);
    }

    ApproxDist wrap(std::span<const double> row) const {
        ApproxDist d;
        d.kind = ReprKind::quantile;
        d.quantile = {std::vector<double>(row.begin(), row.end())};
        return d;
    }
};

struct CoreResult {
    std::vector<double> table;
    Policy policy;
    std::uint32_t iterations = 0;
    double residual = 0.0;
    bool frozen = false;
};

// Synchronous sweeps: the new table is computed entirely from the old one.
// `budget` gives the b of E([X-b]^+) scoring per state; empty = risk-neutral
// (expected-value scoring). If the residual has not dropped below epsilon
// within the iteration cap, the current argmin policy is frozen and plain
// policy-evaluation sweeps finish the job.
template <typename Backend>
CoreResult run_dvi_core(const Backend& bk, const Mdp& mdp, const ActionRewards& rewards,
                        const StateSet& target, std::span<const double> budget,
                        const DviOptions& options) {
    const std::uint32_t n = mdp.num_states;
    const std::size_t m = bk.m;
    CoreResult res;
    res.table.resize(static_cast<std::size_t>(n) * m);
    res.policy.choice.assign(n, 0);
    std::vector<double> next(res.table.size());
    for (std::uint32_t s = 0; s < n; ++s) {
        bk.init_row({res.table.data() + static_cast<std::size_t>(s) * m, m});
        bk.init_row({next.data() + static_cast<std::size_t>(s) * m, m});
    }

    std::vector<double> maxima(65, 0.0);

    auto sweep = [&](bool frozen) {
        std::fill(maxima.begin(), maxima.end(), 0.0);
        parallel_for(n, options.threads, [&](std::uint32_t begin, std::uint32_t end,
                                             std::uint32_t thread) {
            std::vector<double> tmp(m), best(m);
            double local_max = 0.0;
            for (std::uint32_t s = begin; s < end; ++s) {
                std::span<double> out{next.data() + static_cast<std::size_t>(s) * m, m};
                if (target.contains(s)) continue;  // held at delta_0
                const auto& actions = mdp.choices[s];
                std::int32_t best_a = -1;
                double best_score = 0.0;
                if (frozen) {
                    best_a = res.policy.choice[s];
                    if constexpr (requires { bk.backup_t(best, actions[0].transitions, 0,
                                                         res.table, thread); })
                        bk.backup_t(best, actions[best_a].transitions, rewards[s][best_a],
                                    res.table, thread);
                    else
                        bk.backup(best, actions[best_a].transitions, rewards[s][best_a],
                                  res.table);
                } else {
                    for (std::size_t a = 0; a < actions.size(); ++a) {
                        if constexpr (requires { bk.backup_t(tmp, actions[a].transitions, 0,
                                                             res.table, thread); })
                            bk.backup_t(tmp, actions[a].transitions, rewards[s][a], res.table,
                                        thread);
                        else
                            bk.backup(tmp, actions[a].transitions, rewards[s][a], res.table);
                        const double score = budget.empty()
                                                 ? bk.mean_of(tmp)
                                                 : bk.excess_of(tmp, budget[s]);
                        if (best_a < 0 || score < best_score - kScoreSlack) {
                            best_a = static_cast<std::int32_t>(a);
                            best_score = score;
                            std::swap(tmp, best);
                        }
                    }
                }
                std::copy(best.begin(), best.end(), out.begin());
                res.policy.choice[s] = best_a;
                const double d = bk.distance(
                    {res.table.data() + static_cast<std::size_t>(s) * m, m}, out);
                local_max = std::max(local_max, d);
            }
            maxima[thread] = std::max(maxima[thread], local_max);
        });
        res.table.swap(next);
        return *std::max_element(maxima.begin(), maxima.end());
    };

    auto loop = [&](bool frozen) {
        for (std::uint32_t i = 0; i < options.max_iterations; ++i) {
            ++res.iterations;
            res.residual = sweep(frozen);
            if (res.residual <= options.epsilon) return true;
        }
        return false;
    };

    if (!loop(false)) {
        res.frozen = true;
        if (!loop(true))
            throw ConvergenceError("value iteration did not reach residual " +
                                   std::to_string(options.epsilon) + " within " +
                                   std::to_string(res.iterations) + " iterations");
    }
    return res;
}

void check_almost_sure(const Mdp& mdp, const StateSet& target) {
    const StateSet good = almost_sure_reach_exists(mdp, target);
    const StateSet reach = reachable_states(mdp);
    std::string offenders;
    std::uint32_t count = 0;
    for (StateId s = 0; s < mdp.num_states; ++s) {
        if (reach.contains(s) && !good.contains(s)) {
            if (count < 10) offenders += (count ? "," : "") + std::to_string(s);
            ++count;
        }
    }
    if (count > 0)
        throw PreconditionError("NotAlmostSureReachable: " + std::to_string(count) +
                                " reachable state(s) cannot reach the target almost surely: " +
                                offenders);
}

template <typename Backend>
DviResult finish_dvi(const Backend& bk, CoreResult&& core, StateId initial) {
    DviResult out;
    out.policy = std::move(core.policy);
    out.iterations = core.iterations;
    out.residual = core.residual;
    out.frozen_policy = core.frozen;
    out.initial = bk.wrap({core.table.data() + static_cast<std::size_t>(initial) * bk.m, bk.m});
    return out;
}

} // namespace

DviResult risk_neutral_dvi(const Mdp& mdp, const ActionRewards& rewards, const StateSet& target,
                           const ReprParams& params, const DviOptions& options) {
    params.check();
    check_almost_sure(mdp, target);
    if (params.kind == ReprKind::categorical) {
        CategoricalBackend bk(params);
        return finish_dvi(bk, run_dvi_core(bk, mdp, rewards, target, {}, options), mdp.initial);
    }
    QuantileBackend bk(params);
    return finish_dvi(bk, run_dvi_core(bk, mdp, rewards, target, {}, options), mdp.initial);
}

SlackProduct build_slack_product(const Mdp& mdp, const ActionRewards& rewards,
                                 const StateSet& target, const SlackGrid& grid) {
    grid.check();
    SlackProduct out;
    out.grid = grid;
    out.base_states = mdp.num_states;
    const std::uint32_t K = grid.atoms;
    const std::uint32_t n = mdp.num_states * K;
    out.mdp.num_states = n;
    out.mdp.choices.resize(n);
    out.mdp.labeling.atom_names = mdp.labeling.atom_names;
    out.mdp.labeling.labels.resize(n);
    out.rewards.resize(n);
    out.target = StateSet(n);

    for (StateId s = 0; s < mdp.num_states; ++s) {
        for (std::uint32_t j = 0; j < K; ++j) {
            const StateId p = out.state_of(s, j);
            out.mdp.labeling.labels[p] = mdp.labeling.labels[s];
            if (target.contains(s)) out.target.insert(p);
            auto& actions = out.mdp.choices[p];
            actions.reserve(mdp.choices[s].size());
            out.rewards[p] = rewards[s];
            for (std::size_t a = 0; a < mdp.choices[s].size(); ++a) {
                const auto& choice = mdp.choices[s][a];
                const std::uint32_t j2 =
                    grid.round_down(grid.atom(j) - static_cast<double>(rewards[s][a]));
                Choice c;
                c.label = choice.label;
                c.transitions.reserve(choice.transitions.size());
                for (const auto& t : choice.transitions)
                    c.transitions.push_back({out.state_of(t.target, j2), t.prob});
                actions.push_back(std::move(c));
            }
        }
    }
    out.entries.resize(K);
    for (std::uint32_t j = 0; j < K; ++j) out.entries[j] = out.state_of(mdp.initial, j);
    out.mdp.initial = out.entries[0];
    return out;
}

RiskSensitiveResult risk_sensitive_dvi(const Mdp& mdp, const ActionRewards& rewards,
                                       const StateSet& target, RiskLevel level,
                                       const SlackGrid& grid, const ReprParams& params,
                                       const DviOptions& options) {
    params.check();
    check_almost_sure(mdp, target);
    RiskSensitiveResult out;
    out.product = build_slack_product(mdp, rewards, target, grid);

    std::vector<double> budget(out.product.mdp.num_states);
    for (StateId p = 0; p < out.product.mdp.num_states; ++p)
        budget[p] = grid.atom(out.product.budget_index(p));

    auto pick = [&](const auto& bk, CoreResult&& core) {
        out.budget_cvars.resize(grid.atoms);
        out.budget_dists.resize(grid.atoms);
        std::uint32_t best = 0;
        for (std::uint32_t j = 0; j < grid.atoms; ++j) {
            const StateId e = out.product.entries[j];
            out.budget_dists[j] =
                bk.wrap({core.table.data() + static_cast<std::size_t>(e) * bk.m, bk.m});
            out.budget_cvars[j] = out.budget_dists[j].cvar_at(level);
            if (out.budget_cvars[j] < out.budget_cvars[best] - kScoreSlack) best = j;
        }
        out.budget_index = best;
        out.budget = grid.atom(best);
        out.product.mdp.initial = out.product.entries[best];
        out.dvi = finish_dvi(bk, std::move(core), out.product.entries[best]);
    };

    if (params.kind == ReprKind::categorical) {
        CategoricalBackend bk(params);
        pick(bk, run_dvi_core(bk, out.product.mdp, out.product.rewards, out.product.target,
                              budget, options));
    } else {
        QuantileBackend bk(params);
        pick(bk, run_dvi_core(bk, out.product.mdp, out.product.rewards, out.product.target,
                              budget, options));
    }
    return out;
}

double evaluate_stat(const SparseDist& dist, const StatQuery& query) {
    switch (query.kind) {
        case StatQuery::E: return mean(dist);
        case StatQuery::Var: return variance(dist);
        case StatQuery::Sd: return std::sqrt(variance(dist));
        case StatQuery::Mode: return mode(dist);
        case StatQuery::VaR: return var_at_risk(dist, RiskLevel(query.alpha));
        case StatQuery::CVaR: return cvar(dist, RiskLevel(query.alpha));
    }
    return 0.0;
}

Evaluation evaluate_policy(const Mdp& mdp, const Policy& policy, const ActionRewards& rewards,
                           const StateSet& target, double eps, std::span<const StatQuery> queries,
                           const ApproxDist* reference, const ForwardOptions& forward_options) {
    auto [dtmc, state_rewards] = induce_dtmc(mdp, policy, rewards);
    auto fwd = forward_distribution(dtmc, state_rewards, target, eps, forward_options);

    Evaluation out;
    out.dist = std::move(fwd.dist);
    out.residual = fwd.residual;
    out.iterations = fwd.iterations;
    for (const auto& q : queries) {
        StatResult r;
        r.query = q;
        r.exact = evaluate_stat(out.dist, q);
        if (reference != nullptr) {
            r.approx = reference->stat(q.kind, q.alpha);
            if (r.exact != 0.0)
                r.delta_percent = 100.0 * std::abs(r.approx - r.exact) / std::abs(r.exact);
            else
                r.delta_percent = r.approx == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            r.approx = std::numeric_limits<double>::quiet_NaN();
            r.delta_percent = std::numeric_limits<double>::quiet_NaN();
        }
        out.stats.push_back(r);
    }
    return out;
}

} // namespace dmc
