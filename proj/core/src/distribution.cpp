#include "dmc/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCdfSlack = 1e-12;
} // namespace

SparseDist SparseDist::from_map(const std::map<std::int64_t, double>& mass, double p_inf) {
    SparseDist d;
    d.p_inf = p_inf;
    d.support.reserve(mass.size());
    for (const auto& [v, p] : mass)
        if (p > 0.0) d.support.emplace_back(v, p);
    return d;
}

double SparseDist::finite_mass() const {
    double m = 0.0;
    for (const auto& [v, p] : support) m += p;
    return m;
}

double SparseDist::total_mass() const { return finite_mass() + p_inf; }

std::vector<WeightedPoint> SparseDist::points() const {
    std::vector<WeightedPoint> out;
    out.reserve(support.size());
    for (const auto& [v, p] : support) out.push_back({static_cast<double>(v), p});
    return out;
}

CategoricalDist CategoricalDist::zero(double theta1, double stride, std::size_t m) {
    return {theta1, stride, std::vector<double>(m, 0.0)};
}

std::vector<WeightedPoint> CategoricalDist::points() const {
    std::vector<WeightedPoint> out;
    for (std::size_t i = 0; i < probs.size(); ++i)
        if (probs[i] > 0.0) out.push_back({location(i), probs[i]});
    return out;
}

std::vector<WeightedPoint> QuantileDist::points() const {
    std::vector<WeightedPoint> out;
    const double w = 1.0 / static_cast<double>(locations.size());
    for (double loc : locations) {
        if (!out.empty() && out.back().value == loc)
            out.back().prob += w;
        else
            out.push_back({loc, w});
    }
    return out;
}

void ReprParams::check() const {
    if (kind == ReprKind::categorical) {
        if (atoms < 2) throw Error("categorical representation needs at least 2 atoms");
        if (!(vmin < vmax)) throw Error("representation bounds need vmin < vmax");
    } else if (atoms < 1) {
        throw Error("quantile representation needs at least 1 atom");
    }
}

RiskLevel::RiskLevel(double alpha_) : alpha(alpha_) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error("risk level must lie in (0,1)");
}

// ---- statistics ------------------------------------------------------------

double mean(std::span<const WeightedPoint> points, double p_inf) {
    if (p_inf > 0.0) return kInf;
    double m = 0.0;
    for (const auto& pt : points) m += pt.value * pt.prob;
    return m;
}

double variance(std::span<const WeightedPoint> points, double p_inf) {
    if (p_inf > 0.0) return kInf;
    double m = mean(points, 0.0), m2 = 0.0;
    for (const auto& pt : points) m2 += pt.value * pt.value * pt.prob;
    return std::max(0.0, m2 - m * m);
}

double mode(std::span<const WeightedPoint> points) {
    double best_v = 0.0, best_p = -1.0;
    for (const auto& pt : points)
        if (pt.prob > best_p + kCdfSlack) {
            best_p = pt.prob;
            best_v = pt.value;
        }
    return best_v;
}

double var_at_risk(std::span<const WeightedPoint> points, double p_inf, RiskLevel level) {
    (void)p_inf;
    double cum = 0.0;
    for (const auto& pt : points) {
        cum += pt.prob;
        if (cum >= level.alpha - kCdfSlack) return pt.value;
    }
    return kInf;
}

double cvar(std::span<const WeightedPoint> points, double p_inf, RiskLevel level) {
    if (p_inf > 0.0) return kInf;
    const double v = var_at_risk(points, 0.0, level);
    if (v == kInf) return kInf;
    double cdf_at_v = 0.0, tail = 0.0;
    for (const auto& pt : points) {
        if (pt.value <= v)
            cdf_at_v += pt.prob;
        else
            tail += pt.value * pt.prob;
    }
    const double above = std::max(0.0, cdf_at_v - level.alpha);
    return (above * v + tail) / (1.0 - level.alpha);
}

double expected_excess(std::span<const WeightedPoint> points, double b) {
    double e = 0.0;
    for (const auto& pt : points)
        if (pt.value > b) e += (pt.value - b) * pt.prob;
    return e;
}

std::pair<double, double> cvar_dual(std::span<const WeightedPoint> points, RiskLevel level,
                                    std::span<const double> grid) {
    double best_b = 0.0, best = kInf;
    for (double b : grid) {
        const double obj = b + expected_excess(points, b) / (1.0 - level.alpha);
        if (obj < best - kCdfSlack) {
            best = obj;
            best_b = b;
        }
    }
    return {best_b, best};
}

#define DMC_STAT_OVERLOADS(T, PINF)                                                     \
    double mean(const T& d) { return mean(d.points(), PINF); }                          \
    double variance(const T& d) { return variance(d.points(), PINF); }                  \
    double mode(const T& d) { return mode(std::span<const WeightedPoint>(d.points())); } \
    double var_at_risk(const T& d, RiskLevel level) {                                   \
        return var_at_risk(d.points(), PINF, level);                                    \
    }                                                                                   \
    double cvar(const T& d, RiskLevel level) { return cvar(d.points(), PINF, level); }

DMC_STAT_OVERLOADS(SparseDist, d.p_inf)
DMC_STAT_OVERLOADS(CategoricalDist, 0.0)
DMC_STAT_OVERLOADS(QuantileDist, 0.0)
#undef DMC_STAT_OVERLOADS

double expected_excess(const CategoricalDist& d, double b) {
    double e = 0.0;
    for (std::size_t i = 0; i < d.probs.size(); ++i) {
        const double x = d.location(i);
        if (x > b) e += (x - b) * d.probs[i];
    }
    return e;
}

double expected_excess(const QuantileDist& d, double b) {
    double e = 0.0;
    for (double loc : d.locations)
        if (loc > b) e += loc - b;
    return e / static_cast<double>(d.locations.size());
}

std::pair<double, double> cvar_dual(const SparseDist& d, RiskLevel level,
                                    std::span<const double> grid) {
    return cvar_dual(std::span<const WeightedPoint>(d.points()), level, grid);
}

// ---- projections -----------------------------------------------------------

CategoricalDist project_categorical(std::span<const WeightedPoint> points, const ReprParams& p) {
    p.check();
    auto out = CategoricalDist::zero(p.vmin, p.stride(), p.atoms);
    const auto m = static_cast<std::ptrdiff_t>(p.atoms);
    const double inv_stride = 1.0 / out.stride;
    for (const auto& pt : points) {
        double pos = (pt.value - out.theta1) * inv_stride;
        const double snapped = std::round(pos);
        if (std::abs(pos - snapped) < 1e-9) pos = snapped;
        if (pos <= 0.0) {
            out.probs[0] += pt.prob;
        } else if (pos >= static_cast<double>(m - 1)) {
            out.probs[m - 1] += pt.prob;
        } else {
            const auto lo = static_cast<std::ptrdiff_t>(pos);
            const double frac = pos - static_cast<double>(lo);
            out.probs[lo] += pt.prob * (1.0 - frac);
            if (frac > 0.0) out.probs[lo + 1] += pt.prob * frac;
        }
    }
    return out;
}

CategoricalDist project_categorical(const SparseDist& d, const ReprParams& p) {
    if (d.p_inf > 0.0)
        throw InfiniteMassError("cannot project mass at infinity onto a categorical grid");
    return project_categorical(std::span<const WeightedPoint>(d.points()), p);
}

QuantileDist project_quantile(std::span<const WeightedPoint> points, double p_inf,
                              std::uint32_t m) {
    if (m < 1) throw Error("quantile representation needs at least 1 atom");
    if (p_inf >= 1.0 / (2.0 * static_cast<double>(m)))
        throw InfiniteMassError("mass at infinity too large for a quantile representation");
    QuantileDist out;
    out.locations.resize(m);
    double cum = 0.0;
    std::size_t next = 0;
    for (const auto& pt : points) {
        cum += pt.prob;
        while (next < m && cum >= (2.0 * next + 1.0) / (2.0 * m) - kCdfSlack)
            out.locations[next++] = pt.value;
    }
    // Leftover targets (only possible through float shortfall): clamp to max.
    for (; next < m; ++next)
        out.locations[next] = points.empty() ? 0.0 : points.back().value;
    return out;
}

QuantileDist project_quantile(const SparseDist& d, std::uint32_t m) {
    return project_quantile(std::span<const WeightedPoint>(d.points()), d.p_inf, m);
}

// ---- Bellman backup --------------------------------------------------------

void accumulate_shifted_categorical(std::span<double> out, std::span<const double> in,
                                    double weight, double shift_strides) {
    const auto m = static_cast<std::ptrdiff_t>(out.size());
    double lo_f = std::floor(shift_strides);
    double frac = shift_strides - lo_f;
    if (frac < 1e-9) {
        frac = 0.0;
    } else if (frac > 1.0 - 1e-9) {
        frac = 0.0;
        lo_f += 1.0;
    }
    const auto lo = static_cast<std::ptrdiff_t>(lo_f);
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        const double p = in[i];
        if (p == 0.0) continue;
        const std::ptrdiff_t j = i + lo;
        if (j >= m - 1) {
            out[m - 1] += weight * p;
        } else if (j < 0) {
            out[0] += weight * p;
        } else if (frac == 0.0) {
            out[j] += weight * p;
        } else {
            out[j] += weight * p * (1.0 - frac);
            out[j + 1] += weight * p * frac;
        }
    }
}

CategoricalDist bellman_backup(std::int64_t reward,
                               std::span<const std::pair<double, const CategoricalDist*>> branches,
                               const ReprParams& p) {
    auto out = CategoricalDist::zero(p.vmin, p.stride(), p.atoms);
    const double shift = static_cast<double>(reward) / out.stride;
    for (const auto& [prob, dist] : branches) {
        if (dist->probs.size() != p.atoms)
            throw ParamMismatchError("branch atom count differs from representation");
        accumulate_shifted_categorical(out.probs, dist->probs, prob, shift);
    }
    return out;
}

void project_quantile_mixture(std::span<double> out, double reward,
                              std::span<const std::pair<double, std::span<const double>>> branches,
                              std::vector<std::pair<double, double>>& scratch) {
    scratch.clear();
    for (const auto& [prob, locs] : branches) {
        const double w = prob / static_cast<double>(locs.size());
        for (double loc : locs) scratch.emplace_back(loc + reward, w);
    }
    std::sort(scratch.begin(), scratch.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    const auto m = out.size();
    double cum = 0.0;
    std::size_t next = 0;
    for (const auto& [loc, w] : scratch) {
        cum += w;
        while (next < m && cum >= (2.0 * next + 1.0) / (2.0 * m) - kCdfSlack) out[next++] = loc;
    }
    for (; next < m; ++next) out[next] = scratch.empty() ? 0.0 : scratch.back().first;
}

QuantileDist bellman_backup(std::int64_t reward,
                            std::span<const std::pair<double, const QuantileDist*>> branches,
                            const ReprParams& p) {
    QuantileDist out;
    out.locations.resize(p.atoms);
    std::vector<std::pair<double, std::span<const double>>> views;
    views.reserve(branches.size());
    for (const auto& [prob, dist] : branches) {
        if (dist->locations.size() != p.atoms)
            throw ParamMismatchError("branch atom count differs from representation");
        views.emplace_back(prob, std::span<const double>(dist->locations));
    }
    std::vector<std::pair<double, double>> scratch;
    project_quantile_mixture(out.locations, static_cast<double>(reward), views, scratch);
    return out;
}

// ---- distances -------------------------------------------------------------

double cramer_l2(std::span<const double> a, std::span<const double> b, double stride) {
    double fa = 0.0, fb = 0.0, sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        fa += a[i];
        fb += b[i];
        const double d = fa - fb;
        sum += d * d;
    }
    return std::sqrt(stride * sum);
}

double cramer_l2(const CategoricalDist& a, const CategoricalDist& b) {
    if (a.probs.size() != b.probs.size() || std::abs(a.theta1 - b.theta1) > 1e-12 ||
        std::abs(a.stride - b.stride) > 1e-12)
        throw ParamMismatchError("categorical distance requires identical grids");
    return cramer_l2(a.probs, b.probs, a.stride);
}

double wasserstein_w1(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
    return sum / static_cast<double>(a.size());
}

double wasserstein_w1(const QuantileDist& a, const QuantileDist& b) {
    if (a.locations.size() != b.locations.size())
        throw ParamMismatchError("quantile distance requires equal atom counts");
    return wasserstein_w1(a.locations, b.locations);
}

double cramer_l2_general(std::span<const WeightedPoint> a, std::span<const WeightedPoint> b) {
    double fa = 0.0, fb = 0.0, sum = 0.0;
    std::size_t i = 0, j = 0;
    double prev_x = 0.0;
    bool have_prev = false;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j >= b.size() || (i < a.size() && a[i].value <= b[j].value))
            x = a[i].value;
        else
            x = b[j].value;
        if (have_prev && x > prev_x) {
            const double d = fa - fb;
            sum += (x - prev_x) * d * d;
        }
        while (i < a.size() && a[i].value == x) fa += a[i++].prob;
        while (j < b.size() && b[j].value == x) fb += b[j++].prob;
        prev_x = x;
        have_prev = true;
    }
    return std::sqrt(sum);
}

} // namespace dmc
