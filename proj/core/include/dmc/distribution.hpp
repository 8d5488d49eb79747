#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "dmc/errors.hpp"

namespace dmc {

struct WeightedPoint {
    double value;
    double prob;
};

// Exact discrete distribution over the naturals plus a mass at infinity.
// Support is sorted, strictly increasing, zero-probability entries dropped.
struct SparseDist {
    std::vector<std::pair<std::int64_t, double>> support;
    double p_inf = 0.0;

    static SparseDist dirac(std::int64_t value) { return {{{value, 1.0}}, 0.0}; }
    static SparseDist from_map(const std::map<std::int64_t, double>& mass, double p_inf = 0.0);

    double total_mass() const;
    double finite_mass() const;
    std::vector<WeightedPoint> points() const;
};

// Probabilities on m evenly spaced atoms theta1, theta1+stride, ...
struct CategoricalDist {
    double theta1 = 0.0;
    double stride = 1.0;
    std::vector<double> probs;

    static CategoricalDist zero(double theta1, double stride, std::size_t m);
    double location(std::size_t i) const { return theta1 + stride * static_cast<double>(i); }
    std::size_t size() const { return probs.size(); }
    std::vector<WeightedPoint> points() const;
};

// m equally weighted atoms at nondecreasing locations; duplicates allowed.
struct QuantileDist {
    std::vector<double> locations;

    std::size_t size() const { return locations.size(); }
    std::vector<WeightedPoint> points() const;
};

enum class ReprKind { categorical, quantile };

struct ReprParams {
    ReprKind kind = ReprKind::categorical;
    std::uint32_t atoms = 201;
    double vmin = 0.0;
    double vmax = 1.0;

    double stride() const { return (vmax - vmin) / static_cast<double>(atoms - 1); }
    void check() const;
};

struct RiskLevel {
    explicit RiskLevel(double alpha);
    double alpha;
};

inline constexpr double kMassTolerance = 1e-9;

// ---- statistics ------------------------------------------------------------
// All of these have overloads for the three distribution types. Values at
// infinity propagate: mean/variance/cvar of a distribution with p_inf > 0 are
// +inf, var_at_risk is +inf when the finite mass never reaches alpha.

double mean(std::span<const WeightedPoint> points, double p_inf = 0.0);
double variance(std::span<const WeightedPoint> points, double p_inf = 0.0);
double mode(std::span<const WeightedPoint> points);
double var_at_risk(std::span<const WeightedPoint> points, double p_inf, RiskLevel level);
double cvar(std::span<const WeightedPoint> points, double p_inf, RiskLevel level);

double mean(const SparseDist& d);
double mean(const CategoricalDist& d);
double mean(const QuantileDist& d);
double variance(const SparseDist& d);
double variance(const CategoricalDist& d);
double variance(const QuantileDist& d);
double mode(const SparseDist& d);
double mode(const CategoricalDist& d);
double mode(const QuantileDist& d);
double var_at_risk(const SparseDist& d, RiskLevel level);
double var_at_risk(const CategoricalDist& d, RiskLevel level);
double var_at_risk(const QuantileDist& d, RiskLevel level);
double cvar(const SparseDist& d, RiskLevel level);
double cvar(const CategoricalDist& d, RiskLevel level);
double cvar(const QuantileDist& d, RiskLevel level);

// E([X - b]^+), the penalised tail expectation of the dual form.
double expected_excess(std::span<const WeightedPoint> points, double b);
double expected_excess(const CategoricalDist& d, double b);
double expected_excess(const QuantileDist& d, double b);

// Minimises b + E([X-b]^+)/(1-alpha) over the grid; smallest minimiser wins.
// Returns (b*, objective value).
std::pair<double, double> cvar_dual(std::span<const WeightedPoint> points, RiskLevel level,
                                    std::span<const double> grid);
std::pair<double, double> cvar_dual(const SparseDist& d, RiskLevel level,
                                    std::span<const double> grid);

// ---- projections -----------------------------------------------------------

// Two-neighbour linear split onto the categorical grid; out-of-range mass is
// clamped to the boundary atoms. Mass and (in-range) mean preserving.
CategoricalDist project_categorical(std::span<const WeightedPoint> points, const ReprParams& p);
CategoricalDist project_categorical(const SparseDist& d, const ReprParams& p);

// Inverse CDF at midpoint quantiles (2i-1)/(2m). Throws InfiniteMassError if
// p_inf >= 1/(2m): equal-weight atoms cannot carry mass at infinity.
QuantileDist project_quantile(std::span<const WeightedPoint> points, double p_inf,
                              std::uint32_t m);
QuantileDist project_quantile(const SparseDist& d, std::uint32_t m);

// ---- distributional Bellman backup ----------------------------------------

// proj( reward + sum_b prob_b * dist_b ) for branches sharing one grid.
CategoricalDist bellman_backup(std::int64_t reward,
                               std::span<const std::pair<double, const CategoricalDist*>> branches,
                               const ReprParams& p);
QuantileDist bellman_backup(std::int64_t reward,
                            std::span<const std::pair<double, const QuantileDist*>> branches,
                            const ReprParams& p);

// Low-level kernels used by the value-iteration loops; `out` has m entries.
// accumulate: out += weight * (in shifted right by shift_strides atoms, with
// linear splitting and boundary clamping).
void accumulate_shifted_categorical(std::span<double> out, std::span<const double> in,
                                    double weight, double shift_strides);
// Quantile mixture projection: branches are (probability, sorted locations);
// writes the m midpoint-quantile locations of the mixture shifted by
// `reward` into out.
void project_quantile_mixture(std::span<double> out, double reward,
                              std::span<const std::pair<double, std::span<const double>>> branches,
                              std::vector<std::pair<double, double>>& scratch);

// ---- distances -------------------------------------------------------------

// sqrt( stride * sum_i (F_a(theta_i) - F_b(theta_i))^2 ); same grid required.
double cramer_l2(const CategoricalDist& a, const CategoricalDist& b);
double cramer_l2(std::span<const double> a, std::span<const double> b, double stride);

// (1/m) sum_i |a_i - b_i| over the sorted locations; same m required.
double wasserstein_w1(const QuantileDist& a, const QuantileDist& b);
double wasserstein_w1(std::span<const double> a, std::span<const double> b);

// Cramer distance between arbitrary discrete distributions (piecewise CDF
// integral over the merged support); used when comparing approximate results
// against exact forward distributions.
double cramer_l2_general(std::span<const WeightedPoint> a, std::span<const WeightedPoint> b);

} // namespace dmc
