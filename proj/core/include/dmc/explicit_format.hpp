#pragma once

#include <map>
#include <string>
#include <variant>

#include "dmc/distribution.hpp"
#include "dmc/model.hpp"

namespace dmc {

// Explicit-state text formats. All decimal, UTF-8, '#' starts a comment line.
//
//   .tra   "STATES n" header, then "src dst prob" (DTMC) or
//          "src action dst prob" (MDP). Consecutive lines with the same
//          (src, action) extend that action's distribution; action order is
//          first-appearance order.
//   .lab   "state: label1 label2 ...". The reserved label "init" marks the
//          initial state (state 0 if absent).
//   .rew   "src reward" (DTMC) or "src action reward" (MDP); missing
//          entries are zero.

struct ModelFiles {
    std::string transitions;
    std::string labels;
    std::vector<std::pair<std::string, std::string>> rewards;  // (name, path)
};

enum class ModelKind { dtmc, mdp, infer };

struct DtmcModel {
    Dtmc dtmc;
    std::map<std::string, StateRewards> rewards;
    bool operator==(const DtmcModel&) const = default;
};

struct MdpModel {
    Mdp mdp;
    std::map<std::string, ActionRewards> rewards;
    bool operator==(const MdpModel&) const = default;
};

using ParsedModel = std::variant<DtmcModel, MdpModel>;

// Throws ParseError (with line number) on malformed input and
// ValidationError if the parsed model breaks a model invariant.
// `renormalize` fixes row sums off by more than the tolerance but within
// 1e-6, and is off by default: silent fixes hide modelling bugs.
ParsedModel parse_model(const ModelFiles& files, ModelKind kind = ModelKind::infer,
                        bool renormalize = false);

// Writers emit <prefix>.tra, <prefix>.lab and <prefix>.<name>.rew.
void write_model(const DtmcModel& model, const std::string& prefix);
void write_model(const MdpModel& model, const std::string& prefix);
ModelFiles model_files_for_prefix(const std::string& prefix,
                                  const std::vector<std::string>& reward_names);

enum class DistFormat { csv, json };

void write_distribution(std::span<const WeightedPoint> points, double p_inf,
                        const std::string& path, DistFormat format);
void write_distribution(const SparseDist& d, const std::string& path, DistFormat format);
void write_distribution(const CategoricalDist& d, const std::string& path, DistFormat format);
void write_distribution(const QuantileDist& d, const std::string& path, DistFormat format);

// Reads either format back into a (points, p_inf) pair.
std::pair<std::vector<WeightedPoint>, double> read_distribution(const std::string& path,
                                                                DistFormat format);

} // namespace dmc
