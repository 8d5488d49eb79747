#pragma once

#include <string>

#include <json.hpp>

#include "dmc/benchmark_models.hpp"
#include "dmc/dvi.hpp"
#include "dmc/explicit_format.hpp"
#include "dmc/query.hpp"

namespace dmc {

// Error wrapper carrying the pipeline stage and the CLI exit code.
struct StagedError : Error {
    StagedError(std::string stage_, int exit_code_, const std::string& msg)
        : Error(stage_ + ": " + msg), stage(std::move(stage_)), exit_code(exit_code_) {}
    std::string stage;
    int exit_code;
};

int exit_code_for(const Error& e);

struct RunConfig {
    ReprParams repr{ReprKind::categorical, 201, 0.0, 1.0};
    double forward_eps = 1e-5;
    double dvi_epsilon = 0.01;
    std::uint32_t budget_atoms = 101;
    std::uint64_t forward_max_iters = 10'000'000;
    std::uint32_t dvi_max_iters = 5000;
    std::uint32_t threads = 0;
    bool evaluate = false;       // optimise: also run precise policy evaluation
    std::string emit_dist;       // distribution output path ('' = off)
    std::string emit_policy;     // policy output path ('' = off)
};

// Result documents follow schema 1: everything except "timings" is a pure
// function of the inputs and the configuration.
nlohmann::json run_check(const DtmcModel& model, const Query& query, const RunConfig& cfg);
nlohmann::json run_optimize(const MdpModel& model, const Query& query, const RunConfig& cfg);

// Policy files: "state action-label" lines, or "state budget-atom
// action-label" for budget-augmented policies, with a self-describing header.
struct StoredPolicy {
    Policy policy;
    bool slack = false;
    SlackGrid grid;
    StateId initial = 0;
};

void write_policy_file(const std::string& path, const Policy& policy, const Mdp& mdp,
                       const StateSet& target, StateId initial);
void write_policy_file(const std::string& path, const Policy& policy, const SlackProduct& product);
StoredPolicy read_policy_file(const std::string& path, const Mdp& mdp);

// Evaluates a stored policy against further distributional queries: the
// induced DTMC is the model, so each query may use a different formula.
nlohmann::json run_evaluate(const MdpModel& model, const Query& optimized_for,
                            const StoredPolicy& stored, const std::vector<Query>& queries,
                            const RunConfig& cfg);

const char* stat_name(StatQuery::Kind kind);

} // namespace dmc
