#pragma once

#include <string>

#include "dmc/dvi.hpp"
#include "dmc/ltl.hpp"

namespace dmc {

// Concrete query syntax:
//   R{f[@alpha],reward}=? [ formula ]        evaluation on a DTMC / policy
//   R{f[@alpha],reward}min=? [ formula ]     optimisation on an MDP
// with f one of E, Var, sd, mode, VaR, CVaR; alpha is required exactly for
// VaR and CVaR. Minimisation supports f in {E, CVaR}.
struct Query {
    StatQuery stat;
    std::string reward_name;
    bool minimize = false;
    std::string formula_text;
    CosafeFormula formula;
};

Query parse_query(const std::string& text);
std::string to_string(const Query& query);

} // namespace dmc
