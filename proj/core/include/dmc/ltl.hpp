#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dmc/errors.hpp"

namespace dmc {

// Syntactically co-safe LTL: negation on atoms only; X, U and the F sugar
// are the only temporal operators.
enum class FormulaKind { tt, ff, atom, not_atom, conj, disj, next, until, eventually };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
    FormulaKind kind;
    std::string atom;              // atom / not_atom
    std::vector<FormulaPtr> args;  // conj/disj: n-ary flattened; next/eventually: 1; until: 2
    std::string repr;              // canonical form, used for state identity
};

// Canonicalising constructors: conjunction/disjunction flatten, sort, drop
// duplicates and absorb true/false.
FormulaPtr make_true();
FormulaPtr make_false();
FormulaPtr make_atom(const std::string& name);
FormulaPtr make_not_atom(const std::string& name);
FormulaPtr make_and(std::vector<FormulaPtr> args);
FormulaPtr make_or(std::vector<FormulaPtr> args);
FormulaPtr make_next(FormulaPtr arg);
FormulaPtr make_until(FormulaPtr lhs, FormulaPtr rhs);
FormulaPtr make_eventually(FormulaPtr arg);

struct CosafeFormula {
    FormulaPtr root;
    std::vector<std::string> atoms;  // first-occurrence order
};

// Concrete syntax: atoms [a-zA-Z_][a-zA-Z0-9_]*, operators ! & | X U F,
// parentheses; unary operators bind tightest, U is right-associative and
// binds tighter than &, & tighter than |.
CosafeFormula parse_cosafe(const std::string& text);

std::string to_string(const CosafeFormula& formula);

// One-letter progression: the residual obligation after reading a valuation
// (bitmask over `atoms` in CosafeFormula order).
FormulaPtr progress(const FormulaPtr& f, std::uint32_t valuation,
                    const std::vector<std::string>& atoms);

// Deterministic finite automaton over the valuations of the formula's atoms.
// Accepting states are absorbing; acceptance = the residual obligation has
// resolved to true, i.e. every continuation of the word read so far models
// the formula.
struct Dfa {
    std::vector<std::string> atoms;
    std::uint32_t num_states = 0;
    std::uint32_t initial = 0;
    std::vector<std::vector<std::uint32_t>> transitions;  // [state][valuation]
    std::vector<bool> accepting;

    std::uint32_t num_valuations() const { return 1u << atoms.size(); }
    std::uint32_t step(std::uint32_t state, std::uint32_t valuation) const {
        return transitions[state][valuation];
    }
    bool accepts_word(const std::vector<std::uint32_t>& word) const;
};

inline constexpr std::uint32_t kMaxDfaStates = 1'000'000;

Dfa to_dfa(const CosafeFormula& formula);

} // namespace dmc
