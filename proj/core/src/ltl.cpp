#include "dmc/ltl.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <unordered_map>

namespace dmc {

namespace {

FormulaPtr node(FormulaKind kind, std::string atom, std::vector<FormulaPtr> args,
                std::string repr) {
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->atom = std::move(atom);
    f->args = std::move(args);
    f->repr = std::move(repr);
    return f;
}

const FormulaPtr& true_node() {
    static const FormulaPtr f = node(FormulaKind::tt, "", {}, "true");
    return f;
}

const FormulaPtr& false_node() {
    static const FormulaPtr f = node(FormulaKind::ff, "", {}, "false");
    return f;
}

// n-ary true/false-absorbing, flattening, sorting, deduplicating builder.
// Deliberately no complement rule (a | !a stays unresolved): state identity
// then matches the three-valued residual semantics exactly.
FormulaPtr make_nary(FormulaKind kind, std::vector<FormulaPtr> args) {
    const bool is_and = kind == FormulaKind::conj;
    std::vector<FormulaPtr> flat;
    for (auto& a : args) {
        if (a->kind == kind) {
            for (const auto& sub : a->args) flat.push_back(sub);
        } else if (a->kind == (is_and ? FormulaKind::tt : FormulaKind::ff)) {
            continue;  // identity element
        } else if (a->kind == (is_and ? FormulaKind::ff : FormulaKind::tt)) {
            return is_and ? false_node() : true_node();
        } else {
            flat.push_back(std::move(a));
        }
    }
    std::sort(flat.begin(), flat.end(),
              [](const FormulaPtr& a, const FormulaPtr& b) { return a->repr < b->repr; });
    flat.erase(std::unique(flat.begin(), flat.end(),
                           [](const FormulaPtr& a, const FormulaPtr& b) {
                               return a->repr == b->repr;
                           }),
               flat.end());
    if (flat.empty()) return is_and ? true_node() : false_node();
    if (flat.size() == 1) return flat[0];
    std::string repr = is_and ? "(&" : "(|";
    for (const auto& a : flat) {
        repr += ' ';
        repr += a->repr;
    }
    repr += ')';
    return node(kind, "", std::move(flat), std::move(repr));
}

} // namespace

FormulaPtr make_true() { return true_node(); }
FormulaPtr make_false() { return false_node(); }

FormulaPtr make_atom(const std::string& name) {
    return node(FormulaKind::atom, name, {}, name);
}

FormulaPtr make_not_atom(const std::string& name) {
    return node(FormulaKind::not_atom, name, {}, "!" + name);
}

FormulaPtr make_and(std::vector<FormulaPtr> args) {
    return make_nary(FormulaKind::conj, std::move(args));
}

FormulaPtr make_or(std::vector<FormulaPtr> args) {
    return make_nary(FormulaKind::disj, std::move(args));
}

FormulaPtr make_next(FormulaPtr arg) {
    if (arg->kind == FormulaKind::tt) return true_node();
    if (arg->kind == FormulaKind::ff) return false_node();
    std::string repr = "(X " + arg->repr + ')';
    return node(FormulaKind::next, "", {std::move(arg)}, std::move(repr));
}

FormulaPtr make_until(FormulaPtr lhs, FormulaPtr rhs) {
    if (rhs->kind == FormulaKind::tt) return true_node();
    if (rhs->kind == FormulaKind::ff) return false_node();
    if (lhs->kind == FormulaKind::ff) return rhs;
    if (lhs->kind == FormulaKind::tt) return make_eventually(std::move(rhs));
    std::string repr = "(U " + lhs->repr + ' ' + rhs->repr + ')';
    return node(FormulaKind::until, "", {std::move(lhs), std::move(rhs)}, std::move(repr));
}

FormulaPtr make_eventually(FormulaPtr arg) {
    if (arg->kind == FormulaKind::tt) return true_node();
    if (arg->kind == FormulaKind::ff) return false_node();
    std::string repr = "(F " + arg->repr + ')';
    return node(FormulaKind::eventually, "", {std::move(arg)}, std::move(repr));
}

// ---- parser ----------------------------------------------------------------

namespace {

struct Parser {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError("formula: " + msg, static_cast<long>(pos) + 1);
    }

    std::string ident() {
        skip_ws();
        std::size_t start = pos;
        if (pos < text.size() &&
            (std::isalpha(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) {
            ++pos;
            while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) ||
                                         text[pos] == '_'))
                ++pos;
        }
        return text.substr(start, pos - start);
    }

    std::string peek_ident() {
        auto save = pos;
        auto id = ident();
        pos = save;
        return id;
    }

    FormulaPtr parse_or() {
        auto lhs = parse_and();
        while (eat('|')) lhs = make_or({lhs, parse_and()});
        return lhs;
    }

    FormulaPtr parse_and() {
        auto lhs = parse_until();
        while (eat('&')) lhs = make_and({lhs, parse_until()});
        return lhs;
    }

    FormulaPtr parse_until() {
        auto lhs = parse_unary();
        skip_ws();
        if (peek_ident() == "U") {
            ident();
            return make_until(std::move(lhs), parse_until());  // right-associative
        }
        return lhs;
    }

    FormulaPtr parse_unary() {
        skip_ws();
        if (pos >= text.size()) fail("unexpected end of formula");
        if (eat('!')) {
            auto arg = parse_unary();
            if (arg->kind == FormulaKind::atom) return make_not_atom(arg->atom);
            if (arg->kind == FormulaKind::not_atom) return make_atom(arg->atom);
            if (arg->kind == FormulaKind::tt) return make_false();
            if (arg->kind == FormulaKind::ff) return make_true();
            throw NotCosafeError("negation over a temporal or composite subformula: !" +
                                 arg->repr);
        }
        if (eat('(')) {
            auto inner = parse_or();
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        auto id = ident();
        if (id.empty()) fail("expected an atom, operator or '('");
        if (id == "X") return make_next(parse_unary());
        if (id == "F") return make_eventually(parse_unary());
        if (id == "true") return make_true();
        if (id == "false") return make_false();
        if (id == "G" || id == "R" || id == "W" || id == "M")
            throw NotCosafeError("operator " + id + " is not in the co-safe fragment");
        if (id == "U") fail("'U' needs a left operand");
        return make_atom(id);
    }
};

void collect_atoms(const FormulaPtr& f, std::vector<std::string>& atoms) {
    if (f->kind == FormulaKind::atom || f->kind == FormulaKind::not_atom) {
        if (std::find(atoms.begin(), atoms.end(), f->atom) == atoms.end())
            atoms.push_back(f->atom);
    }
    for (const auto& a : f->args) collect_atoms(a, atoms);
}

std::string print(const FormulaPtr& f) {
    switch (f->kind) {
        case FormulaKind::tt: return "true";
        case FormulaKind::ff: return "false";
        case FormulaKind::atom: return f->atom;
        case FormulaKind::not_atom: return "!" + f->atom;
        case FormulaKind::next: return "X (" + print(f->args[0]) + ")";
        case FormulaKind::eventually: return "F (" + print(f->args[0]) + ")";
        case FormulaKind::until:
            return "(" + print(f->args[0]) + ") U (" + print(f->args[1]) + ")";
        case FormulaKind::conj:
        case FormulaKind::disj: {
            std::string sep = f->kind == FormulaKind::conj ? " & " : " | ";
            std::string out;
            for (const auto& a : f->args) {
                if (!out.empty()) out += sep;
                out += "(" + print(a) + ")";
            }
            return out;
        }
    }
    return "?";
}

} // namespace

CosafeFormula parse_cosafe(const std::string& text) {
    Parser parser{text};
    auto root = parser.parse_or();
    parser.skip_ws();
    if (parser.pos != text.size()) parser.fail("trailing input");
    CosafeFormula out{std::move(root), {}};
    collect_atoms(out.root, out.atoms);
    return out;
}

std::string to_string(const CosafeFormula& formula) { return print(formula.root); }

FormulaPtr progress(const FormulaPtr& f, std::uint32_t valuation,
                    const std::vector<std::string>& atoms) {
    auto atom_holds = [&](const std::string& name) {
        for (std::size_t i = 0; i < atoms.size(); ++i)
            if (atoms[i] == name) return (valuation >> i) & 1u;
        return 0u;
    };
    switch (f->kind) {
        case FormulaKind::tt:
        case FormulaKind::ff: return f;
        case FormulaKind::atom: return atom_holds(f->atom) ? make_true() : make_false();
        case FormulaKind::not_atom: return atom_holds(f->atom) ? make_false() : make_true();
        case FormulaKind::next: return f->args[0];
        case FormulaKind::conj:
        case FormulaKind::disj: {
            std::vector<FormulaPtr> args;
            args.reserve(f->args.size());
            for (const auto& a : f->args) args.push_back(progress(a, valuation, atoms));
            return f->kind == FormulaKind::conj ? make_and(std::move(args))
                                                : make_or(std::move(args));
        }
        case FormulaKind::until: {
            // phi U psi  =  psi | (phi & X(phi U psi))
            auto now = progress(f->args[1], valuation, atoms);
            auto keep = make_and({progress(f->args[0], valuation, atoms), f});
            return make_or({std::move(now), std::move(keep)});
        }
        case FormulaKind::eventually: {
            auto now = progress(f->args[0], valuation, atoms);
            return make_or({std::move(now), f});
        }
    }
    return make_false();
}

bool Dfa::accepts_word(const std::vector<std::uint32_t>& word) const {
    std::uint32_t q = initial;
    for (auto v : word) q = step(q, v);
    return accepting[q];
}

Dfa to_dfa(const CosafeFormula& formula) {
    if (formula.atoms.size() > 20) throw StateBlowupError("too many distinct atoms");
    Dfa dfa;
    dfa.atoms = formula.atoms;
    const std::uint32_t letters = dfa.num_valuations();

    std::unordered_map<std::string, std::uint32_t> ids;
    std::vector<FormulaPtr> states;
    auto intern = [&](const FormulaPtr& f) {
        auto [it, inserted] = ids.emplace(f->repr, static_cast<std::uint32_t>(states.size()));
        if (inserted) {
            states.push_back(f);
            if (states.size() > kMaxDfaStates)
                throw StateBlowupError("DFA exceeds " + std::to_string(kMaxDfaStates) +
                                       " states");
        }
        return it->second;
    };

    dfa.initial = intern(formula.root);
    for (std::uint32_t q = 0; q < states.size(); ++q) {
        dfa.transitions.emplace_back(letters);
        for (std::uint32_t v = 0; v < letters; ++v)
            dfa.transitions[q][v] = intern(progress(states[q], v, dfa.atoms));
    }
    dfa.num_states = static_cast<std::uint32_t>(states.size());
    dfa.accepting.resize(dfa.num_states);
    for (std::uint32_t q = 0; q < dfa.num_states; ++q)
        dfa.accepting[q] = states[q]->kind == FormulaKind::tt;
    return dfa;
}

} // namespace dmc
