#include "dmc/query.hpp"

#include <cctype>

namespace dmc {

namespace {

struct Cursor {
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
    bool eat_word(const std::string& w) {
        skip_ws();
        if (text.compare(pos, w.size(), w) == 0) {
            pos += w.size();
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw ParseError("query: " + msg, static_cast<long>(pos) + 1);
    }
};

} // namespace

Query parse_query(const std::string& text) {
    Cursor c{text};
    if (!c.eat('R')) c.fail("expected 'R'");
    if (!c.eat('{')) c.fail("expected '{'");

    Query q;
    c.skip_ws();
    std::size_t start = c.pos;
    while (c.pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[c.pos])) ||
                                   text[c.pos] == '.'))
        ++c.pos;
    const std::string f = text.substr(start, c.pos - start);
    bool needs_alpha = false;
    if (f == "E")
        q.stat.kind = StatQuery::E;
    else if (f == "Var")
        q.stat.kind = StatQuery::Var;
    else if (f == "sd" || f == "s.d.")
        q.stat.kind = StatQuery::Sd;
    else if (f == "mode")
        q.stat.kind = StatQuery::Mode;
    else if (f == "VaR") {
        q.stat.kind = StatQuery::VaR;
        needs_alpha = true;
    } else if (f == "CVaR") {
        q.stat.kind = StatQuery::CVaR;
        needs_alpha = true;
    } else {
        c.fail("unknown statistic '" + f + "'");
    }

    if (c.eat('@')) {
        if (!needs_alpha) c.fail("only VaR and CVaR take a risk level");
        c.skip_ws();
        std::size_t used = 0;
        try {
            q.stat.alpha = std::stod(text.substr(c.pos), &used);
        } catch (const std::exception&) {
            c.fail("expected a risk level after '@'");
        }
        c.pos += used;
        if (!(q.stat.alpha > 0.0 && q.stat.alpha < 1.0)) c.fail("risk level must lie in (0,1)");
    } else if (needs_alpha) {
        c.fail(f + " needs '@alpha'");
    }

    if (!c.eat(',')) c.fail("expected ',' before the reward name");
    c.skip_ws();
    start = c.pos;
    while (c.pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[c.pos])) ||
                                   text[c.pos] == '_'))
        ++c.pos;
    q.reward_name = text.substr(start, c.pos - start);
    if (q.reward_name.empty()) c.fail("expected a reward name");
    if (!c.eat('}')) c.fail("expected '}'");

    if (c.eat_word("min")) {
        q.minimize = true;
        if (q.stat.kind != StatQuery::E && q.stat.kind != StatQuery::CVaR)
            throw UnsupportedError("UnsupportedObjective: optimisation supports E and CVaR only");
    } else if (c.eat_word("max")) {
        throw UnsupportedError("UnsupportedObjective: maximisation is not supported");
    }
    if (!c.eat_word("=?")) c.fail("expected '=?'");
    if (!c.eat('[')) c.fail("expected '[ formula ]'");

    const auto open = c.pos;
    auto close = text.rfind(']');
    if (close == std::string::npos || close < open) c.fail("expected closing ']'");
    q.formula_text = text.substr(open, close - open);
    q.formula = parse_cosafe(q.formula_text);
    c.pos = close + 1;
    c.skip_ws();
    if (c.pos != text.size()) c.fail("trailing input");

    // normalized text form
    q.formula_text = dmc::to_string(q.formula);
    return q;
}

std::string to_string(const Query& query) {
    static const char* names[] = {"E", "Var", "sd", "mode", "VaR", "CVaR"};
    std::string out = "R{";
    out += names[query.stat.kind];
    if (query.stat.kind == StatQuery::VaR || query.stat.kind == StatQuery::CVaR) {
        std::string a = std::to_string(query.stat.alpha);
        while (a.size() > 3 && a.back() == '0') a.pop_back();
        out += "@" + a;
    }
    out += "," + query.reward_name + "}";
    if (query.minimize) out += "min";
    out += "=? [ " + query.formula_text + " ]";
    return out;
}

} // namespace dmc
