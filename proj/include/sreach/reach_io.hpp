#pragma once

#include "sreach/reach.hpp"
#include "sreach/sexpr.hpp"

#include <algorithm>
#include <string>
#include <string_view>

namespace sreach {

inline std::string literal_sexpr(const FactoredMDP& mdp, const Literal& l) {
    return "(" + mdp.variables[l.var].name + " " + mdp.variables[l.var].values[l.value] + ")";
}

/// Canonical reachable-set text.
inline std::string serialize_reachable(const FactoredMDP& mdp, const ReachableSet& rs) {
    std::string out = "(reachable (k " + std::to_string(rs.k) + ") (iterations " + std::to_string(rs.iterations) + ")\n  (values";
    for (const auto& l : rs.values) out += " " + literal_sexpr(mdp, l);
    out += ")\n  (excl";
    for (const auto& ex : rs.excl) {
        out += "\n    (";
        for (std::size_t i = 0; i < ex.size(); ++i) out += (i ? " " : "") + literal_sexpr(mdp, ex[i]);
        out += ")";
    }
    return out + "))\n";
}

/// Reads a reachable-set file against `mdp`. Syntax problems raise ParseError;
/// literals unknown to the model or ill-formed constraints raise ValidationError.
inline ReachableSet parse_reachable(const FactoredMDP& mdp, std::string_view text) {
    auto root = sexpr::read_one(text);
    if (!root.is_form("reachable")) root.fail("expected (reachable ...)");
    auto literal = [&](const sexpr::Node& n) {
        if (!n.is_list || n.items.size() != 2 || !n.items[0].is_atom() || !n.items[1].is_atom())
            n.fail("expected (VAR value)");
        auto var = mdp.find_variable(n.items[0].atom);
        if (!var) throw ValidationError("reachable set mentions unknown variable '" + n.items[0].atom + "'");
        auto val = mdp.variables[*var].find_value(n.items[1].atom);
        if (!val)
            throw ValidationError("reachable set mentions unknown value '" + n.items[1].atom + "' of " + n.items[0].atom);
        return Literal{*var, *val};
    };
    ReachableSet rs;
    bool have_k = false;
    for (std::size_t i = 1; i < root.items.size(); ++i) {
        const auto& part = root.items[i];
        auto head = part.head();
        if (head == "k" && part.items.size() == 2) {
            rs.k = static_cast<int>(sexpr::to_integer(part.items[1]));
            have_k = true;
        } else if (head == "iterations" && part.items.size() == 2) {
            rs.iterations = static_cast<int>(sexpr::to_integer(part.items[1]));
        } else if (head == "values") {
            for (std::size_t j = 1; j < part.items.size(); ++j) rs.values.push_back(literal(part.items[j]));
        } else if (head == "excl") {
            for (std::size_t j = 1; j < part.items.size(); ++j) {
                const auto& set = part.items[j];
                if (!set.is_list) set.fail("expected a list of literals");
                LiteralSet ex;
                for (const auto& l : set.items) ex.push_back(literal(l));
                std::sort(ex.begin(), ex.end());
                rs.excl.push_back(std::move(ex));
            }
        } else {
            part.fail("unexpected form in reachable set");
        }
    }
    if (!have_k) root.fail("missing (k ...)");
    std::sort(rs.values.begin(), rs.values.end());
    rs.values.erase(std::unique(rs.values.begin(), rs.values.end()), rs.values.end());
    std::sort(rs.excl.begin(), rs.excl.end());
    rs.excl.erase(std::unique(rs.excl.begin(), rs.excl.end()), rs.excl.end());
    for (const auto& ex : rs.excl) {
        if (ex.size() < 2) throw ValidationError("exclusion constraints need at least two literals");
        for (std::size_t i = 0; i < ex.size(); ++i) {
            if (i && ex[i].var == ex[i - 1].var)
                throw ValidationError("exclusion constraint repeats variable " + mdp.variables[ex[i].var].name);
            if (!std::binary_search(rs.values.begin(), rs.values.end(), ex[i]))
                throw ValidationError("exclusion constraint uses unreachable literal " + literal_name(mdp, ex[i]));
        }
    }
    return rs;
}

} // namespace sreach
