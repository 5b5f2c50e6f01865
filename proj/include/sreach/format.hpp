#pragma once

#include "sreach/model.hpp"
#include "sreach/sexpr.hpp"
#include "sreach/validate.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

namespace sreach {

namespace detail {

class MdpReader {
public:
    FactoredMDP read(const sexpr::Node& root) {
        if (!root.is_form("mdp")) root.fail("expected (mdp ...)");
        const sexpr::Node* vars = nullptr;
        for (std::size_t i = 1; i < root.items.size(); ++i) {
            const auto& item = root.items[i];
            if (!item.is_list || item.head().empty()) item.fail("expected a section form");
            if (item.head() == "variables") {
                if (vars) item.fail("duplicate (variables ...) section");
                vars = &item;
            }
        }
        if (!vars) root.fail("missing (variables ...) section");
        read_variables(*vars);

        bool have_discount = false, have_reward = false, have_init = false;
        for (std::size_t i = 1; i < root.items.size(); ++i) {
            const auto& item = root.items[i];
            auto head = item.head();
            if (head == "variables") continue;
            if (head == "discount") {
                if (have_discount) item.fail("duplicate (discount ...)");
                have_discount = true;
                expect_arity(item, 2);
                mdp_.discount = sexpr::to_real(item.items[1]);
            } else if (head == "action") {
                read_action(item);
            } else if (head == "reward") {
                if (have_reward) item.fail("duplicate (reward ...)");
                have_reward = true;
                expect_arity(item, 2);
                mdp_.reward = read_reward_tree(item.items[1]);
            } else if (head == "init") {
                if (have_init) item.fail("duplicate (init ...)");
                have_init = true;
                mdp_.init = read_init(item);
            } else {
                item.fail("unknown section '" + std::string(head) + "'");
            }
        }
        if (!have_discount) root.fail("missing (discount ...)");
        if (!have_reward) root.fail("missing (reward ...)");
        return std::move(mdp_);
    }

private:
    static void expect_arity(const sexpr::Node& n, std::size_t k) {
        if (n.items.size() != k) n.fail("(" + std::string(n.head()) + " ...) expects " + std::to_string(k - 1) + " argument(s)");
    }

    static const std::string& name_of(const sexpr::Node& n) {
        if (!n.is_atom()) n.fail("expected an identifier");
        return n.atom;
    }

    void read_variables(const sexpr::Node& form) {
        for (std::size_t i = 1; i < form.items.size(); ++i) {
            const auto& decl = form.items[i];
            if (!decl.is_list || decl.items.size() != 2 || !decl.items[0].is_atom() || !decl.items[1].is_form("vals"))
                decl.fail("expected (NAME (vals v ...))");
            Variable v;
            v.name = decl.items[0].atom;
            if (mdp_.find_variable(v.name)) decl.fail("duplicate variable '" + v.name + "'");
            const auto& vals = decl.items[1];
            for (std::size_t j = 1; j < vals.items.size(); ++j) {
                const auto& val = name_of(vals.items[j]);
                if (v.find_value(val)) vals.items[j].fail("duplicate value '" + val + "'");
                v.values.push_back(val);
            }
            mdp_.variables.push_back(std::move(v));
        }
    }

    VarId resolve_var(const sexpr::Node& n) const {
        const auto& name = name_of(n);
        auto v = mdp_.find_variable(name);
        if (!v) n.fail("undeclared variable '" + name + "'");
        return *v;
    }

    ValueId resolve_value(VarId var, const sexpr::Node& n) const {
        const auto& name = name_of(n);
        auto v = mdp_.variables[var].find_value(name);
        if (!v) n.fail("'" + name + "' is not a value of " + mdp_.variables[var].name);
        return *v;
    }

    Literal read_literal(const sexpr::Node& n) const {
        if (!n.is_list || n.items.size() != 2) n.fail("expected (VAR value)");
        VarId var = resolve_var(n.items[0]);
        return {var, resolve_value(var, n.items[1])};
    }

    template <class Leaf, class LeafReader>
    DecisionTree<Leaf> read_tree(const sexpr::Node& n, LeafReader&& leaf_reader, bool allow_post) {
        if (!n.is_form("split")) return DecisionTree<Leaf>::make_leaf(leaf_reader(n));
        if (n.items.size() < 3) n.fail("split needs a variable and at least one case");
        DecisionTree<Leaf> t;
        const auto& ref = n.items[1];
        if (ref.is_form("post")) {
            if (!allow_post) ref.fail("post-action tests are only allowed in action CPTs");
            expect_arity(ref, 2);
            t.var = resolve_var(ref.items[1]);
            t.post = true;
        } else {
            t.var = resolve_var(ref);
        }
        std::vector<std::pair<ValueId, DecisionTree<Leaf>>> cases;
        for (std::size_t i = 2; i < n.items.size(); ++i) {
            const auto& c = n.items[i];
            if (!c.is_form("case") || c.items.size() != 3) c.fail("expected (case VALUE TREE)");
            ValueId v = resolve_value(t.var, c.items[1]);
            for (const auto& [seen, _] : cases)
                if (seen == v) c.fail("duplicate case '" + c.items[1].atom + "'");
            cases.emplace_back(v, read_tree<Leaf>(c.items[2], leaf_reader, allow_post));
        }
        std::sort(cases.begin(), cases.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [v, sub] : cases) {
            t.cases.push_back(v);
            t.children.push_back(std::move(sub));
        }
        return t;
    }

    CptTree read_cpt(VarId target, const sexpr::Node& n) {
        auto leaf = [&](const sexpr::Node& d) {
            if (!d.is_form("dist") || d.items.size() < 2) d.fail("expected (dist (VALUE PROB) ...) or (split ...)");
            Distribution dist;
            dist.prob.assign(mdp_.variables[target].domain_size(), 0.0);
            std::vector<bool> seen(dist.prob.size(), false);
            for (std::size_t i = 1; i < d.items.size(); ++i) {
                const auto& e = d.items[i];
                if (!e.is_list || e.items.size() != 2) e.fail("expected (VALUE PROB)");
                ValueId v = resolve_value(target, e.items[0]);
                if (seen[v]) e.fail("duplicate value in dist");
                seen[v] = true;
                dist.prob[v] = sexpr::to_real(e.items[1]);
            }
            return dist;
        };
        return read_tree<Distribution>(n, leaf, true);
    }

    RewardTree read_reward_tree(const sexpr::Node& n) {
        auto leaf = [&](const sexpr::Node& d) {
            if (!d.is_form("val") || d.items.size() != 2) d.fail("expected (val REAL) or (split ...)");
            return sexpr::to_real(d.items[1]);
        };
        return read_tree<double>(n, leaf, false);
    }

    void read_action(const sexpr::Node& form) {
        if (form.items.size() < 2) form.fail("action needs a name");
        ActionSpec a;
        a.name = name_of(form.items[1]);
        if (mdp_.find_action(a.name)) form.items[1].fail("duplicate action '" + a.name + "'");
        for (std::size_t i = 2; i < form.items.size(); ++i) {
            const auto& e = form.items[i];
            if (!e.is_form("effect") || e.items.size() != 3) e.fail("expected (effect VAR TREE)");
            VarId var = resolve_var(e.items[1]);
            if (a.effects.count(var)) e.fail("duplicate effect on " + mdp_.variables[var].name);
            a.effects.emplace(var, read_cpt(var, e.items[2]));
        }
        mdp_.actions.push_back(std::move(a));
    }

    InitialCondition read_init(const sexpr::Node& form) {
        bool multi = form.items.size() >= 2 && form.items[1].is_form("values");
        if (!multi) {
            std::vector<ValueId> values(mdp_.variables.size(), 0);
            std::vector<bool> seen(values.size(), false);
            for (std::size_t i = 1; i < form.items.size(); ++i) {
                Literal l = read_literal(form.items[i]);
                if (seen[l.var]) form.items[i].fail("variable assigned twice in init");
                seen[l.var] = true;
                values[l.var] = l.value;
            }
            for (std::size_t v = 0; v < seen.size(); ++v)
                if (!seen[v]) form.fail("init does not assign " + mdp_.variables[v].name);
            return State(std::move(values));
        }
        MultiStateInit m;
        for (std::size_t i = 1; i < form.items.size(); ++i) {
            const auto& part = form.items[i];
            if (part.is_form("values")) {
                for (std::size_t j = 1; j < part.items.size(); ++j) m.values.push_back(read_literal(part.items[j]));
            } else if (part.is_form("excl")) {
                for (std::size_t j = 1; j < part.items.size(); ++j) {
                    const auto& set = part.items[j];
                    if (!set.is_list) set.fail("expected a list of literals");
                    LiteralSet ex;
                    for (const auto& l : set.items) ex.push_back(read_literal(l));
                    std::sort(ex.begin(), ex.end());
                    m.exclusions.push_back(std::move(ex));
                }
            } else {
                part.fail("expected (values ...) or (excl ...)");
            }
        }
        std::sort(m.values.begin(), m.values.end());
        m.values.erase(std::unique(m.values.begin(), m.values.end()), m.values.end());
        std::sort(m.exclusions.begin(), m.exclusions.end());
        m.exclusions.erase(std::unique(m.exclusions.begin(), m.exclusions.end()), m.exclusions.end());
        return m;
    }

    FactoredMDP mdp_;
};

class MdpWriter {
public:
    explicit MdpWriter(const FactoredMDP& mdp) : mdp_(mdp) {}

    std::string write() {
        os_ << "(mdp\n";
        os_ << "  (discount " << sexpr::format_real(mdp_.discount) << ")\n";
        os_ << "  (variables";
        for (const auto& v : mdp_.variables) {
            os_ << "\n    (" << v.name << " (vals";
            for (const auto& val : v.values) os_ << ' ' << val;
            os_ << "))";
        }
        os_ << ")";
        for (const auto& a : mdp_.actions) {
            os_ << "\n  (action " << a.name;
            for (const auto& [var, cpt] : a.effects) {
                os_ << "\n    (effect " << mdp_.variables[var].name << "\n      ";
                write_tree(cpt, 6, [&](const Distribution& d) {
                    std::string s = "(dist";
                    for (std::size_t i = 0; i < d.prob.size(); ++i)
                        if (d.prob[i] != 0.0)
                            s += " (" + mdp_.variables[var].values[i] + " " + sexpr::format_real(d.prob[i]) + ")";
                    return s + ")";
                });
                os_ << ")";
            }
            os_ << ")";
        }
        os_ << "\n  (reward ";
        write_tree(mdp_.reward, 4, [](double r) { return "(val " + sexpr::format_real(r) + ")"; });
        os_ << ")";
        if (mdp_.init) write_init(*mdp_.init);
        os_ << ")\n";
        return os_.str();
    }

private:
    template <class Leaf, class LeafWriter>
    void write_tree(const DecisionTree<Leaf>& t, int indent, LeafWriter&& leaf) {
        if (t.is_leaf()) {
            os_ << leaf(t.leaf);
            return;
        }
        const auto& var = mdp_.variables[t.var];
        os_ << "(split " << (t.post ? "(post " + var.name + ")" : var.name);
        for (std::size_t i = 0; i < t.children.size(); ++i) {
            os_ << '\n' << std::string(indent + 2, ' ') << "(case " << var.values[t.cases[i]] << ' ';
            write_tree(t.children[i], indent + 4, leaf);
            os_ << ')';
        }
        os_ << ')';
    }

    void write_literal(const Literal& l) {
        os_ << '(' << mdp_.variables[l.var].name << ' ' << mdp_.variables[l.var].values[l.value] << ')';
    }

    void write_init(const InitialCondition& init) {
        os_ << "\n  (init";
        if (const auto* s = std::get_if<State>(&init)) {
            for (std::size_t i = 0; i < s->size(); ++i) {
                os_ << ' ';
                write_literal({static_cast<VarId>(i), (*s)[i]});
            }
            os_ << ')';
            return;
        }
        const auto& m = std::get<MultiStateInit>(init);
        os_ << "\n    (values";
        for (const auto& l : m.values) {
            os_ << ' ';
            write_literal(l);
        }
        os_ << ")\n    (excl";
        for (const auto& ex : m.exclusions) {
            os_ << " (";
            for (std::size_t i = 0; i < ex.size(); ++i) {
                if (i) os_ << ' ';
                write_literal(ex[i]);
            }
            os_ << ')';
        }
        os_ << "))";
    }

    const FactoredMDP& mdp_;
    std::ostringstream os_;
};

} // namespace detail

/// Parses FMDP text without semantic validation. Throws ParseError.
inline FactoredMDP parse_mdp_unchecked(std::string_view text) {
    return detail::MdpReader().read(sexpr::read_one(text));
}

/// Parses and validates FMDP text. Throws ParseError or ValidationError.
inline FactoredMDP parse_mdp(std::string_view text) {
    auto mdp = parse_mdp_unchecked(text);
    require_valid(mdp);
    return mdp;
}

/// Canonical FMDP text: declaration order for variables and actions, domain
/// order for cases and distribution entries.
inline std::string serialize_mdp(const FactoredMDP& mdp) { return detail::MdpWriter(mdp).write(); }

} // namespace sreach
