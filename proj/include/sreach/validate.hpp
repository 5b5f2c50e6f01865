#pragma once

#include "sreach/model.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace sreach {

struct ValidationIssue {
    std::string code;     // machine-readable, e.g. PATH_REPEAT
    std::string location; // e.g. "action toggle / effect L0"
    std::string message;

    bool operator==(const ValidationIssue&) const = default;
};

using ValidationReport = std::vector<ValidationIssue>;

inline constexpr double kDistributionTolerance = 1e-9;

namespace detail {

inline std::string short_real(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

class Validator {
public:
    explicit Validator(const FactoredMDP& mdp) : mdp_(mdp) {}

    ValidationReport run() {
        check_variables();
        check_actions();
        check_reward();
        if (mdp_.init) check_init(*mdp_.init);
        return std::move(report_);
    }

private:
    void add(std::string code, std::string location, std::string message) {
        report_.push_back({std::move(code), std::move(location), std::move(message)});
    }

    [[nodiscard]] bool var_ok(VarId v) const { return v < mdp_.variables.size(); }

    [[nodiscard]] bool lit_ok(const Literal& l) const {
        return var_ok(l.var) && l.value < mdp_.variables[l.var].domain_size();
    }

    void check_variables() {
        if (!(mdp_.discount >= 0.0 && mdp_.discount < 1.0))
            add("BAD_DISCOUNT", "discount", "discount must satisfy 0 <= beta < 1, got " + short_real(mdp_.discount));
        std::set<std::string> names;
        for (const auto& v : mdp_.variables) {
            std::string loc = "variable " + v.name;
            if (!names.insert(v.name).second) add("DUPLICATE_VARIABLE", loc, "variable declared twice");
            if (v.name.rfind("__", 0) == 0) add("RESERVED_NAME", loc, "identifiers may not start with '__'");
            if (v.domain_size() < 2) add("DOMAIN_TOO_SMALL", loc, "domain needs at least two values");
            std::set<std::string> vals;
            for (const auto& val : v.values)
                if (!vals.insert(val).second) add("DUPLICATE_VALUE", loc, "value '" + val + "' repeated");
        }
    }

    template <class Leaf, class LeafCheck>
    void check_tree(const DecisionTree<Leaf>& t, const std::string& loc, bool allow_post, LeafCheck&& leaf_check) {
        std::vector<std::pair<VarId, bool>> path;
        auto rec = [&](auto&& self, const DecisionTree<Leaf>& node) -> void {
            if (node.is_leaf()) {
                leaf_check(node.leaf);
                return;
            }
            if (!var_ok(node.var)) {
                add("UNKNOWN_VARIABLE", loc, "split on undeclared variable #" + std::to_string(node.var));
                return;
            }
            const auto& var = mdp_.variables[node.var];
            if (node.post && !allow_post)
                add("POST_IN_REWARD", loc, "post-action test on " + var.name + " outside an action CPT");
            for (const auto& [pv, ppost] : path)
                if (pv == node.var && ppost == node.post) {
                    add("PATH_REPEAT", loc, "variable " + var.name + " tested twice on one path");
                    break;
                }
            std::set<ValueId> seen(node.cases.begin(), node.cases.end());
            bool covered = seen.size() == node.cases.size() && seen.size() == var.domain_size() &&
                           (seen.empty() || *seen.rbegin() < var.domain_size());
            if (!covered || node.cases.size() != node.children.size())
                add("SPLIT_COVERAGE", loc, "split on " + var.name + " must list each domain value exactly once");
            path.emplace_back(node.var, node.post);
            for (const auto& c : node.children) self(self, c);
            path.pop_back();
        };
        rec(rec, t);
    }

    void check_actions() {
        if (mdp_.actions.empty()) add("NO_ACTIONS", "actions", "at least one action is required");
        std::set<std::string> names;
        for (const auto& a : mdp_.actions) {
            std::string aloc = "action " + a.name;
            if (!names.insert(a.name).second) add("DUPLICATE_ACTION", aloc, "action declared twice");
            if (a.name.rfind("__", 0) == 0) add("RESERVED_NAME", aloc, "identifiers may not start with '__'");
            bool refs_ok = true;
            for (const auto& [var, cpt] : a.effects) {
                if (!var_ok(var)) {
                    add("UNKNOWN_VARIABLE", aloc, "effect on undeclared variable #" + std::to_string(var));
                    refs_ok = false;
                    continue;
                }
                std::string loc = aloc + " / effect " + mdp_.variables[var].name;
                std::size_t dom = mdp_.variables[var].domain_size();
                check_tree(cpt, loc, true, [&](const Distribution& d) {
                    if (d.prob.size() != dom) {
                        add("DIST_SIZE", loc, "distribution does not match the domain of " + mdp_.variables[var].name);
                        return;
                    }
                    for (double p : d.prob)
                        if (!(p >= 0.0 && p <= 1.0)) {
                            add("DIST_RANGE", loc, "probability " + short_real(p) + " outside [0,1]");
                            return;
                        }
                    double s = d.sum();
                    if (std::fabs(s - 1.0) > kDistributionTolerance)
                        add("DIST_SUM", loc, "distribution sums to " + short_real(s));
                });
                for_each_split(cpt, [&](VarId tested, bool post) {
                    if (post && var_ok(tested) && !a.effects.count(tested))
                        add("POST_NOT_AFFECTED", loc,
                            "post-action test on " + mdp_.variables[tested].name + ", which the action does not affect");
                });
            }
            if (refs_ok && !post_dependency_order(a))
                add("INTRA_SLICE_CYCLE", aloc, "post-action dependencies form a cycle");
        }
    }

    void check_reward() {
        check_tree(mdp_.reward, "reward", false, [&](double r) {
            if (!std::isfinite(r)) add("REWARD_NOT_FINITE", "reward", "reward leaf is not finite");
        });
    }

    void check_init(const InitialCondition& init) {
        if (const auto* s = std::get_if<State>(&init)) {
            if (s->size() != mdp_.variables.size()) {
                add("INIT_ARITY", "init", "initial state must assign every variable");
                return;
            }
            for (std::size_t i = 0; i < s->size(); ++i)
                if ((*s)[i] >= mdp_.variables[i].domain_size())
                    add("INIT_VALUE", "init", "initial value out of range for " + mdp_.variables[i].name);
            return;
        }
        const auto& m = std::get<MultiStateInit>(init);
        std::vector<bool> seen(mdp_.variables.size(), false);
        for (const auto& l : m.values) {
            if (!lit_ok(l)) {
                add("INIT_VALUE", "init", "initial literal out of range");
                continue;
            }
            seen[l.var] = true;
        }
        for (std::size_t i = 0; i < seen.size(); ++i)
            if (!seen[i]) add("INIT_MISSING_VARIABLE", "init", "no initial value for " + mdp_.variables[i].name);
        for (const auto& ex : m.exclusions) {
            std::set<VarId> vars;
            bool ok = ex.size() >= 2;
            for (const auto& l : ex) {
                ok = ok && lit_ok(l) && vars.insert(l.var).second &&
                     std::find(m.values.begin(), m.values.end(), l) != m.values.end();
            }
            if (!ok)
                add("INIT_EXCLUSION", "init",
                    "exclusions need >= 2 initial literals over distinct variables");
        }
    }

    const FactoredMDP& mdp_;
    ValidationReport report_;
};

} // namespace detail

/// Checks every model invariant. Empty report iff the model is valid.
inline ValidationReport validate_mdp(const FactoredMDP& mdp) { return detail::Validator(mdp).run(); }

inline std::string describe(const ValidationReport& report) {
    std::string out;
    for (const auto& issue : report) {
        if (!out.empty()) out += '\n';
        out += issue.code + " at " + issue.location + ": " + issue.message;
    }
    return out;
}

/// Throws ValidationError when the report is non-empty.
inline void require_valid(const FactoredMDP& mdp) {
    auto report = validate_mdp(mdp);
    if (!report.empty()) throw ValidationError(describe(report));
}

} // namespace sreach
