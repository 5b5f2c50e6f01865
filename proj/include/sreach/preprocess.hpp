#pragma once

#include "sreach/model.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace sreach {

/// One collapsed CPT branch: under `condition`, the affected variable (or
/// compound group) takes exactly the values in `effects` with positive probability.
struct ConditionEffect {
    LiteralSet condition;
    std::vector<ValueId> effects;

    bool operator==(const ConditionEffect&) const = default;
};

using SupportTree = DecisionTree<std::vector<ValueId>>;

/// Replaces leaf distributions by their supports and removes every split whose
/// children agree, bottom-up. Branch conditions that differ only in
/// reachability-irrelevant tests disappear.
inline SupportTree collapse_support(const CptTree& cpt) {
    return collapse_identical(map_leaves<std::vector<ValueId>>(cpt, [](const Distribution& d) { return d.support(); }));
}

/// Effect table of a CPT that tests only pre-action variables.
inline std::vector<ConditionEffect> effect_table(const CptTree& cpt) {
    std::vector<ConditionEffect> out;
    for_each_leaf(collapse_support(cpt), [&](const std::vector<PathStep>& path, const std::vector<ValueId>& support) {
        ConditionEffect ce;
        for (const auto& step : path) {
            if (step.post) throw std::invalid_argument("effect_table: CPT has post-action tests; apply compound_transform first");
            ce.condition.push_back({step.var, step.value});
        }
        std::sort(ce.condition.begin(), ce.condition.end());
        ce.effects = support;
        out.push_back(std::move(ce));
    });
    return out;
}

inline std::vector<ConditionEffect> effect_table(const ActionSpec& a, VarId v) {
    auto it = a.effects.find(v);
    if (it == a.effects.end()) throw std::invalid_argument("effect_table: variable is not affected by action " + a.name);
    return effect_table(it->second);
}

/// Connected components of the action's intra-slice dependency graph; each
/// group sorted, groups ordered by their first member.
inline std::vector<std::vector<VarId>> correlation_groups(const ActionSpec& a) {
    std::vector<VarId> vars;
    for (const auto& [v, _] : a.effects) vars.push_back(v);
    std::vector<std::size_t> parent(vars.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto index_of = [&](VarId v) -> std::size_t {
        return static_cast<std::size_t>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
    };
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& [v, cpt] : a.effects) {
        for_each_split(cpt, [&](VarId tested, bool post) {
            if (!post || !a.effects.count(tested)) return;
            auto x = find(index_of(v)), y = find(index_of(tested));
            if (x != y) parent[std::max(x, y)] = std::min(x, y);
        });
    }
    std::vector<std::vector<VarId>> groups;
    std::vector<std::size_t> group_of_root(vars.size(), SIZE_MAX);
    for (std::size_t i = 0; i < vars.size(); ++i) {
        auto r = find(i);
        if (group_of_root[r] == SIZE_MAX) {
            group_of_root[r] = groups.size();
            groups.emplace_back();
        }
        groups[group_of_root[r]].push_back(vars[i]);
    }
    return groups;
}

/// A group of variables whose post-action values an action sets jointly.
/// Singletons are plain variables; larger groups are compound variables whose
/// values are member tuples in mixed-radix order (first member most significant).
struct CompoundVariable {
    std::string name;
    std::vector<VarId> members;
    std::vector<std::vector<ValueId>> domain;

    [[nodiscard]] bool compound() const noexcept { return members.size() > 1; }

    [[nodiscard]] LiteralSet split(ValueId joint) const {
        LiteralSet out;
        const auto& tuple = domain[joint];
        for (std::size_t i = 0; i < members.size(); ++i) out.push_back({members[i], tuple[i]});
        return out;
    }

    bool operator==(const CompoundVariable&) const = default;
};

/// Effect of one action on one group: a CPT over pre-action parents only,
/// with leaves distributed over the group's domain.
struct EffectGroup {
    CompoundVariable var;
    CptTree cpt;

    bool operator==(const EffectGroup&) const = default;
};

struct TransformedAction {
    std::string name;
    std::vector<EffectGroup> groups;

    bool operator==(const TransformedAction&) const = default;
};

/// The MDP with correlated effects merged into compound variables. Propositional
/// content (variables, reward, init) stays that of `base`.
struct CompoundModel {
    const FactoredMDP* base = nullptr;
    std::vector<TransformedAction> actions;

    /// Compound variables only (the mapping back to original literals).
    [[nodiscard]] std::vector<CompoundVariable> compounds() const {
        std::vector<CompoundVariable> out;
        for (const auto& a : actions)
            for (const auto& g : a.groups)
                if (g.var.compound()) out.push_back(g.var);
        return out;
    }
};

inline constexpr std::size_t kDefaultMaxCompound = 256;
inline constexpr std::uint64_t kMaxCompoundParentAssignments = std::uint64_t{1} << 16;

namespace detail {

inline EffectGroup singleton_group(const FactoredMDP& mdp, VarId v, const CptTree& cpt) {
    EffectGroup g;
    g.var.name = mdp.variables[v].name;
    g.var.members = {v};
    for (std::size_t i = 0; i < mdp.variables[v].domain_size(); ++i) g.var.domain.push_back({static_cast<ValueId>(i)});
    g.cpt = cpt;
    return g;
}

inline EffectGroup compound_group(const FactoredMDP& mdp, const ActionSpec& a, const std::vector<VarId>& members,
                                  std::size_t max_compound) {
    EffectGroup g;
    g.var.members = members;
    g.var.name = "__cmp_" + a.name;
    std::uint64_t size = 1;
    for (VarId m : members) {
        g.var.name += "_" + mdp.variables[m].name;
        size *= mdp.variables[m].domain_size();
        if (size > max_compound)
            throw CapacityError("compound variable for action " + a.name + " exceeds the bound of " +
                                std::to_string(max_compound) + " joint values");
    }
    std::vector<ValueId> tuple(members.size(), 0);
    for (std::uint64_t j = 0; j < size; ++j) {
        g.var.domain.push_back(tuple);
        for (std::size_t i = members.size(); i-- > 0;) {
            if (++tuple[i] < mdp.variables[members[i]].domain_size()) break;
            tuple[i] = 0;
        }
    }

    ActionSpec sub;
    sub.name = a.name;
    std::vector<VarId> parents;
    for (VarId m : members) {
        sub.effects.emplace(m, a.effects.at(m));
        for_each_split(a.effects.at(m), [&](VarId tested, bool post) {
            if (!post && std::find(parents.begin(), parents.end(), tested) == parents.end()) parents.push_back(tested);
        });
    }
    std::sort(parents.begin(), parents.end());
    std::uint64_t assignments = 1;
    for (VarId p : parents) {
        assignments *= mdp.variables[p].domain_size();
        if (assignments > kMaxCompoundParentAssignments)
            throw CapacityError("compound variable for action " + a.name + " has too many parent assignments");
    }
    auto order = post_dependency_order(sub);
    if (!order) throw ValidationError("action '" + a.name + "' has cyclic post-action dependencies");

    std::vector<ValueId> pre(mdp.variables.size(), 0);
    std::vector<ValueId> post(mdp.variables.size(), 0);
    auto joint_at_leaf = [&]() {
        Distribution d;
        d.prob.assign(size, 0.0);
        auto rec = [&](auto&& self, std::size_t i, double p) -> void {
            if (i == order->size()) {
                std::uint64_t code = 0;
                for (VarId m : members) code = code * mdp.variables[m].domain_size() + post[m];
                d.prob[code] += p;
                return;
            }
            VarId var = (*order)[i];
            const auto& dist = evaluate(
                sub.effects.at(var), [&](VarId v) { return pre[v]; }, [&](VarId v) { return post[v]; });
            for (std::size_t v = 0; v < dist.prob.size(); ++v) {
                if (dist.prob[v] <= 0.0) continue;
                post[var] = static_cast<ValueId>(v);
                self(self, i + 1, p * dist.prob[v]);
            }
        };
        rec(rec, 0, 1.0);
        return d;
    };

    auto build = [&](auto&& self, std::size_t i) -> CptTree {
        if (i == parents.size()) return CptTree::make_leaf(joint_at_leaf());
        std::vector<CptTree> children;
        for (std::size_t v = 0; v < mdp.variables[parents[i]].domain_size(); ++v) {
            pre[parents[i]] = static_cast<ValueId>(v);
            children.push_back(self(self, i + 1));
        }
        return CptTree::make_split(parents[i], std::move(children));
    };
    g.cpt = collapse_identical(build(build, 0));
    return g;
}

} // namespace detail

/// Merges every correlated group of every action into one compound variable
/// whose CPT depends on pre-action variables only. Uncorrelated effects pass
/// through unchanged.
inline CompoundModel compound_transform(const FactoredMDP& mdp, std::size_t max_compound = kDefaultMaxCompound) {
    CompoundModel cm;
    cm.base = &mdp;
    for (const auto& a : mdp.actions) {
        TransformedAction ta;
        ta.name = a.name;
        for (const auto& group : correlation_groups(a)) {
            if (group.size() == 1)
                ta.groups.push_back(detail::singleton_group(mdp, group.front(), a.effects.at(group.front())));
            else
                ta.groups.push_back(detail::compound_group(mdp, a, group, max_compound));
        }
        cm.actions.push_back(std::move(ta));
    }
    return cm;
}

/// Successors of `s` under the transformed action: groups are independent,
/// each sampled from its CPT and split back into original literals.
inline std::vector<std::pair<State, double>> transition_distribution(const CompoundModel& cm, const State& s,
                                                                     std::size_t action) {
    std::vector<std::pair<State, double>> out;
    const auto& ta = cm.actions.at(action);
    State next = s;
    auto lookup = [&](VarId v) { return s[v]; };
    auto rec = [&](auto&& self, std::size_t gi, double p) -> void {
        if (gi == ta.groups.size()) {
            out.emplace_back(next, p);
            return;
        }
        const auto& g = ta.groups[gi];
        const auto& dist = evaluate(g.cpt, lookup, lookup);
        for (std::size_t j = 0; j < dist.prob.size(); ++j) {
            if (dist.prob[j] <= 0.0) continue;
            for (const auto& l : g.var.split(static_cast<ValueId>(j))) next[l.var] = l.value;
            self(self, gi + 1, p * dist.prob[j]);
        }
        for (VarId m : g.var.members) next[m] = s[m];
    };
    rec(rec, 0, 1.0);
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
}

} // namespace sreach
