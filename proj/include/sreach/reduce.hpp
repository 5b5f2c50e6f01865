#pragma once

#include "sreach/count.hpp"
#include "sreach/reach.hpp"
#include "sreach/sexpr.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sreach {

namespace detail {

/// Constraint lookup by member literal, for incremental path checks.
class ExclusionIndex {
public:
    explicit ExclusionIndex(const ReachableSet& rs) : rs_(rs) {
        for (std::size_t i = 0; i < rs.excl.size(); ++i)
            for (const auto& l : rs.excl[i]) by_literal_[l].push_back(i);
    }

    [[nodiscard]] bool reachable(const Literal& l) const {
        return std::binary_search(rs_.values.begin(), rs_.values.end(), l);
    }

    /// True if `path` plus `l` contains a constraint that mentions `l`.
    [[nodiscard]] bool violates(const LiteralSet& path, const Literal& l) const {
        auto it = by_literal_.find(l);
        if (it == by_literal_.end()) return false;
        for (std::size_t ci : it->second) {
            const auto& c = rs_.excl[ci];
            bool all = std::all_of(c.begin(), c.end(), [&](const Literal& x) {
                return x == l || std::find(path.begin(), path.end(), x) != path.end();
            });
            if (all) return true;
        }
        return false;
    }

private:
    const ReachableSet& rs_;
    std::map<Literal, std::vector<std::size_t>> by_literal_;
};

template <class Leaf>
std::optional<DecisionTree<Leaf>> prune(const DecisionTree<Leaf>& t, const ExclusionIndex& index, LiteralSet& path,
                                        std::size_t& pruned, bool& changed) {
    if (t.is_leaf()) return t;
    DecisionTree<Leaf> out;
    out.var = t.var;
    out.post = t.post;
    bool local_change = false;
    for (std::size_t i = 0; i < t.children.size(); ++i) {
        Literal lit{t.var, t.cases[i]};
        if (!index.reachable(lit) || (!t.post && index.violates(path, lit))) {
            ++pruned;
            local_change = true;
            continue;
        }
        if (!t.post) path.push_back(lit);
        bool child_change = false;
        auto child = prune(t.children[i], index, path, pruned, child_change);
        if (!t.post) path.pop_back();
        local_change = local_change || child_change;
        if (!child) {
            ++pruned;
            continue;
        }
        out.cases.push_back(t.cases[i]);
        out.children.push_back(std::move(*child));
    }
    changed = local_change;
    if (!local_change) return t;
    if (out.children.empty()) return std::nullopt;
    if (out.children.size() == 1) return std::move(out.children.front());
    bool same = std::all_of(out.children.begin() + 1, out.children.end(),
                            [&](const DecisionTree<Leaf>& c) { return c == out.children.front(); });
    if (same) return std::move(out.children.front());
    return out;
}

} // namespace detail

/// Removes edges labelled with unreachable values, and pre-action edges whose
/// literal completes a constraint together with `path`. One-edge nodes are
/// replaced by their child, childless nodes vanish one level up, and a pruned
/// node whose remaining children coincide is replaced by one of them.
/// Untouched subtrees are returned as they were. `pruned` accumulates the
/// number of removed edges.
template <class Leaf>
DecisionTree<Leaf> prune_tree(const DecisionTree<Leaf>& t, const ReachableSet& rs, const LiteralSet& path = {},
                              std::size_t* pruned = nullptr) {
    detail::ExclusionIndex index(rs);
    LiteralSet p = path;
    std::size_t count = 0;
    bool changed = false;
    auto out = detail::prune(t, index, p, count, changed);
    if (pruned) *pruned += count;
    // every path inconsistent: nothing consistent reaches this tree, keep it whole
    return out ? std::move(*out) : t;
}

/// Variables with exactly one reachable value, with that value.
inline std::vector<Literal> removable_variables(const ReachableSet& rs, const FactoredMDP& mdp) {
    std::vector<std::vector<ValueId>> vals(mdp.variables.size());
    for (const auto& l : rs.values)
        if (l.var < vals.size()) vals[l.var].push_back(l.value);
    std::vector<Literal> out;
    for (std::size_t v = 0; v < vals.size(); ++v)
        if (vals[v].size() == 1) out.push_back({static_cast<VarId>(v), vals[v].front()});
    return out;
}

/// Maps states and literals of an original model onto a reduced one.
struct Projection {
    std::vector<std::optional<VarId>> var_map;
    std::vector<std::vector<std::optional<ValueId>>> value_map;

    [[nodiscard]] std::optional<Literal> map(const Literal& l) const {
        auto v = var_map[l.var];
        if (!v) return std::nullopt;
        auto x = value_map[l.var][l.value];
        if (!x) return std::nullopt;
        return Literal{*v, *x};
    }

    /// Restriction of `s` to the retained variables. Values absent from the
    /// reduced domains map to value 0 (such states are never consistent).
    [[nodiscard]] State project(const State& s) const {
        std::vector<ValueId> out;
        for (std::size_t v = 0; v < var_map.size(); ++v)
            if (var_map[v]) out.push_back(value_map[v][s[v]].value_or(0));
        return State(std::move(out));
    }

    /// Composition: first `this`, then `next`.
    [[nodiscard]] Projection then(const Projection& next) const {
        Projection p;
        p.var_map.resize(var_map.size());
        p.value_map.resize(var_map.size());
        for (std::size_t v = 0; v < var_map.size(); ++v) {
            p.value_map[v].assign(value_map[v].size(), std::nullopt);
            if (!var_map[v]) continue;
            p.var_map[v] = next.var_map[*var_map[v]];
            for (std::size_t x = 0; x < value_map[v].size(); ++x)
                if (value_map[v][x] && p.var_map[v]) p.value_map[v][x] = next.value_map[*var_map[v]][*value_map[v][x]];
        }
        return p;
    }

    static Projection identity(const FactoredMDP& mdp) {
        Projection p;
        for (std::size_t v = 0; v < mdp.variables.size(); ++v) {
            p.var_map.push_back(static_cast<VarId>(v));
            std::vector<std::optional<ValueId>> m;
            for (std::size_t x = 0; x < mdp.variables[v].domain_size(); ++x) m.push_back(static_cast<ValueId>(x));
            p.value_map.push_back(std::move(m));
        }
        return p;
    }
};

struct ReducedModel {
    FactoredMDP mdp;
    Projection projection;
    std::size_t pruned_branches = 0;
    std::size_t dropped_actions = 0;
};

namespace detail {

/// Rewrites a model onto retained variables and values. Splits on dropped
/// variables follow `fixed` (or the first child); gaps left in a split are
/// filled with a copy of its first child so trees stay total.
class ModelRemapper {
public:
    ModelRemapper(const FactoredMDP& mdp, Projection projection, std::vector<std::optional<ValueId>> fixed)
        : mdp_(mdp), proj_(std::move(projection)), fixed_(std::move(fixed)) {
        for (std::size_t v = 0; v < mdp.variables.size(); ++v)
            if (proj_.var_map[v]) {
                Variable nv;
                nv.name = mdp.variables[v].name;
                for (std::size_t x = 0; x < mdp.variables[v].domain_size(); ++x)
                    if (proj_.value_map[v][x]) nv.values.push_back(mdp.variables[v].values[x]);
                new_vars_.push_back(std::move(nv));
            }
    }

    template <class Leaf, class LeafMap>
    DecisionTree<Leaf> tree(const DecisionTree<Leaf>& t, LeafMap&& leaf) const {
        if (t.is_leaf()) return DecisionTree<Leaf>::make_leaf(leaf(t.leaf));
        auto nv = proj_.var_map[t.var];
        if (!nv) {
            const auto& child = fixed_[t.var] ? t.child_for(*fixed_[t.var]) : t.children.front();
            return tree(child, leaf);
        }
        std::vector<std::optional<DecisionTree<Leaf>>> slots(new_vars_[*nv].domain_size());
        for (std::size_t i = 0; i < t.children.size(); ++i) {
            auto x = proj_.value_map[t.var][t.cases[i]];
            if (x) slots[*x] = tree(t.children[i], leaf);
        }
        std::optional<DecisionTree<Leaf>> first;
        for (const auto& s : slots)
            if (s) {
                first = *s;
                break;
            }
        if (!first) return tree(t.children.front(), leaf);
        bool filled = false;
        std::vector<DecisionTree<Leaf>> children;
        for (auto& s : slots) {
            filled = filled || !s;
            children.push_back(s ? std::move(*s) : *first);
        }
        auto out = DecisionTree<Leaf>::make_split(*nv, std::move(children), t.post);
        if (!filled) return out;
        bool same = std::all_of(out.children.begin() + 1, out.children.end(),
                                [&](const DecisionTree<Leaf>& c) { return c == out.children.front(); });
        return same ? std::move(out.children.front()) : out;
    }

    /// Distribution of variable `v` onto its retained values. Mass on dropped
    /// values can only sit at leaves no consistent state reaches; such leaves
    /// are renormalised (or pointed at the first value) to keep the model valid.
    [[nodiscard]] Distribution distribution(VarId v, const Distribution& d) const {
        Distribution out;
        out.prob.assign(new_vars_[*proj_.var_map[v]].domain_size(), 0.0);
        double kept = 0.0, lost = 0.0;
        for (std::size_t x = 0; x < d.prob.size(); ++x) {
            if (auto nx = proj_.value_map[v][x]) {
                out.prob[*nx] = d.prob[x];
                kept += d.prob[x];
            } else {
                lost += d.prob[x];
            }
        }
        if (lost > 0.0) {
            if (kept > 0.0)
                for (auto& p : out.prob) p /= kept;
            else
                out.prob[0] = 1.0;
        }
        return out;
    }

    [[nodiscard]] FactoredMDP remap(std::size_t* dropped_actions) const {
        FactoredMDP out;
        out.variables = new_vars_;
        out.discount = mdp_.discount;
        out.reward = tree(mdp_.reward, [](double r) { return r; });
        bool kept_identity = false;
        for (const auto& a : mdp_.actions) {
            ActionSpec na;
            na.name = a.name;
            for (const auto& [v, cpt] : a.effects) {
                auto nv = proj_.var_map[v];
                if (!nv) continue;
                na.effects.emplace(*nv, tree(cpt, [&](const Distribution& d) { return distribution(v, d); }));
            }
            if (is_identity(na)) {
                if (kept_identity) {
                    if (dropped_actions) ++*dropped_actions;
                    continue;
                }
                kept_identity = true;
            }
            out.actions.push_back(std::move(na));
        }
        if (mdp_.init) out.init = init(*mdp_.init);
        return out;
    }

    static bool is_identity(const ActionSpec& a) {
        for (const auto& [v, cpt] : a.effects) {
            bool ok = true;
            for_each_leaf(cpt, [&](const std::vector<PathStep>& path, const Distribution& d) {
                if (!ok) return;
                auto step = std::find_if(path.begin(), path.end(), [&](const PathStep& s) { return !s.post && s.var == v; });
                if (step == path.end() || step->value >= d.prob.size() || d.prob[step->value] != 1.0) ok = false;
            });
            if (!ok) return false;
        }
        return true;
    }

private:
    [[nodiscard]] InitialCondition init(const InitialCondition& init) const {
        if (const auto* s = std::get_if<State>(&init)) return proj_.project(*s);
        const auto& m = std::get<MultiStateInit>(init);
        MultiStateInit out;
        for (const auto& l : m.values)
            if (auto nl = proj_.map(l)) out.values.push_back(*nl);
        for (const auto& ex : m.exclusions) {
            LiteralSet nex;
            bool live = true;
            for (const auto& l : ex) {
                if (!proj_.var_map[l.var]) {
                    // dropped variables are fixed; a literal disagreeing with the fixed value never holds
                    if (!fixed_[l.var] || *fixed_[l.var] != l.value) live = false;
                    continue;
                }
                auto nl = proj_.map(l);
                if (!nl) {
                    live = false;
                    continue;
                }
                nex.push_back(*nl);
            }
            if (!live) continue;
            if (nex.size() == 1) {
                std::erase(out.values, nex.front());
                continue;
            }
            if (nex.size() >= 2) out.exclusions.push_back(std::move(nex));
        }
        std::sort(out.values.begin(), out.values.end());
        std::sort(out.exclusions.begin(), out.exclusions.end());
        out.exclusions.erase(std::unique(out.exclusions.begin(), out.exclusions.end()), out.exclusions.end());
        return out;
    }

    const FactoredMDP& mdp_;
    Projection proj_;
    std::vector<std::optional<ValueId>> fixed_;
    std::vector<Variable> new_vars_;
};

} // namespace detail

/// The model restricted to `rs`: trees pruned, unreachable values removed from
/// domains, single-valued variables deleted, and redundant pure-persistence
/// actions dropped (the first one is kept as the "do nothing" option).
inline ReducedModel reduce_model(const FactoredMDP& mdp, const ReachableSet& rs) {
    ReducedModel out;
    FactoredMDP pruned = mdp;
    pruned.reward = prune_tree(mdp.reward, rs, {}, &out.pruned_branches);
    for (auto& a : pruned.actions)
        for (auto& [v, cpt] : a.effects) cpt = prune_tree(cpt, rs, {}, &out.pruned_branches);

    Projection proj;
    std::vector<std::optional<ValueId>> fixed(mdp.variables.size());
    std::vector<std::vector<ValueId>> vals(mdp.variables.size());
    for (const auto& l : rs.values) vals[l.var].push_back(l.value);
    VarId next = 0;
    for (std::size_t v = 0; v < mdp.variables.size(); ++v) {
        std::vector<std::optional<ValueId>> m(mdp.variables[v].domain_size());
        if (vals[v].size() == 1) fixed[v] = vals[v].front();
        if (vals[v].size() >= 2) {
            proj.var_map.push_back(next++);
            ValueId nx = 0;
            for (std::size_t x = 0; x < m.size(); ++x)
                if (std::binary_search(vals[v].begin(), vals[v].end(), static_cast<ValueId>(x))) m[x] = nx++;
        } else {
            proj.var_map.push_back(std::nullopt);
        }
        proj.value_map.push_back(std::move(m));
    }
    out.mdp = detail::ModelRemapper(pruned, proj, fixed).remap(&out.dropped_actions);
    out.projection = std::move(proj);
    return out;
}

inline FactoredMDP reduce_mdp(const FactoredMDP& mdp, const ReachableSet& rs) { return reduce_model(mdp, rs).mdp; }

/// Variables tested by the reward tree, closed under "tested by the CPT of a
/// relevant variable" (pre- or post-action, any action). Sorted.
inline std::vector<VarId> relevant_variables(const FactoredMDP& mdp) {
    std::vector<char> rel(mdp.variables.size(), 0);
    std::vector<VarId> work;
    auto mark = [&](VarId v, bool) {
        if (!rel[v]) {
            rel[v] = 1;
            work.push_back(v);
        }
    };
    for_each_split(mdp.reward, mark);
    while (!work.empty()) {
        VarId v = work.back();
        work.pop_back();
        for (const auto& a : mdp.actions) {
            auto it = a.effects.find(v);
            if (it != a.effects.end()) for_each_split(it->second, mark);
        }
    }
    std::vector<VarId> out;
    for (std::size_t v = 0; v < rel.size(); ++v)
        if (rel[v]) out.push_back(static_cast<VarId>(v));
    return out;
}

/// Deletes every variable outside `keep` (which must be closed under CPT
/// tests of kept variables) together with its CPTs.
inline ReducedModel restrict_variables(const FactoredMDP& mdp, const std::vector<VarId>& keep) {
    Projection proj;
    VarId next = 0;
    for (std::size_t v = 0; v < mdp.variables.size(); ++v) {
        bool k = std::binary_search(keep.begin(), keep.end(), static_cast<VarId>(v));
        proj.var_map.push_back(k ? std::optional<VarId>(next++) : std::nullopt);
        std::vector<std::optional<ValueId>> m;
        for (std::size_t x = 0; x < mdp.variables[v].domain_size(); ++x)
            m.push_back(k ? std::optional<ValueId>(static_cast<ValueId>(x)) : std::nullopt);
        proj.value_map.push_back(std::move(m));
    }
    ReducedModel out;
    // exclusions of a multi-state init that touch deleted variables are dropped
    out.mdp = detail::ModelRemapper(mdp, proj, std::vector<std::optional<ValueId>>(mdp.variables.size()))
                  .remap(&out.dropped_actions);
    out.projection = std::move(proj);
    return out;
}

struct ReductionReport {
    std::vector<Literal> removed_values;       // original literals outside rs.values
    std::vector<Literal> removable_variables;  // original variables fixed to one value
    std::size_t pruned_branch_count = 0;
    std::vector<std::string> relevant_variables; // names, in reduced-model order
    BigCount state_count = 0;
    BigCount reachable_size = 0;
    BigCount effective_size = 0;
    std::size_t reduced_variables = 0;
    std::size_t effective_variables = 0;
    std::size_t dropped_actions = 0;
};

struct EffectiveModel {
    FactoredMDP reduced;
    FactoredMDP effective;
    Projection to_reduced;
    Projection to_effective;
    ReductionReport report;
};

/// reduce_mdp, then static relevance on the reduced model, then deletion of
/// irrelevant variables, with both sizes. The effective size counts states
/// over the remaining variables: constraint literals on single-valued
/// variables always hold and are dropped from their constraints first, then
/// constraints touching deleted variables are dropped. No variables left means
/// no decision problem, size 0.
inline EffectiveModel effective_mdp(const FactoredMDP& mdp, const ReachableSet& rs) {
    EffectiveModel out;
    auto reduced = reduce_model(mdp, rs);
    auto rel = relevant_variables(reduced.mdp);
    auto eff = restrict_variables(reduced.mdp, rel);

    auto& rep = out.report;
    for (std::size_t v = 0; v < mdp.variables.size(); ++v)
        for (std::size_t x = 0; x < mdp.variables[v].domain_size(); ++x) {
            Literal l{static_cast<VarId>(v), static_cast<ValueId>(x)};
            if (!std::binary_search(rs.values.begin(), rs.values.end(), l)) rep.removed_values.push_back(l);
        }
    rep.removable_variables = removable_variables(rs, mdp);
    rep.pruned_branch_count = reduced.pruned_branches;
    for (VarId v : rel) rep.relevant_variables.push_back(reduced.mdp.variables[v].name);
    rep.state_count = state_count(mdp);
    rep.reachable_size = count_consistent(rs, mdp);
    rep.reduced_variables = reduced.mdp.variables.size();
    rep.effective_variables = eff.mdp.variables.size();
    rep.dropped_actions = reduced.dropped_actions + eff.dropped_actions;

    out.to_effective = reduced.projection.then(eff.projection);
    if (eff.mdp.variables.empty()) {
        rep.effective_size = 0;
    } else {
        ReachableSet projected;
        projected.k = rs.k;
        std::vector<char> fixed_var(mdp.variables.size(), 0);
        for (const auto& l : rep.removable_variables) fixed_var[l.var] = 1;
        for (const auto& l : rs.values)
            if (auto nl = out.to_effective.map(l)) projected.values.push_back(*nl);
        std::vector<Literal> never;
        for (const auto& ex : rs.excl) {
            LiteralSet nex;
            bool live = true;
            for (const auto& l : ex) {
                if (fixed_var[l.var]) continue;
                auto nl = out.to_effective.map(l);
                if (!nl) {
                    live = false;
                    break;
                }
                nex.push_back(*nl);
            }
            if (!live) continue;
            if (nex.size() == 1) never.push_back(nex.front());
            else if (nex.size() >= 2) projected.excl.push_back(std::move(nex));
        }
        std::sort(projected.values.begin(), projected.values.end());
        for (const auto& l : never) std::erase(projected.values, l);
        rep.effective_size = count_consistent(projected, eff.mdp);
    }
    out.reduced = std::move(reduced.mdp);
    out.effective = std::move(eff.mdp);
    out.to_reduced = std::move(reduced.projection);
    return out;
}

inline std::string serialize_report(const FactoredMDP& mdp, const ReductionReport& r) {
    auto lit = [&](const Literal& l) {
        return "(" + mdp.variables[l.var].name + " " + mdp.variables[l.var].values[l.value] + ")";
    };
    std::string out = "(report\n  (removed-values";
    for (const auto& l : r.removed_values) out += " " + lit(l);
    out += ")\n  (removable-variables";
    for (const auto& l : r.removable_variables) out += " " + lit(l);
    out += ")\n  (pruned-branches " + std::to_string(r.pruned_branch_count) + ")";
    out += "\n  (dropped-actions " + std::to_string(r.dropped_actions) + ")";
    out += "\n  (relevant-variables";
    for (const auto& n : r.relevant_variables) out += " " + n;
    out += ")\n  (state-count " + r.state_count.str() + ")";
    out += "\n  (reduced-variables " + std::to_string(r.reduced_variables) + ")";
    out += "\n  (effective-variables " + std::to_string(r.effective_variables) + ")";
    out += "\n  (reachable-size " + r.reachable_size.str() + ")";
    out += "\n  (effective-size " + r.effective_size.str() + "))\n";
    return out;
}

} // namespace sreach
