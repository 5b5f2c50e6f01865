#pragma once

#include "sreach/reach.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

namespace sreach {

inline constexpr std::uint64_t kMaxCountTable = std::uint64_t{1} << 24;

namespace detail {

inline CapacityError count_overflow() { return CapacityError("consistent-state count of one component exceeds 64 bits"); }

/// Dense factor over a few variables (first variable most significant).
struct CountFactor {
    std::vector<VarId> vars;
    std::vector<std::uint64_t> table;
};

inline std::uint64_t table_size(const std::vector<VarId>& vars, const std::vector<std::size_t>& dom) {
    std::uint64_t n = 1;
    for (VarId v : vars) {
        n *= dom[v];
        if (n > kMaxCountTable) throw CapacityError("consistent-state count needs a table above 2^24 entries");
    }
    return n;
}

/// Counts by depth-first enumeration, most-constrained variables first; a
/// constraint is checked once its last variable is assigned. Gives up after
/// kMaxCountTable search nodes.
inline BigCount count_by_search(const std::vector<VarId>& vars, const std::vector<std::size_t>& dom,
                                const std::vector<std::vector<std::pair<VarId, std::size_t>>>& constraints) {
    std::vector<std::size_t> degree(dom.size(), 0);
    for (const auto& c : constraints)
        for (const auto& [v, _] : c) ++degree[v];
    std::vector<VarId> order = vars;
    std::stable_sort(order.begin(), order.end(), [&](VarId a, VarId b) { return degree[a] > degree[b]; });
    std::vector<std::size_t> pos(dom.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    std::vector<std::vector<const std::vector<std::pair<VarId, std::size_t>>*>> ending(order.size());
    for (const auto& c : constraints) {
        std::size_t last = 0;
        for (const auto& [v, _] : c) last = std::max(last, pos[v]);
        ending[last].push_back(&c);
    }
    std::vector<std::size_t> assign(dom.size(), 0);
    std::uint64_t nodes = 0;
    BigCount total = 0;
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == order.size()) {
            total += 1;
            return;
        }
        VarId v = order[i];
        for (std::size_t x = 0; x < dom[v]; ++x) {
            if (++nodes > kMaxCountTable)
                throw CapacityError("consistent-state count needs more than 2^24 enumeration steps in one component");
            assign[v] = x;
            bool hit = std::any_of(ending[i].begin(), ending[i].end(), [&](const auto* c) {
                return std::all_of(c->begin(), c->end(), [&](const auto& l) { return assign[l.first] == l.second; });
            });
            if (!hit) self(self, i + 1);
        }
    };
    rec(rec, 0);
    return total;
}

/// Variable elimination over one component.
inline BigCount count_by_elimination(const std::vector<VarId>& vars, const std::vector<std::size_t>& dom,
                                    const std::vector<std::vector<std::pair<VarId, std::size_t>>>& constraints) {
    std::vector<CountFactor> factors;
    for (const auto& c : constraints) {
        CountFactor f;
        for (const auto& [v, _] : c) f.vars.push_back(v);
        std::uint64_t n = table_size(f.vars, dom);
        f.table.assign(n, 1);
        std::uint64_t code = 0;
        for (const auto& [v, x] : c) code = code * dom[v] + x;
        f.table[code] = 0;
        factors.push_back(std::move(f));
    }
    std::vector<VarId> remaining = vars;
    BigCount scale = 1;
    while (!remaining.empty()) {
        // pick the variable whose elimination touches the smallest scope
        std::size_t best = 0;
        std::uint64_t best_size = UINT64_MAX;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            std::vector<VarId> scope;
            for (const auto& f : factors)
                if (std::find(f.vars.begin(), f.vars.end(), remaining[i]) != f.vars.end())
                    for (VarId v : f.vars)
                        if (std::find(scope.begin(), scope.end(), v) == scope.end()) scope.push_back(v);
            std::uint64_t sz = 1;
            for (VarId v : scope) sz = std::min<std::uint64_t>(sz * dom[v], UINT64_MAX / 64);
            if (sz < best_size) {
                best_size = sz;
                best = i;
            }
        }
        VarId x = remaining[best];
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));

        std::vector<CountFactor> touching, rest;
        for (auto& f : factors)
            (std::find(f.vars.begin(), f.vars.end(), x) != f.vars.end() ? touching : rest).push_back(std::move(f));
        if (touching.empty()) {
            scale *= dom[x];
            factors = std::move(rest);
            continue;
        }
        std::vector<VarId> scope;
        for (const auto& f : touching)
            for (VarId v : f.vars)
                if (v != x && std::find(scope.begin(), scope.end(), v) == scope.end()) scope.push_back(v);
        std::sort(scope.begin(), scope.end());
        std::vector<VarId> full = scope;
        full.push_back(x);
        std::uint64_t full_size = table_size(full, dom);
        CountFactor out;
        out.vars = scope;
        out.table.assign(table_size(scope, dom), 0);

        std::vector<std::size_t> assign(dom.size(), 0);
        for (std::uint64_t code = 0; code < full_size; ++code) {
            std::uint64_t c = code;
            for (std::size_t i = full.size(); i-- > 0;) {
                assign[full[i]] = c % dom[full[i]];
                c /= dom[full[i]];
            }
            std::uint64_t prod = 1;
            for (const auto& f : touching) {
                std::uint64_t idx = 0;
                for (VarId v : f.vars) idx = idx * dom[v] + assign[v];
                if (__builtin_mul_overflow(prod, f.table[idx], &prod)) throw detail::count_overflow();
                if (!prod) break;
            }
            if (!prod) continue;
            std::uint64_t idx = 0;
            for (VarId v : scope) idx = idx * dom[v] + assign[v];
            if (__builtin_add_overflow(out.table[idx], prod, &out.table[idx])) throw detail::count_overflow();
        }
        rest.push_back(std::move(out));
        factors = std::move(rest);
    }
    BigCount total = scale;
    for (const auto& f : factors) total *= f.table.front(); // only empty-scope factors remain
    return total;
}

/// Counts assignments of one connected component: each variable ranges over
/// its reachable values (re-indexed 0..d-1) and no constraint may hold.
/// Variable elimination, greedily picking the variable with the smallest
/// resulting factor; dense components whose factors outgrow the table cap
/// fall back to budgeted enumeration.
inline BigCount count_component(const std::vector<VarId>& vars, const std::vector<std::size_t>& dom,
                                const std::vector<std::vector<std::pair<VarId, std::size_t>>>& constraints) {
    try {
        return count_by_elimination(vars, dom, constraints);
    } catch (const CapacityError&) {
        return count_by_search(vars, dom, constraints);
    }
}

} // namespace detail

/// Exact number of states consistent with `rs`. Components of the constraint
/// graph are counted independently; unconstrained variables contribute their
/// number of reachable values.
inline BigCount count_consistent(const ReachableSet& rs, const FactoredMDP& mdp) {
    const std::size_t n = mdp.variables.size();
    std::vector<std::vector<ValueId>> reachable(n);
    for (const auto& l : rs.values)
        if (l.var < n) reachable[l.var].push_back(l.value);
    std::vector<std::size_t> dom(n);
    for (std::size_t v = 0; v < n; ++v) {
        std::sort(reachable[v].begin(), reachable[v].end());
        dom[v] = reachable[v].size();
        if (dom[v] == 0) return 0;
    }
    auto local = [&](const Literal& l) -> std::optional<std::size_t> {
        auto it = std::lower_bound(reachable[l.var].begin(), reachable[l.var].end(), l.value);
        if (it == reachable[l.var].end() || *it != l.value) return std::nullopt;
        return static_cast<std::size_t>(it - reachable[l.var].begin());
    };

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::vector<std::vector<std::pair<VarId, std::size_t>>> constraints;
    for (const auto& ex : rs.excl) {
        std::vector<std::pair<VarId, std::size_t>> c;
        bool live = true;
        for (const auto& l : ex) {
            auto x = local(l);
            if (!x) {
                live = false; // mentions an unreachable value: never matches
                break;
            }
            c.emplace_back(l.var, *x);
        }
        if (!live || c.empty()) continue;
        for (std::size_t i = 1; i < c.size(); ++i) {
            auto a = find(c[0].first), b = find(c[i].first);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
        constraints.push_back(std::move(c));
    }

    BigCount total = 1;
    std::vector<std::vector<VarId>> members(n);
    for (std::size_t v = 0; v < n; ++v) members[find(v)].push_back(static_cast<VarId>(v));
    std::vector<std::vector<std::vector<std::pair<VarId, std::size_t>>>> by_root(n);
    for (auto& c : constraints) by_root[find(c.front().first)].push_back(std::move(c));
    for (std::size_t r = 0; r < n; ++r) {
        if (members[r].empty()) continue;
        if (by_root[r].empty()) {
            for (VarId v : members[r]) total *= dom[v];
            continue;
        }
        total *= detail::count_component(members[r], dom, by_root[r]);
        if (total == 0) return 0;
    }
    return total;
}

} // namespace sreach
