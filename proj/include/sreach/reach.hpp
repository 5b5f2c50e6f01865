#pragma once

#include "sreach/model.hpp"
#include "sreach/preprocess.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sreach {

/// Output of the reachability analysis: reachable literals plus exclusion
/// constraints of arity 2..k. A state is consistent when it uses only
/// reachable literals and contains no constraint.
struct ReachableSet {
    int k = 1;
    int iterations = 0; // propositional levels built, the initial one included
    LiteralSet values;
    std::vector<LiteralSet> excl;

    bool operator==(const ReachableSet&) const = default;
};

/// The set of every literal of `mdp`, no constraints.
inline ReachableSet vacuous_reachable_set(const FactoredMDP& mdp, int k = 1) {
    ReachableSet rs;
    rs.k = k;
    for (std::size_t v = 0; v < mdp.variables.size(); ++v)
        for (std::size_t x = 0; x < mdp.variables[v].domain_size(); ++x)
            rs.values.push_back({static_cast<VarId>(v), static_cast<ValueId>(x)});
    return rs;
}

/// True iff every literal of `c` is reachable, `c` gives each variable at most
/// one value, and no constraint of `level` is a subset of `c`.
inline bool condition_consistent(const LiteralSet& c, const ReachableSet& level) {
    LiteralSet sorted = c;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!std::binary_search(level.values.begin(), level.values.end(), sorted[i])) return false;
        if (i && sorted[i].var == sorted[i - 1].var && sorted[i].value != sorted[i - 1].value) return false;
    }
    for (const auto& ex : level.excl)
        if (std::includes(sorted.begin(), sorted.end(), ex.begin(), ex.end())) return false;
    return true;
}

inline bool state_consistent(const ReachableSet& rs, const State& s) {
    for (std::size_t v = 0; v < s.size(); ++v)
        if (!std::binary_search(rs.values.begin(), rs.values.end(), Literal{static_cast<VarId>(v), s[v]}))
            return false;
    for (const auto& ex : rs.excl)
        if (std::all_of(ex.begin(), ex.end(), [&](const Literal& l) { return s.contains(l); })) return false;
    return true;
}

struct ReachOptions {
    std::size_t max_compound = kDefaultMaxCompound;
    std::uint64_t max_candidates = 50'000'000;
    unsigned threads = 1;
    // Producer search also demands a compatible implied effect for every other
    // group of each chosen action. Off: pairwise propagation only.
    bool implied_effects = true;
};

struct LevelStats {
    int level = 0;
    std::size_t nodes = 0;        // CAE nodes of the action level that produced this level
    std::size_t values = 0;
    std::size_t values_added = 0;
    std::size_t constraints = 0;
    std::uint64_t candidates = 0; // literal sets tested for exclusion
    double seconds = 0.0;
};

namespace detail {

/// Dense numbering of literals; id order equals canonical literal order.
class LiteralIndex {
public:
    LiteralIndex() = default;
    explicit LiteralIndex(const FactoredMDP& mdp) {
        for (std::size_t v = 0; v < mdp.variables.size(); ++v) {
            offset_.push_back(static_cast<int>(var_of_.size()));
            for (std::size_t x = 0; x < mdp.variables[v].domain_size(); ++x) {
                var_of_.push_back(static_cast<VarId>(v));
                value_of_.push_back(static_cast<ValueId>(x));
            }
        }
    }

    [[nodiscard]] int size() const noexcept { return static_cast<int>(var_of_.size()); }
    [[nodiscard]] int id(const Literal& l) const { return offset_[l.var] + static_cast<int>(l.value); }
    [[nodiscard]] Literal literal(int id) const { return {var_of_[id], value_of_[id]}; }
    [[nodiscard]] VarId var(int id) const { return var_of_[id]; }
    [[nodiscard]] std::size_t variable_count() const noexcept { return offset_.size(); }

    [[nodiscard]] std::vector<int> ids(const LiteralSet& s) const {
        std::vector<int> out;
        out.reserve(s.size());
        for (const auto& l : s) out.push_back(id(l));
        std::sort(out.begin(), out.end());
        return out;
    }

    [[nodiscard]] LiteralSet literals(std::span<const int> ids) const {
        LiteralSet out;
        out.reserve(ids.size());
        for (int i : ids) out.push_back(literal(i));
        return out;
    }

private:
    std::vector<int> offset_;
    std::vector<VarId> var_of_;
    std::vector<ValueId> value_of_;
};

/// A propositional level over literal ids, indexed for subset queries.
struct LevelData {
    std::vector<char> has;
    std::vector<std::vector<int>> excl;     // sorted ids; list sorted
    std::vector<std::vector<int>> by_first; // literal id -> constraints whose smallest literal it is

    void index(int literal_count) {
        std::sort(excl.begin(), excl.end());
        excl.erase(std::unique(excl.begin(), excl.end()), excl.end());
        by_first.assign(literal_count, {});
        for (std::size_t i = 0; i < excl.size(); ++i) by_first[excl[i].front()].push_back(static_cast<int>(i));
    }

    /// `ids` sorted. Checks presence, one value per variable, and constraint containment.
    [[nodiscard]] bool consistent(std::span<const int> ids, const LiteralIndex& lits) const {
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (!has[ids[i]]) return false;
            if (i && lits.var(ids[i]) == lits.var(ids[i - 1]) && ids[i] != ids[i - 1]) return false;
        }
        for (int l : ids)
            for (int ci : by_first[l]) {
                const auto& c = excl[ci];
                if (c.size() > ids.size()) continue;
                bool all = std::all_of(c.begin() + 1, c.end(),
                                       [&](int x) { return std::binary_search(ids.begin(), ids.end(), x); });
                if (all) return false;
            }
        return true;
    }

    bool operator==(const LevelData& o) const { return has == o.has && excl == o.excl; }
};

inline std::vector<int> sorted_union(std::span<const int> a, std::span<const int> b) {
    std::vector<int> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// Runs fn(begin, end) over [0, n) split into contiguous chunks, one per thread.
template <class Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n < 2048) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t b = t * chunk, e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

} // namespace detail

/// One (condition, action, effect) node. `effect` holds several literals when
/// the node stands for a compound value.
struct CAENode {
    static constexpr int kNoop = -1;

    LiteralSet condition;
    int action = kNoop; // index into the transformed actions
    int group = -1;     // effect group within the action
    LiteralSet effect;

    [[nodiscard]] bool is_noop() const noexcept { return action == kNoop; }

    bool operator==(const CAENode&) const = default;
};

/// An action level: nodes, pairwise exclusions (bit matrix), implication sets.
/// Exclusions of larger node sets, which arise only from inconsistent
/// condition unions, are answered by `exclusive(span)` against the level the
/// nodes were built from.
class ActionLevel {
public:
    std::vector<CAENode> nodes;

    [[nodiscard]] bool exclusive(std::size_t i, std::size_t j) const {
        return (bits_[i][j >> 6] >> (j & 63)) & 1U;
    }

    /// True if the node set contains a marked-exclusive subset: some pair, or
    /// (k >= 2) a group whose condition union is inconsistent.
    [[nodiscard]] bool exclusive(std::span<const std::size_t> set) const {
        for (std::size_t a = 0; a < set.size(); ++a)
            for (std::size_t b = a + 1; b < set.size(); ++b)
                if (set[a] != set[b] && exclusive(set[a], set[b])) return true;
        // an inconsistent union always has a witness of at most k nodes
        if (k_ < 2 || set.size() < 3) return false;
        std::vector<int> u;
        for (auto n : set) u = detail::sorted_union(u, cond_ids_[node_cond_[n]]);
        return !level_->consistent(u, *lits_);
    }

    [[nodiscard]] std::vector<std::pair<std::size_t, std::size_t>> exclusive_pairs() const {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            for (std::size_t j = i + 1; j < nodes.size(); ++j)
                if (exclusive(i, j)) out.emplace_back(i, j);
        return out;
    }

    /// IS(node, group): same-action nodes on `group` whose conditions are
    /// jointly consistent with the node's.
    [[nodiscard]] const std::vector<std::size_t>* implication_set(std::size_t node, int group) const {
        for (const auto& [g, members] : implications_[node])
            if (g == group) return &members;
        return nullptr;
    }

    [[nodiscard]] std::optional<std::size_t> find(const CAENode& n) const {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i] == n) return i;
        return std::nullopt;
    }

    [[nodiscard]] int k() const noexcept { return k_; }

private:
    friend class ReachabilityEngine;

    void mark(std::size_t i, std::size_t j) {
        bits_[i][j >> 6] |= std::uint64_t{1} << (j & 63);
        bits_[j][i >> 6] |= std::uint64_t{1} << (i & 63);
    }

    int k_ = 1;
    std::vector<std::vector<std::uint64_t>> bits_;
    std::vector<std::vector<std::pair<int, std::vector<std::size_t>>>> implications_;
    // internal views
    std::vector<std::vector<int>> cond_ids_; // interned conditions
    std::vector<int> node_cond_;
    std::vector<std::vector<int>> node_effect_;
    std::vector<int> node_actor_;
    std::shared_ptr<const detail::LevelData> level_;
    std::shared_ptr<const detail::LiteralIndex> lits_;
};

/// Reachability engine over one MDP: alternates action and propositional
/// levels until two consecutive propositional levels coincide.
class ReachabilityEngine {
public:
    ReachabilityEngine(const FactoredMDP& mdp, int k, ReachOptions options = {})
        : mdp_(mdp), k_(k), options_(options), model_(compound_transform(mdp, options.max_compound)),
          lits_(std::make_shared<detail::LiteralIndex>(mdp)) {
        if (k < 1 || static_cast<std::size_t>(k) > std::max<std::size_t>(1, mdp.variables.size()))
            throw std::invalid_argument("k must lie in [1, number of variables]");
        for (const auto& a : model_.actions) {
            std::vector<std::vector<ConditionEffect>> per_group;
            for (const auto& g : a.groups) per_group.push_back(effect_table(g.cpt));
            tables_.push_back(std::move(per_group));
        }
    }

    [[nodiscard]] const CompoundModel& model() const noexcept { return model_; }
    [[nodiscard]] int k() const noexcept { return k_; }

    /// Level 0 from an initial condition.
    [[nodiscard]] ReachableSet initial_level(const InitialCondition& init) const {
        ReachableSet rs;
        rs.k = k_;
        rs.iterations = 1;
        if (const auto* s = std::get_if<State>(&init)) {
            for (std::size_t v = 0; v < s->size(); ++v) rs.values.push_back({static_cast<VarId>(v), (*s)[v]});
            return rs;
        }
        const auto& m = std::get<MultiStateInit>(init);
        rs.values = m.values;
        std::sort(rs.values.begin(), rs.values.end());
        rs.values.erase(std::unique(rs.values.begin(), rs.values.end()), rs.values.end());
        rs.excl = m.exclusions;
        for (auto& e : rs.excl) std::sort(e.begin(), e.end());
        rs.excl = minimal_constraints(std::move(rs.excl));
        return rs;
    }

    [[nodiscard]] ActionLevel build_action_level(const ReachableSet& level) const {
        return build_action_level(std::make_shared<const detail::LevelData>(to_data(level)));
    }

    [[nodiscard]] ReachableSet build_prop_level(const ActionLevel& al, std::uint64_t* candidates = nullptr) const {
        auto data = prop_level(al, candidates);
        auto rs = from_data(data);
        rs.k = k_;
        return rs;
    }

    /// Runs to the fixpoint. `on_level` sees each new propositional level.
    ReachableSet run(const InitialCondition& init,
                     const std::function<void(const LevelStats&, const ReachableSet&)>& on_level = {}) const {
        using clock = std::chrono::steady_clock;
        ReachableSet current = initial_level(init);
        auto data = std::make_shared<const detail::LevelData>(to_data(current));
        if (on_level) {
            LevelStats st;
            st.values = st.values_added = current.values.size();
            st.constraints = current.excl.size();
            on_level(st, current);
        }
        const int cap = 4 * (lits_->size() + static_cast<int>(current.excl.size())) + 16;
        for (int level = 1;; ++level) {
            if (level > cap) throw std::logic_error("reachability loop failed to reach a fixpoint");
            auto start = clock::now();
            auto al = build_action_level(data);
            std::uint64_t candidates = 0;
            auto next = std::make_shared<const detail::LevelData>(prop_level(al, &candidates));
            bool fixpoint = *next == *data;
            ReachableSet rs = from_data(*next);
            rs.k = k_;
            rs.iterations = level + 1;
            if (on_level) {
                LevelStats st;
                st.level = level;
                st.nodes = al.nodes.size();
                st.values = rs.values.size();
                st.values_added = rs.values.size() - std::min(rs.values.size(), current.values.size());
                st.constraints = rs.excl.size();
                st.candidates = candidates;
                st.seconds = std::chrono::duration<double>(clock::now() - start).count();
                on_level(st, rs);
            }
            current = std::move(rs);
            data = next;
            if (fixpoint) return current;
        }
    }

private:
    static std::vector<LiteralSet> minimal_constraints(std::vector<LiteralSet> cs) {
        std::sort(cs.begin(), cs.end(), [](const LiteralSet& a, const LiteralSet& b) {
            return a.size() != b.size() ? a.size() < b.size() : a < b;
        });
        std::vector<LiteralSet> kept;
        for (auto& c : cs) {
            bool redundant = std::any_of(kept.begin(), kept.end(), [&](const LiteralSet& k) {
                return std::includes(c.begin(), c.end(), k.begin(), k.end());
            });
            if (!redundant) kept.push_back(std::move(c));
        }
        std::sort(kept.begin(), kept.end());
        return kept;
    }

    [[nodiscard]] detail::LevelData to_data(const ReachableSet& rs) const {
        detail::LevelData d;
        d.has.assign(lits_->size(), 0);
        for (const auto& l : rs.values) d.has[lits_->id(l)] = 1;
        for (const auto& e : rs.excl) d.excl.push_back(lits_->ids(e));
        d.index(lits_->size());
        return d;
    }

    [[nodiscard]] ReachableSet from_data(const detail::LevelData& d) const {
        ReachableSet rs;
        for (int i = 0; i < lits_->size(); ++i)
            if (d.has[i]) rs.values.push_back(lits_->literal(i));
        for (const auto& e : d.excl) rs.excl.push_back(lits_->literals(e));
        return rs;
    }

    [[nodiscard]] ActionLevel build_action_level(std::shared_ptr<const detail::LevelData> level) const {
        const auto& lits = *lits_;
        ActionLevel al;
        al.k_ = k_;
        al.level_ = level;
        al.lits_ = lits_;

        std::map<std::vector<int>, int> interned;
        auto intern = [&](std::vector<int> c) {
            auto [it, inserted] = interned.emplace(c, static_cast<int>(al.cond_ids_.size()));
            if (inserted) al.cond_ids_.push_back(std::move(c));
            return it->second;
        };
        auto add_node = [&](CAENode n, int cond, std::vector<int> effect, int actor) {
            al.nodes.push_back(std::move(n));
            al.node_cond_.push_back(cond);
            al.node_effect_.push_back(std::move(effect));
            al.node_actor_.push_back(actor);
        };

        // (i) action nodes whose collapsed condition is consistent at the level
        std::vector<std::vector<std::vector<std::size_t>>> by_group(model_.actions.size());
        for (std::size_t a = 0; a < model_.actions.size(); ++a) {
            const auto& ta = model_.actions[a];
            by_group[a].resize(ta.groups.size());
            for (std::size_t g = 0; g < ta.groups.size(); ++g) {
                for (const auto& ce : tables_[a][g]) {
                    auto cids = lits.ids(ce.condition);
                    if (!level->consistent(cids, lits)) continue;
                    int cond = intern(std::move(cids));
                    for (ValueId e : ce.effects) {
                        CAENode n;
                        n.condition = ce.condition;
                        n.action = static_cast<int>(a);
                        n.group = static_cast<int>(g);
                        n.effect = ta.groups[g].var.split(e);
                        auto eids = lits.ids(n.effect);
                        by_group[a][g].push_back(al.nodes.size());
                        add_node(std::move(n), cond, std::move(eids), static_cast<int>(a));
                    }
                }
            }
        }
        // (ii) no-ops
        const int actors = static_cast<int>(model_.actions.size());
        for (int id = 0; id < lits.size(); ++id) {
            if (!level->has[id]) continue;
            CAENode n;
            n.condition = {lits.literal(id)};
            n.effect = n.condition;
            add_node(std::move(n), intern({id}), {id}, actors + id);
        }

        const std::size_t n = al.nodes.size();
        const std::size_t words = (n + 63) / 64;
        al.bits_.assign(n, std::vector<std::uint64_t>(words, 0));

        // pairwise consistency of interned conditions, memoised
        const std::size_t nc = al.cond_ids_.size();
        std::vector<signed char> pair_ok(nc * nc, -1);
        auto conds_consistent = [&](int a, int b) {
            auto& slot = pair_ok[static_cast<std::size_t>(a) * nc + b];
            if (slot < 0) {
                auto u = detail::sorted_union(al.cond_ids_[a], al.cond_ids_[b]);
                slot = static_cast<signed char>(level->consistent(u, lits));
                pair_ok[static_cast<std::size_t>(b) * nc + a] = slot;
            }
            return slot == 1;
        };

        // (iii) implication sets
        al.implications_.assign(n, {});
        for (std::size_t a = 0; a < by_group.size(); ++a)
            for (std::size_t g = 0; g < by_group[a].size(); ++g)
                for (std::size_t m : by_group[a][g])
                    for (std::size_t g2 = 0; g2 < by_group[a].size(); ++g2) {
                        if (g2 == g) continue;
                        std::vector<std::size_t> members;
                        for (std::size_t o : by_group[a][g2])
                            if (conds_consistent(al.node_cond_[m], al.node_cond_[o])) members.push_back(o);
                        al.implications_[m].emplace_back(static_cast<int>(g2), std::move(members));
                    }

        // (iv) clobbering and conflicting effects, (v) inconsistent condition pairs
        auto value_map = [&](const std::vector<int>& ids) {
            std::vector<std::pair<VarId, int>> m;
            for (int id : ids) m.emplace_back(lits.var(id), id);
            return m;
        };
        std::vector<std::vector<std::pair<VarId, int>>> cmap(n), emap(n);
        for (std::size_t i = 0; i < n; ++i) {
            cmap[i] = value_map(al.cond_ids_[al.node_cond_[i]]);
            emap[i] = value_map(al.node_effect_[i]);
        }
        auto conflicts = [](const std::vector<std::pair<VarId, int>>& x, const std::vector<std::pair<VarId, int>>& y) {
            // both sorted by literal id, hence by variable
            std::size_t i = 0, j = 0;
            while (i < x.size() && j < y.size()) {
                if (x[i].first < y[j].first) ++i;
                else if (y[j].first < x[i].first) ++j;
                else {
                    if (x[i].second != y[j].second) return true;
                    ++i;
                    ++j;
                }
            }
            return false;
        };
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                bool ex = conflicts(emap[i], emap[j]);
                if (!ex && al.node_actor_[i] != al.node_actor_[j])
                    ex = conflicts(emap[i], cmap[j]) || conflicts(emap[j], cmap[i]);
                if (!ex && k_ >= 2) ex = !conds_consistent(al.node_cond_[i], al.node_cond_[j]);
                if (ex) al.mark(i, j);
            }

        // (vi) propagate through implication sets
        std::vector<std::uint64_t> acc(words);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t m = 0; m < n; ++m) {
                for (const auto& [g2, members] : al.implications_[m]) {
                    std::fill(acc.begin(), acc.end(), ~std::uint64_t{0});
                    for (std::size_t o : members)
                        for (std::size_t w = 0; w < words; ++w) acc[w] &= al.bits_[o][w];
                    for (std::size_t w = 0; w < words; ++w) {
                        std::uint64_t fresh = acc[w] & ~al.bits_[m][w];
                        while (fresh) {
                            std::size_t bit = static_cast<std::size_t>(__builtin_ctzll(fresh));
                            fresh &= fresh - 1;
                            std::size_t other = w * 64 + bit;
                            if (other >= n || other == m) continue;
                            al.mark(m, other);
                            changed = true;
                        }
                    }
                }
            }
        }
        return al;
    }

    /// Searches for a jointly non-exclusive producer assignment for `set`.
    class ProducerSearch {
    public:
        ProducerSearch(const ActionLevel& al, const std::vector<std::vector<std::size_t>>& producers,
                       const detail::LiteralIndex& lits, int k, bool implied)
            : al_(al), producers_(producers), lits_(lits), k_(k), implied_(implied) {}

        bool achievable(std::span<const int> set) {
            set_ = set;
            chosen_.clear();
            return dfs(0);
        }

    private:
        [[nodiscard]] bool covered(int lit) const {
            for (auto c : chosen_)
                if (std::binary_search(al_.node_effect_[c].begin(), al_.node_effect_[c].end(), lit)) return true;
            return false;
        }

        [[nodiscard]] bool agrees(std::size_t node) const {
            for (int e : al_.node_effect_[node])
                for (int s : set_)
                    if (lits_.var(s) == lits_.var(e) && s != e) return false;
            return true;
        }

        [[nodiscard]] bool union_consistent() const {
            std::vector<int> u;
            for (auto c : chosen_) u = detail::sorted_union(u, al_.cond_ids_[al_.node_cond_[c]]);
            return al_.level_->consistent(u, lits_);
        }

        /// Every chosen action node implies one node per other effect group of
        /// its action; some member of each implication set must still fit
        /// alongside the chosen nodes (unless the group is already chosen).
        [[nodiscard]] bool implied_supported() const {
            std::vector<int> base;
            if (k_ >= 2)
                for (auto c : chosen_) base = detail::sorted_union(base, al_.cond_ids_[al_.node_cond_[c]]);
            for (auto m : chosen_) {
                const auto& node = al_.nodes[m];
                if (node.is_noop()) continue;
                for (const auto& [group, members] : al_.implications_[m]) {
                    bool present = std::any_of(chosen_.begin(), chosen_.end(), [&](std::size_t c) {
                        return al_.nodes[c].action == node.action && al_.nodes[c].group == group;
                    });
                    if (present) continue;
                    bool found = false;
                    for (auto n : members) {
                        bool clash = std::any_of(chosen_.begin(), chosen_.end(),
                                                 [&](std::size_t c) { return al_.exclusive(n, c); });
                        if (clash) continue;
                        if (k_ >= 2) {
                            auto u = detail::sorted_union(base, al_.cond_ids_[al_.node_cond_[n]]);
                            if (!al_.level_->consistent(u, lits_)) continue;
                        }
                        found = true;
                        break;
                    }
                    if (!found) return false;
                }
            }
            return true;
        }

        bool dfs(std::size_t i) {
            if (i == set_.size()) return true;
            int lit = set_[i];
            if (covered(lit)) return dfs(i + 1);
            for (std::size_t p : producers_[lit]) {
                if (!agrees(p)) continue;
                bool clash = false;
                for (auto c : chosen_)
                    if (al_.exclusive(p, c)) {
                        clash = true;
                        break;
                    }
                if (clash) continue;
                chosen_.push_back(p);
                bool ok = k_ < 2 || chosen_.size() < 3 || union_consistent();
                ok = ok && (!implied_ || implied_supported());
                if (ok && dfs(i + 1)) return true;
                chosen_.pop_back();
            }
            return false;
        }

        const ActionLevel& al_;
        const std::vector<std::vector<std::size_t>>& producers_;
        const detail::LiteralIndex& lits_;
        int k_;
        bool implied_;
        std::span<const int> set_;
        std::vector<std::size_t> chosen_;
    };

    [[nodiscard]] detail::LevelData prop_level(const ActionLevel& al, std::uint64_t* candidates_out) const {
        const auto& lits = *lits_;
        const int L = lits.size();
        detail::LevelData out;
        out.has.assign(L, 0);
        std::vector<std::vector<std::size_t>> producers(L);
        for (std::size_t i = 0; i < al.nodes.size(); ++i)
            for (int e : al.node_effect_[i]) {
                out.has[e] = 1;
                producers[e].push_back(i);
            }

        std::vector<int> present;
        for (int i = 0; i < L; ++i)
            if (out.has[i]) present.push_back(i);

        // constraints found so far, keyed by their largest literal
        std::vector<std::vector<int>> by_last(L);
        std::uint64_t candidates = 0;
        const std::size_t chunk_limit = 1 << 16;

        for (int size = 2; size <= k_; ++size) {
            std::vector<int> prefix;
            std::vector<char> var_used(lits.variable_count(), 0);
            std::vector<int> chunk; // flattened candidates, `size` ids each
            std::vector<std::vector<int>> found_this_size;

            auto flush = [&] {
                std::size_t count = chunk.size() / size;
                std::vector<char> excluded(count, 0);
                detail::parallel_chunks(count, options_.threads, [&](std::size_t b, std::size_t e) {
                    ProducerSearch search(al, producers, lits, k_, options_.implied_effects);
                    for (std::size_t c = b; c < e; ++c)
                        excluded[c] = !search.achievable(std::span<const int>(chunk.data() + c * size, size));
                });
                for (std::size_t c = 0; c < count; ++c)
                    if (excluded[c]) found_this_size.emplace_back(chunk.begin() + c * size, chunk.begin() + (c + 1) * size);
                chunk.clear();
            };

            auto contains_found = [&](int last) {
                for (int ci : by_last[last]) {
                    const auto& c = out.excl[ci];
                    bool all = std::all_of(c.begin(), c.end() - 1, [&](int x) {
                        return std::binary_search(prefix.begin(), prefix.end(), x);
                    });
                    if (all) return true;
                }
                return false;
            };

            auto gen = [&](auto&& self, std::size_t from) -> void {
                if (static_cast<int>(prefix.size()) == size) {
                    if (++candidates > options_.max_candidates)
                        throw CapacityError("exclusion search exceeded the budget of " +
                                            std::to_string(options_.max_candidates) + " candidate sets");
                    chunk.insert(chunk.end(), prefix.begin(), prefix.end());
                    if (chunk.size() >= chunk_limit * size) flush();
                    return;
                }
                for (std::size_t i = from; i < present.size(); ++i) {
                    int id = present[i];
                    if (var_used[lits.var(id)]) continue;
                    if (present.size() - i < static_cast<std::size_t>(size) - prefix.size()) break;
                    prefix.push_back(id);
                    if (!contains_found(id)) {
                        var_used[lits.var(id)] = 1;
                        self(self, i + 1);
                        var_used[lits.var(id)] = 0;
                    }
                    prefix.pop_back();
                }
            };
            gen(gen, 0);
            flush();
            for (auto& c : found_this_size) {
                by_last[c.back()].push_back(static_cast<int>(out.excl.size()));
                out.excl.push_back(std::move(c));
            }
        }
        if (candidates_out) *candidates_out = candidates;
        out.index(L);
        return out;
    }

    const FactoredMDP& mdp_;
    int k_;
    ReachOptions options_;
    CompoundModel model_;
    std::shared_ptr<const detail::LiteralIndex> lits_;
    std::vector<std::vector<std::vector<ConditionEffect>>> tables_;
};

/// Reachable literals and exclusion constraints of arity <= k for `mdp` from `init`.
inline ReachableSet reachable_k(const FactoredMDP& mdp, const InitialCondition& init, int k, ReachOptions options = {},
                                const std::function<void(const LevelStats&, const ReachableSet&)>& on_level = {}) {
    return ReachabilityEngine(mdp, k, options).run(init, on_level);
}

} // namespace sreach
