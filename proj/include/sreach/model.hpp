#pragma once

#include "sreach/errors.hpp"
#include "sreach/tree.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace sreach {

using BigCount = boost::multiprecision::cpp_int;

struct Variable {
    std::string name;
    std::vector<std::string> values;

    [[nodiscard]] std::size_t domain_size() const noexcept { return values.size(); }

    [[nodiscard]] std::optional<ValueId> find_value(std::string_view v) const {
        for (std::size_t i = 0; i < values.size(); ++i)
            if (values[i] == v) return static_cast<ValueId>(i);
        return std::nullopt;
    }

    bool operator==(const Variable&) const = default;
};

/// A variable/value pair. Ordering is canonical: variable declaration order, then domain order.
struct Literal {
    VarId var = 0;
    ValueId value = 0;

    auto operator<=>(const Literal&) const = default;
};

using LiteralSet = std::vector<Literal>; // kept sorted

/// Post-action distribution of one variable, indexed by its value.
struct Distribution {
    std::vector<double> prob;

    [[nodiscard]] double sum() const {
        double s = 0.0;
        for (double p : prob) s += p;
        return s;
    }

    /// Values with strictly positive probability.
    [[nodiscard]] std::vector<ValueId> support() const {
        std::vector<ValueId> out;
        for (std::size_t i = 0; i < prob.size(); ++i)
            if (prob[i] > 0.0) out.push_back(static_cast<ValueId>(i));
        return out;
    }

    static Distribution point(std::size_t domain, ValueId v) {
        Distribution d;
        d.prob.assign(domain, 0.0);
        d.prob[v] = 1.0;
        return d;
    }

    bool operator==(const Distribution&) const = default;
};

using CptTree = DecisionTree<Distribution>;
using RewardTree = DecisionTree<double>;

/// An action's DBN: one CPT per affected variable. Absent variables persist.
struct ActionSpec {
    std::string name;
    std::map<VarId, CptTree> effects;

    bool operator==(const ActionSpec&) const = default;
};

/// Total assignment, one value per variable in declaration order.
class State {
public:
    State() = default;
    explicit State(std::vector<ValueId> values) : values_(std::move(values)) {}

    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    ValueId operator[](std::size_t i) const { return values_[i]; }
    ValueId& operator[](std::size_t i) { return values_[i]; }
    [[nodiscard]] const std::vector<ValueId>& values() const noexcept { return values_; }

    [[nodiscard]] bool contains(const Literal& l) const { return l.var < values_.size() && values_[l.var] == l.value; }

    auto operator<=>(const State&) const = default;

private:
    std::vector<ValueId> values_;
};

/// Several possible initial states: reachable-value seeds plus exclusions.
struct MultiStateInit {
    LiteralSet values;
    std::vector<LiteralSet> exclusions;

    bool operator==(const MultiStateInit&) const = default;
};

using InitialCondition = std::variant<State, MultiStateInit>;

struct FactoredMDP {
    std::vector<Variable> variables;
    std::vector<ActionSpec> actions;
    RewardTree reward;
    double discount = 0.9;
    std::optional<InitialCondition> init;

    [[nodiscard]] std::optional<VarId> find_variable(std::string_view name) const {
        for (std::size_t i = 0; i < variables.size(); ++i)
            if (variables[i].name == name) return static_cast<VarId>(i);
        return std::nullopt;
    }

    [[nodiscard]] std::optional<std::size_t> find_action(std::string_view name) const {
        for (std::size_t i = 0; i < actions.size(); ++i)
            if (actions[i].name == name) return i;
        return std::nullopt;
    }

    [[nodiscard]] std::size_t literal_count() const {
        std::size_t n = 0;
        for (const auto& v : variables) n += v.domain_size();
        return n;
    }

    bool operator==(const FactoredMDP&) const = default;
};

// ---------------------------------------------------------------------------

inline BigCount state_count(const FactoredMDP& mdp) {
    BigCount n = 1;
    for (const auto& v : mdp.variables) n *= v.domain_size();
    return n;
}

/// Mixed-radix encoding of states; the first variable is most significant,
/// so code order equals canonical state order.
class StateIndexer {
public:
    explicit StateIndexer(const FactoredMDP& mdp) {
        radix_.reserve(mdp.variables.size());
        std::uint64_t total = 1;
        for (const auto& v : mdp.variables) {
            auto r = static_cast<std::uint64_t>(v.domain_size());
            if (r != 0 && total > std::numeric_limits<std::uint64_t>::max() / r)
                throw CapacityError("state space does not fit a 64-bit index");
            total *= r;
            radix_.push_back(r);
        }
        total_ = total;
    }

    [[nodiscard]] std::uint64_t size() const noexcept { return total_; }

    [[nodiscard]] std::uint64_t encode(const State& s) const {
        std::uint64_t code = 0;
        for (std::size_t i = 0; i < radix_.size(); ++i) code = code * radix_[i] + s[i];
        return code;
    }

    [[nodiscard]] State decode(std::uint64_t code) const {
        std::vector<ValueId> v(radix_.size());
        for (std::size_t i = radix_.size(); i-- > 0;) {
            v[i] = static_cast<ValueId>(code % radix_[i]);
            code /= radix_[i];
        }
        return State(std::move(v));
    }

private:
    std::vector<std::uint64_t> radix_;
    std::uint64_t total_ = 1;
};

inline double eval_reward(const FactoredMDP& mdp, const State& s) {
    auto lookup = [&](VarId v) { return s[v]; };
    return evaluate(mdp.reward, lookup, lookup);
}

/// Affected variables of `a` in an order where every post-action test refers
/// to an earlier variable. Ties follow canonical variable order. Empty optional
/// if the intra-slice graph is cyclic.
inline std::optional<std::vector<VarId>> post_dependency_order(const ActionSpec& a) {
    std::map<VarId, std::vector<VarId>> deps;
    for (const auto& [var, cpt] : a.effects) {
        auto& d = deps[var];
        for_each_split(cpt, [&](VarId tested, bool post) {
            if (post && std::find(d.begin(), d.end(), tested) == d.end()) d.push_back(tested);
        });
    }
    std::vector<VarId> order;
    std::map<VarId, bool> done;
    for (const auto& [var, _] : a.effects) done[var] = false;
    while (order.size() < a.effects.size()) {
        bool progressed = false;
        for (auto& [var, finished] : done) {
            if (finished) continue;
            bool ready = std::all_of(deps[var].begin(), deps[var].end(), [&](VarId d) {
                auto it = done.find(d);
                return it == done.end() || it->second;
            });
            if (ready) {
                finished = true;
                order.push_back(var);
                progressed = true;
                break;
            }
        }
        if (!progressed) return std::nullopt;
    }
    return order;
}

/// Successor distribution of `a` in `s`. Affected variables are enumerated in
/// dependency order so post-action tests see already-chosen successor values.
/// Only positive-probability successors are returned, sorted canonically.
inline std::vector<std::pair<State, double>> transition_distribution([[maybe_unused]] const FactoredMDP& mdp,
                                                                     const State& s, const ActionSpec& a) {
    std::vector<std::pair<State, double>> out;
    if (a.effects.empty()) {
        out.emplace_back(s, 1.0);
        return out;
    }
    auto order = post_dependency_order(a);
    if (!order) throw ValidationError("action '" + a.name + "' has cyclic post-action dependencies");

    State next = s;
    auto pre = [&](VarId v) { return s[v]; };
    auto post = [&](VarId v) { return next[v]; };
    auto rec = [&](auto&& self, std::size_t i, double p) -> void {
        if (i == order->size()) {
            out.emplace_back(next, p);
            return;
        }
        VarId var = (*order)[i];
        const auto& dist = evaluate(a.effects.at(var), pre, post);
        for (std::size_t v = 0; v < dist.prob.size(); ++v) {
            if (dist.prob[v] <= 0.0) continue;
            next[var] = static_cast<ValueId>(v);
            self(self, i + 1, p * dist.prob[v]);
        }
        next[var] = s[var];
    };
    rec(rec, 0, 1.0);
    std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    return out;
}

/// All states satisfying an initial condition, in canonical order.
inline std::vector<State> initial_states(const FactoredMDP& mdp, const InitialCondition& init) {
    if (const auto* s = std::get_if<State>(&init)) return {*s};
    const auto& multi = std::get<MultiStateInit>(init);
    std::vector<std::vector<ValueId>> allowed(mdp.variables.size());
    for (const auto& l : multi.values) allowed[l.var].push_back(l.value);
    for (auto& a : allowed) std::sort(a.begin(), a.end());
    std::vector<State> out;
    State cur(std::vector<ValueId>(mdp.variables.size(), 0));
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == allowed.size()) {
            for (const auto& ex : multi.exclusions)
                if (std::all_of(ex.begin(), ex.end(), [&](const Literal& l) { return cur.contains(l); })) return;
            out.push_back(cur);
            return;
        }
        for (ValueId v : allowed[i]) {
            cur[i] = v;
            self(self, i + 1);
        }
    };
    rec(rec, 0);
    return out;
}

inline std::string literal_name(const FactoredMDP& mdp, const Literal& l) {
    return mdp.variables[l.var].name + "=" + mdp.variables[l.var].values[l.value];
}

inline std::string state_name(const FactoredMDP& mdp, const State& s) {
    std::string out = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ' ';
        out += mdp.variables[i].values[s[i]];
    }
    return out + ")";
}

} // namespace sreach

template <>
struct std::hash<sreach::State> {
    std::size_t operator()(const sreach::State& s) const noexcept {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (auto v : s.values()) h = (h ^ v) * 0x100000001b3ULL;
        return h;
    }
};
