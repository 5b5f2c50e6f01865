#pragma once

#include "sreach/count.hpp"
#include "sreach/model.hpp"
#include "sreach/reach.hpp"
#include "sreach/sexpr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace sreach {

inline constexpr std::uint64_t kDefaultMaxStates = std::uint64_t{1} << 22;

/// All states, or all states consistent with `rs`, in canonical order.
inline std::vector<State> enumerate_states(const FactoredMDP& mdp, const ReachableSet* rs = nullptr,
                                          std::uint64_t max_states = kDefaultMaxStates) {
    BigCount total = rs ? count_consistent(*rs, mdp) : state_count(mdp);
    if (total > max_states)
        throw CapacityError("state enumeration needs " + total.str() + " states, above the cap of " +
                            std::to_string(max_states));
    const std::size_t n = mdp.variables.size();
    std::vector<std::vector<ValueId>> allowed(n);
    for (std::size_t v = 0; v < n; ++v)
        for (std::size_t x = 0; x < mdp.variables[v].domain_size(); ++x)
            if (!rs || std::binary_search(rs->values.begin(), rs->values.end(),
                                          Literal{static_cast<VarId>(v), static_cast<ValueId>(x)}))
                allowed[v].push_back(static_cast<ValueId>(x));
    // constraints checked once their last variable is assigned
    std::vector<std::vector<const LiteralSet*>> ending(n);
    if (rs)
        for (const auto& ex : rs->excl)
            if (!ex.empty()) ending[ex.back().var].push_back(&ex);

    std::vector<State> out;
    out.reserve(static_cast<std::size_t>(total));
    State cur(std::vector<ValueId>(n, 0));
    auto rec = [&](auto&& self, std::size_t v) -> void {
        if (v == n) {
            out.push_back(cur);
            return;
        }
        for (ValueId x : allowed[v]) {
            cur[v] = x;
            bool hit = std::any_of(ending[v].begin(), ending[v].end(), [&](const LiteralSet* ex) {
                return std::all_of(ex->begin(), ex->end(), [&](const Literal& l) { return cur[l.var] == l.value; });
            });
            if (!hit) self(self, v + 1);
        }
    };
    rec(rec, 0);
    return out;
}

struct SolveOptions {
    std::optional<double> beta; // defaults to the model's discount
    double tol = 1e-9;
    std::size_t max_sweeps = 1'000'000;
    unsigned threads = 1;
};

struct Solution {
    double beta = 0.9;
    double tol = 1e-9;
    std::vector<State> states;
    std::vector<double> values;
    std::vector<std::size_t> policy; // action index per state
    std::vector<double> residuals;   // max-norm change of each sweep
    std::size_t sweeps = 0;

    [[nodiscard]] std::optional<std::size_t> index_of(const State& s) const {
        auto it = std::lower_bound(states.begin(), states.end(), s);
        if (it == states.end() || *it != s) return std::nullopt;
        return static_cast<std::size_t>(it - states.begin());
    }

    [[nodiscard]] std::optional<double> value(const State& s) const {
        auto i = index_of(s);
        if (!i) return std::nullopt;
        return values[*i];
    }
};

/// Guaranteed distance to the optimum after convergence: tol * beta / (1 - beta).
inline double value_error_bound(double beta, double tol) { return beta >= 1.0 ? INFINITY : tol * beta / (1.0 - beta); }

namespace detail {

struct Transition {
    std::uint32_t target;
    double prob;
};

/// Successor table over a closed, canonically ordered state set.
class ExplicitModel {
public:
    ExplicitModel(const FactoredMDP& mdp, const std::vector<State>& states) : states_(states) {
        if (!std::is_sorted(states.begin(), states.end()))
            throw std::invalid_argument("states must be in canonical order");
        rewards_.reserve(states.size());
        offsets_.push_back(0);
        for (std::size_t s = 0; s < states.size(); ++s) {
            rewards_.push_back(eval_reward(mdp, states[s]));
            for (const auto& a : mdp.actions) {
                for (const auto& [t, p] : transition_distribution(mdp, states[s], a)) {
                    auto it = std::lower_bound(states.begin(), states.end(), t);
                    if (it == states.end() || *it != t)
                        throw ClosureError("state " + state_name(mdp, states[s]) + " reaches " + state_name(mdp, t) +
                                           " under action " + a.name + ", outside the solved state set");
                    edges_.push_back({static_cast<std::uint32_t>(it - states.begin()), p});
                }
                offsets_.push_back(edges_.size());
            }
        }
        actions_ = mdp.actions.size();
    }

    [[nodiscard]] std::size_t size() const noexcept { return states_.size(); }
    [[nodiscard]] std::size_t actions() const noexcept { return actions_; }
    [[nodiscard]] double reward(std::size_t s) const { return rewards_[s]; }

    /// Sum_t Pr(s,a,t) V(t), summed in canonical successor order.
    [[nodiscard]] double expect(std::size_t s, std::size_t a, const std::vector<double>& v) const {
        std::size_t slot = s * actions_ + a;
        double acc = 0.0;
        for (std::size_t e = offsets_[slot]; e < offsets_[slot + 1]; ++e) acc += edges_[e].prob * v[edges_[e].target];
        return acc;
    }

private:
    const std::vector<State>& states_;
    std::vector<double> rewards_;
    std::vector<std::size_t> offsets_;
    std::vector<Transition> edges_;
    std::size_t actions_ = 0;
};

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
    if (threads <= 1 || n < 4096) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        std::size_t b = t * chunk, e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] {
            for (std::size_t i = b; i < e; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline double resolve_beta(const FactoredMDP& mdp, const SolveOptions& o) {
    double beta = o.beta.value_or(mdp.discount);
    if (!(beta >= 0.0 && beta < 1.0)) throw std::invalid_argument("discount must satisfy 0 <= beta < 1");
    if (!(o.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
    return beta;
}

} // namespace detail

/// Value iteration over `states` (canonical order, closed under every action).
/// Jacobi sweeps from V0 = R until the max-norm change is at most tol; the
/// greedy policy takes the first action in declaration order among ties.
inline Solution value_iteration(const FactoredMDP& mdp, const std::vector<State>& states, const SolveOptions& opts = {}) {
    Solution sol;
    sol.beta = detail::resolve_beta(mdp, opts);
    sol.tol = opts.tol;
    sol.states = states;
    detail::ExplicitModel model(mdp, sol.states);
    const std::size_t n = model.size();
    std::vector<double> v(n), next(n);
    for (std::size_t s = 0; s < n; ++s) v[s] = model.reward(s);
    for (;;) {
        if (sol.sweeps >= opts.max_sweeps) throw std::runtime_error("value iteration did not converge");
        detail::parallel_for(n, opts.threads, [&](std::size_t s) {
            double best = -INFINITY;
            for (std::size_t a = 0; a < model.actions(); ++a) best = std::max(best, model.expect(s, a, v));
            next[s] = model.reward(s) + sol.beta * best;
        });
        double delta = 0.0;
        for (std::size_t s = 0; s < n; ++s) delta = std::max(delta, std::fabs(next[s] - v[s]));
        v.swap(next);
        ++sol.sweeps;
        sol.residuals.push_back(delta);
        if (delta <= opts.tol) break;
    }
    sol.values = v;
    sol.policy.assign(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        double best = -INFINITY;
        for (std::size_t a = 0; a < model.actions(); ++a) {
            double q = model.expect(s, a, v);
            if (q > best) {
                best = q;
                sol.policy[s] = a;
            }
        }
    }
    return sol;
}

/// Value of a fixed policy (action index per state) by iterating its backup to tol.
inline std::vector<double> policy_value(const FactoredMDP& mdp, const std::vector<State>& states,
                                        const std::vector<std::size_t>& policy, const SolveOptions& opts = {}) {
    double beta = detail::resolve_beta(mdp, opts);
    detail::ExplicitModel model(mdp, states);
    const std::size_t n = model.size();
    if (policy.size() != n) throw std::invalid_argument("policy size does not match the state set");
    for (auto a : policy)
        if (a >= model.actions()) throw std::invalid_argument("policy names an unknown action");
    std::vector<double> v(n), next(n);
    for (std::size_t s = 0; s < n; ++s) v[s] = model.reward(s);
    for (std::size_t sweep = 0;; ++sweep) {
        if (sweep >= opts.max_sweeps) throw std::runtime_error("policy evaluation did not converge");
        detail::parallel_for(n, opts.threads,
                             [&](std::size_t s) { next[s] = model.reward(s) + beta * model.expect(s, policy[s], v); });
        double delta = 0.0;
        for (std::size_t s = 0; s < n; ++s) delta = std::max(delta, std::fabs(next[s] - v[s]));
        v.swap(next);
        if (delta <= opts.tol) break;
    }
    return v;
}

inline std::string serialize_solution(const FactoredMDP& mdp, const Solution& sol) {
    std::string out = "(solution (beta " + sexpr::format_real(sol.beta) + ") (tol " + sexpr::format_real(sol.tol) + ")";
    for (std::size_t i = 0; i < sol.states.size(); ++i) {
        out += "\n  (state";
        for (std::size_t v = 0; v < mdp.variables.size(); ++v)
            out += " (" + mdp.variables[v].name + " " + mdp.variables[v].values[sol.states[i][v]] + ")";
        out += " (value " + sexpr::format_real(sol.values[i]) + ") (action " + mdp.actions[sol.policy[i]].name + "))";
    }
    return out + ")\n";
}

} // namespace sreach
