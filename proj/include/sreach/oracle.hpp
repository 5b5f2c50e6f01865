#pragma once

#include "sreach/count.hpp"
#include "sreach/reach.hpp"
#include "sreach/sexpr.hpp"
#include "sreach/solve.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sreach {

/// Every state reachable from `init` through positive-probability transitions,
/// in breadth-first discovery order (actions in declaration order, successors
/// in canonical order).
inline std::vector<State> bfs_reachable(const FactoredMDP& mdp, const InitialCondition& init,
                                        std::uint64_t max_states = kDefaultMaxStates) {
    if (state_count(mdp) > max_states)
        throw CapacityError("explicit search needs " + state_count(mdp).str() + " states, above the cap of " +
                            std::to_string(max_states));
    StateIndexer index(mdp);
    std::vector<bool> seen(index.size(), false);
    std::vector<State> order;
    std::size_t head = 0;
    auto visit = [&](const State& s) {
        auto code = index.encode(s);
        if (seen[code]) return;
        seen[code] = true;
        order.push_back(s);
    };
    for (const auto& s : initial_states(mdp, init)) visit(s);
    while (head < order.size()) {
        State s = order[head++];
        for (const auto& a : mdp.actions)
            for (const auto& [t, p] : transition_distribution(mdp, s, a)) visit(t);
    }
    return order;
}

inline std::vector<State> sorted_states(std::vector<State> s) {
    std::sort(s.begin(), s.end());
    return s;
}

/// Oracle-reachable states that `rs` declares inconsistent.
inline std::vector<State> check_soundness(const FactoredMDP& mdp, const InitialCondition& init, const ReachableSet& rs,
                                          std::uint64_t max_states = kDefaultMaxStates) {
    std::vector<State> bad;
    for (const auto& s : sorted_states(bfs_reachable(mdp, init, max_states)))
        if (!state_consistent(rs, s)) bad.push_back(s);
    return bad;
}

struct CompletenessResult {
    BigCount gap = 0;           // consistent states the oracle never reaches
    std::vector<State> samples; // first few of them, canonical order
};

inline CompletenessResult check_completeness(const FactoredMDP& mdp, const InitialCondition& init,
                                             const ReachableSet& rs, std::uint64_t max_states = kDefaultMaxStates,
                                             std::size_t max_samples = 10) {
    auto reach = sorted_states(bfs_reachable(mdp, init, max_states));
    CompletenessResult out;
    for (const auto& s : enumerate_states(mdp, &rs, max_states)) {
        if (std::binary_search(reach.begin(), reach.end(), s)) continue;
        out.gap += 1;
        if (out.samples.size() < max_samples) out.samples.push_back(s);
    }
    return out;
}

struct ValuePreservation {
    bool closed = true;      // false: the restricted state set is not closed (rs unsound)
    std::string closure_error;
    double max_discrepancy = 0.0;
    double bound = 0.0;      // 2 * tol * beta / (1 - beta)
};

/// Solves the full model and the model restricted to `rs`-consistent states,
/// and compares values on every oracle-reachable state.
inline ValuePreservation check_value_preservation(const FactoredMDP& mdp, const InitialCondition& init,
                                                  const ReachableSet& rs, const SolveOptions& opts = {},
                                                  std::uint64_t max_states = kDefaultMaxStates) {
    ValuePreservation out;
    double beta = opts.beta.value_or(mdp.discount);
    out.bound = 2.0 * value_error_bound(beta, opts.tol);
    auto full = value_iteration(mdp, enumerate_states(mdp, nullptr, max_states), opts);
    Solution restricted;
    try {
        restricted = value_iteration(mdp, enumerate_states(mdp, &rs, max_states), opts);
    } catch (const ClosureError& e) {
        out.closed = false;
        out.closure_error = e.what();
        return out;
    }
    for (const auto& s : bfs_reachable(mdp, init, max_states)) {
        auto a = full.value(s);
        auto b = restricted.value(s);
        if (!a || !b) {
            out.closed = false;
            out.closure_error = "reachable state " + state_name(mdp, s) + " missing from the restricted state set";
            return out;
        }
        out.max_discrepancy = std::max(out.max_discrepancy, std::fabs(*a - *b));
    }
    return out;
}

struct VerifyOptions {
    std::vector<int> ks{1, 2};
    ReachOptions reach;
    SolveOptions solve;
    std::uint64_t max_states = kDefaultMaxStates;
    bool check_values = true;
    bool check_levels = true;
};

struct KResult {
    int k = 0;
    ReachableSet rs;
    BigCount consistent = 0;
    std::vector<State> soundness_violations;
    CompletenessResult completeness;
    bool levels_monotone = true;
    std::optional<ValuePreservation> values;
};

/// Result of the full check battery on one instance.
struct VerificationReport {
    std::string instance;
    std::size_t oracle_size = 0;
    std::vector<KResult> runs;
    bool sound = true;
    bool monotone = true;        // consistent sets nested, decreasing in k
    bool levels_monotone = true; // each level's consistent set contains the previous one
    bool values_preserved = true;
    double value_discrepancy = 0.0;

    [[nodiscard]] bool passed() const { return sound && monotone && levels_monotone && values_preserved; }
};

namespace detail {

inline bool subset_of(const std::vector<State>& a, const std::vector<State>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

} // namespace detail

/// Verifies one instance given reachable sets (one per k, any order).
inline VerificationReport verify_sets(const FactoredMDP& mdp, const InitialCondition& init,
                                      std::vector<ReachableSet> sets, const VerifyOptions& opts,
                                      std::string instance = "") {
    VerificationReport rep;
    rep.instance = std::move(instance);
    auto oracle = sorted_states(bfs_reachable(mdp, init, opts.max_states));
    rep.oracle_size = oracle.size();
    std::sort(sets.begin(), sets.end(), [](const ReachableSet& a, const ReachableSet& b) { return a.k < b.k; });
    std::vector<std::vector<State>> consistent;
    for (auto& rs : sets) {
        KResult r;
        r.k = rs.k;
        r.consistent = count_consistent(rs, mdp);
        for (const auto& s : oracle)
            if (!state_consistent(rs, s)) r.soundness_violations.push_back(s);
        r.completeness = check_completeness(mdp, init, rs, opts.max_states);
        consistent.push_back(enumerate_states(mdp, &rs, opts.max_states));
        if (!r.soundness_violations.empty()) rep.sound = false;
        if (opts.check_values) {
            r.values = check_value_preservation(mdp, init, rs, opts.solve, opts.max_states);
            if (!r.values->closed) {
                rep.sound = false;
                rep.values_preserved = false;
            } else {
                rep.value_discrepancy = std::max(rep.value_discrepancy, r.values->max_discrepancy);
                if (r.values->max_discrepancy > r.values->bound + 1e-12) rep.values_preserved = false;
            }
        }
        r.rs = std::move(rs);
        rep.runs.push_back(std::move(r));
    }
    for (std::size_t i = 1; i < consistent.size(); ++i)
        if (rep.runs[i].k > rep.runs[i - 1].k && !detail::subset_of(consistent[i], consistent[i - 1]))
            rep.monotone = false;
    return rep;
}

/// Runs the reachability analysis for every k in `opts.ks` and verifies the results:
/// soundness, monotonicity in k, growth across levels, completeness gaps, values.
inline VerificationReport verify_instance(const FactoredMDP& mdp, const InitialCondition& init,
                                          const VerifyOptions& opts, std::string instance = "") {
    std::vector<ReachableSet> sets;
    std::vector<bool> level_ok;
    for (int k : opts.ks) {
        bool ok = true;
        std::vector<State> previous;
        bool have_previous = false;
        auto on_level = [&](const LevelStats&, const ReachableSet& level) {
            if (!opts.check_levels) return;
            auto states = enumerate_states(mdp, &level, opts.max_states);
            if (have_previous && !detail::subset_of(previous, states)) ok = false;
            previous = std::move(states);
            have_previous = true;
        };
        sets.push_back(reachable_k(mdp, init, k, opts.reach, on_level));
        level_ok.push_back(ok);
    }
    auto rep = verify_sets(mdp, init, std::move(sets), opts, std::move(instance));
    for (auto& r : rep.runs) {
        auto pos = std::find(opts.ks.begin(), opts.ks.end(), r.k) - opts.ks.begin();
        r.levels_monotone = level_ok[static_cast<std::size_t>(pos)];
        if (!r.levels_monotone) rep.levels_monotone = false;
    }
    return rep;
}

inline std::string serialize_verification(const FactoredMDP& mdp, const VerificationReport& rep) {
    auto flag = [](bool b) { return std::string(b ? "pass" : "fail"); };
    std::string out = "(verification";
    if (!rep.instance.empty()) out += " (instance \"" + rep.instance + "\")";
    out += "\n  (oracle-size " + std::to_string(rep.oracle_size) + ")";
    for (const auto& r : rep.runs) {
        out += "\n  (run (k " + std::to_string(r.k) + ") (iterations " + std::to_string(r.rs.iterations) + ")";
        out += " (constraints " + std::to_string(r.rs.excl.size()) + ")";
        out += " (consistent " + r.consistent.str() + ")";
        out += " (gap " + r.completeness.gap.str() + ")";
        out += " (soundness-violations";
        for (const auto& s : r.soundness_violations) out += " " + state_name(mdp, s);
        out += ")";
        if (!r.completeness.samples.empty()) {
            out += " (gap-samples";
            for (const auto& s : r.completeness.samples) out += " " + state_name(mdp, s);
            out += ")";
        }
        if (r.values) {
            if (r.values->closed) out += " (value-discrepancy " + sexpr::format_real(r.values->max_discrepancy) + ")";
            else out += " (closure-violation \"" + r.values->closure_error + "\")";
        }
        out += ")";
    }
    out += "\n  (soundness " + flag(rep.sound) + ")";
    out += "\n  (monotonicity " + flag(rep.monotone) + ")";
    out += "\n  (level-monotonicity " + flag(rep.levels_monotone) + ")";
    out += "\n  (value-preservation " + flag(rep.values_preserved) + ")";
    out += "\n  (max-value-discrepancy " + sexpr::format_real(rep.value_discrepancy) + ")";
    out += "\n  (result " + flag(rep.passed()) + "))\n";
    return out;
}

} // namespace sreach
