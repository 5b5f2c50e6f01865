#pragma once

#include "sreach/sreach.hpp"

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace fixtures {

using namespace sreach;

/// Assembly step with correlated effects: success sets Asm6 and uses up both
/// ready parts in the same transition.
inline const char* kAssembly = R"(
(mdp
  (discount 0.9)
  (variables (Asm6 (vals F T)) (Rdy4 (vals F T)) (Rdy5 (vals F T)))
  (action assemble
    (effect Asm6
      (split Rdy4
        (case F (split Asm6 (case F (dist (F 1))) (case T (dist (T 1)))))
        (case T (split Rdy5
                  (case F (split Asm6 (case F (dist (F 1))) (case T (dist (T 1)))))
                  (case T (split Asm6 (case F (dist (T 0.8) (F 0.2))) (case T (dist (T 1)))))))))
    (effect Rdy4
      (split (post Asm6)
        (case F (split Rdy4 (case F (dist (F 1))) (case T (dist (T 1)))))
        (case T (split Asm6 (case F (dist (F 1)))
                            (case T (split Rdy4 (case F (dist (F 1))) (case T (dist (T 1)))))))))
    (effect Rdy5
      (split (post Asm6)
        (case F (split Rdy5 (case F (dist (F 1))) (case T (dist (T 1)))))
        (case T (split Asm6 (case F (dist (F 1)))
                            (case T (split Rdy5 (case F (dist (F 1))) (case T (dist (T 1))))))))))
  (action prepare
    (effect Rdy4 (dist (T 1)))
    (effect Rdy5 (split Rdy4 (case F (dist (F 1))) (case T (dist (T 0.5) (F 0.5))))))
  (reward (split Asm6 (case F (val 0)) (case T (val 10))))
  (init (Asm6 F) (Rdy4 F) (Rdy5 F)))
)";

/// Drilling domain in the style of a reward tree where both parts must be
/// drilled to pay off, worth less if the bit is worn.
inline const char* kDrill = R"(
(mdp
  (discount 0.9)
  (variables (DrlP1 (vals F T)) (DrlP2 (vals F T)) (AsmP6 (vals F T)) (Worn (vals F T)))
  (action drill1 (effect DrlP1 (dist (T 1))) (effect DrlP2 (dist (F 1))))
  (action drill2 (effect DrlP2 (dist (T 1))) (effect DrlP1 (dist (F 1))))
  (action assemble (effect AsmP6 (dist (T 0.5) (F 0.5))))
  (reward
    (split DrlP1
      (case F (split AsmP6 (case F (val 0)) (case T (val 10))))
      (case T (split DrlP2
                (case F (split AsmP6 (case F (val 0)) (case T (val 10))))
                (case T (split Worn (case F (val 20)) (case T (val 15))))))))
  (init (DrlP1 F) (DrlP2 F) (AsmP6 F) (Worn F)))
)";

inline Literal lit(const FactoredMDP& m, const std::string& var, const std::string& val) {
    auto v = *m.find_variable(var);
    return {v, *m.variables[v].find_value(val)};
}

inline State state(const FactoredMDP& m, const std::map<std::string, std::string>& assignment) {
    std::vector<ValueId> vals(m.variables.size(), 0);
    for (const auto& [var, val] : assignment) {
        auto l = lit(m, var, val);
        vals[l.var] = l.value;
    }
    return State(std::move(vals));
}

/// Every state of a small model, canonical order.
inline std::vector<State> all_states(const FactoredMDP& m) {
    StateIndexer idx(m);
    std::vector<State> out;
    for (std::uint64_t c = 0; c < idx.size(); ++c) out.push_back(idx.decode(c));
    return out;
}

inline gen::RandomParams random_params(std::uint64_t seed, std::size_t max_vars = 10, bool post = true,
                                       std::size_t max_domain = 2) {
    gen::RandomParams p;
    p.seed = seed;
    p.vars = 2 + seed % (max_vars - 1);
    p.actions = 1 + (seed / 3) % 6;
    p.depth = 3;
    p.max_domain = max_domain;
    p.post_tests = post && seed % 2 == 0;
    return p;
}

/// Outcome distribution as a map, for order-independent comparison.
inline std::map<State, double> as_map(const std::vector<std::pair<State, double>>& d) {
    std::map<State, double> m;
    for (const auto& [s, p] : d) m[s] += p;
    return m;
}

/// First disagreement between `m` and its reduction on an rs-consistent
/// state: reward, or projected transition support/probabilities beyond `tol`.
/// Empty when they agree everywhere.
inline std::string reduction_mismatch(const FactoredMDP& m, const ReachableSet& rs, const ReducedModel& red,
                                      double tol = 1e-9) {
    for (const auto& s : enumerate_states(m, &rs)) {
        State ps = red.projection.project(s);
        double r0 = eval_reward(m, s), r1 = eval_reward(red.mdp, ps);
        if (std::fabs(r0 - r1) > tol)
            return "reward differs at " + state_name(m, s) + ": " + std::to_string(r0) + " vs " + std::to_string(r1);
        for (const auto& a : m.actions) {
            std::map<State, double> expected;
            for (const auto& [t, p] : transition_distribution(m, s, a)) expected[red.projection.project(t)] += p;
            std::map<State, double> got;
            if (auto ai = red.mdp.find_action(a.name)) got = as_map(transition_distribution(red.mdp, ps, red.mdp.actions[*ai]));
            else got[ps] = 1.0; // dropped: a redundant identity action
            auto where = " at " + state_name(m, s) + " under " + a.name;
            if (got.size() != expected.size()) return "support differs" + where;
            for (const auto& [t, p] : expected) {
                auto it = got.find(t);
                if (it == got.end()) return "support differs" + where;
                if (std::fabs(it->second - p) > tol) return "probability differs" + where;
            }
        }
    }
    return {};
}

} // namespace fixtures
