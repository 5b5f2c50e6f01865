#pragma once

#include "sreach/model.hpp"

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sreach::gen {

namespace detail {

inline Variable boolean(std::string name, std::string no = "F", std::string yes = "T") {
    return Variable{std::move(name), {std::move(no), std::move(yes)}};
}

inline CptTree point(std::size_t domain, ValueId v) { return CptTree::make_leaf(Distribution::point(domain, v)); }

/// CPT that keeps a boolean variable as it is.
inline CptTree persist(VarId v) { return CptTree::make_split(v, {point(2, 0), point(2, 1)}); }

inline CptTree bernoulli(double p_yes) {
    Distribution d;
    d.prob = {1.0 - p_yes, p_yes};
    return CptTree::make_leaf(d);
}

} // namespace detail

/// N lights wired to one switch; `toggle` flips all of them. L0 starts off,
/// the others on. With `goal`, reward 1 when L0 is on and a `wait` action.
inline FactoredMDP lights(std::size_t n, bool goal = false) {
    FactoredMDP m;
    m.discount = 0.9;
    for (std::size_t i = 0; i < n; ++i) m.variables.push_back(detail::boolean("L" + std::to_string(i), "off", "on"));
    ActionSpec toggle;
    toggle.name = "toggle";
    for (std::size_t i = 0; i < n; ++i)
        toggle.effects.emplace(static_cast<VarId>(i),
                               CptTree::make_split(static_cast<VarId>(i), {detail::point(2, 1), detail::point(2, 0)}));
    m.actions.push_back(std::move(toggle));
    if (goal) {
        m.actions.push_back(ActionSpec{"wait", {}});
        m.reward = RewardTree::make_split(0, {RewardTree::make_leaf(0.0), RewardTree::make_leaf(1.0)});
    } else {
        m.reward = RewardTree::make_leaf(0.0);
    }
    std::vector<ValueId> init(n, 1);
    if (n) init[0] = 0;
    m.init = State(std::move(init));
    return m;
}

/// Four parts and exactly enough paint for three: one action per 3-subset of
/// parts paints them and uses up the paint. Reward 1 iff all four are painted.
inline FactoredMDP paint() {
    FactoredMDP m;
    m.discount = 0.9;
    for (int i = 1; i <= 4; ++i) m.variables.push_back(detail::boolean("PntP" + std::to_string(i)));
    m.variables.push_back(Variable{"qty", {"q0", "q3"}});
    const VarId qty = 4;
    for (int skip = 4; skip >= 1; --skip) {
        ActionSpec a;
        a.name = "Paint";
        for (int i = 1; i <= 4; ++i)
            if (i != skip) a.name += "_" + std::to_string(i);
        for (VarId p = 0; p < 4; ++p) {
            if (static_cast<int>(p) + 1 == skip) continue;
            a.effects.emplace(p, CptTree::make_split(qty, {detail::persist(p), detail::point(2, 1)}));
        }
        a.effects.emplace(qty, detail::point(2, 0));
        m.actions.push_back(std::move(a));
    }
    RewardTree r = RewardTree::make_leaf(1.0);
    for (VarId p = 4; p-- > 0;) r = RewardTree::make_split(p, {RewardTree::make_leaf(0.0), std::move(r)});
    m.reward = std::move(r);
    m.init = State({0, 0, 0, 0, 1});
    return m;
}

struct FactoryParams {
    std::size_t vars = 31;
    std::size_t actions = 30;
    std::uint64_t seed = 7;
    bool starved = false; // no resources at the start: objectives can never change
};

/// Synthetic resource-constrained manufacturing domain. Operations turn
/// objectives on when their resources are available, consume resources and are
/// disturbed by noise variables; shake actions stir noise and two decorative
/// variables that nothing relevant depends on. The reward scores objectives.
inline FactoredMDP factory(const FactoryParams& p) {
    if (p.vars < 6) throw std::invalid_argument("factory needs at least 6 variables");
    if (p.actions < 2) throw std::invalid_argument("factory needs at least 2 actions");
    std::mt19937_64 rng(p.seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    auto prob = [&] { return static_cast<double>(1 + pick(9)) / 10.0; };

    const std::size_t dec = 2;
    const std::size_t res = std::max<std::size_t>(1, p.vars / 6);
    const std::size_t obj = std::min<std::size_t>(6, std::max<std::size_t>(1, p.vars / 4));
    const std::size_t noise = p.vars - dec - res - obj;
    FactoredMDP m;
    m.discount = 0.9;
    std::vector<VarId> R, O, N, D;
    auto add = [&](std::vector<VarId>& group, const std::string& name) {
        group.push_back(static_cast<VarId>(m.variables.size()));
        m.variables.push_back(detail::boolean(name, "no", "yes"));
    };
    for (std::size_t i = 0; i < res; ++i) add(R, "Res" + std::to_string(i));
    for (std::size_t i = 0; i < obj; ++i) add(O, "Obj" + std::to_string(i));
    for (std::size_t i = 0; i < noise; ++i) add(N, "Noise" + std::to_string(i));
    for (std::size_t i = 0; i < dec; ++i) add(D, "Dec" + std::to_string(i));

    const std::size_t shakes = std::max<std::size_t>(1, p.actions / 5);
    const std::size_t ops = p.actions - shakes;
    for (std::size_t j = 0; j < ops; ++j) {
        ActionSpec a;
        a.name = "Op" + std::to_string(j);
        VarId o = O[j % obj];
        VarId r = R[pick(res)];
        VarId nz = N.empty() ? r : N[j % N.size()];
        // success branch: objective set with some probability, disturbed by noise
        CptTree success = N.empty() ? detail::bernoulli(prob())
                                    : CptTree::make_split(nz, {detail::bernoulli(prob()), detail::point(2, 1)});
        // some operations also need the previous objective done
        if (j % obj > 0 && pick(2) == 0)
            success = CptTree::make_split(O[j % obj - 1], {detail::point(2, 0), std::move(success)});
        CptTree cpt = CptTree::make_split(o, {CptTree::make_split(r, {detail::point(2, 0), std::move(success)}),
                                              detail::point(2, 1)});
        a.effects.emplace(o, std::move(cpt));
        // resource use: correlated with success for every third operation
        if (j % 3 == 0) {
            CptTree use = CptTree::make_split(o, {detail::persist(r), detail::point(2, 0)}, true);
            a.effects.emplace(r, std::move(use));
        } else {
            Distribution keep;
            keep.prob = {0.5, 0.5};
            a.effects.emplace(r, CptTree::make_split(r, {detail::point(2, 0), CptTree::make_leaf(keep)}));
        }
        m.actions.push_back(std::move(a));
    }
    for (std::size_t j = 0; j < shakes; ++j) {
        ActionSpec a;
        a.name = "Shake" + std::to_string(j);
        for (std::size_t t = 0; t < 3 && !N.empty(); ++t) {
            std::size_t i = (j * 3 + t) % N.size();
            VarId v = N[i], next = N[(i + 1) % N.size()];
            if (a.effects.count(v)) continue;
            a.effects.emplace(v, v == next ? detail::bernoulli(prob())
                                           : CptTree::make_split(next, {detail::bernoulli(prob()), detail::persist(v)}));
        }
        VarId d = D[j % dec];
        a.effects.emplace(d, N.empty() ? detail::bernoulli(0.5)
                                       : CptTree::make_split(N[pick(N.size())], {detail::bernoulli(0.5), detail::persist(d)}));
        m.actions.push_back(std::move(a));
    }

    // reward: objectives worth 1..9 each, as a full tree over them
    std::vector<double> worth;
    for (std::size_t i = 0; i < obj; ++i) worth.push_back(static_cast<double>(1 + pick(9)));
    auto build = [&](auto&& self, std::size_t i, double acc) -> RewardTree {
        if (i == obj) return RewardTree::make_leaf(acc);
        return RewardTree::make_split(O[i], {self(self, i + 1, acc), self(self, i + 1, acc + worth[i])});
    };
    m.reward = build(build, 0, 0.0);

    std::vector<ValueId> init(m.variables.size(), 0);
    for (VarId r : R) init[r] = p.starved ? 0 : 1;
    for (VarId n : N) init[n] = static_cast<ValueId>(pick(2));
    for (VarId d : D) init[d] = static_cast<ValueId>(pick(2));
    m.init = State(std::move(init));
    return m;
}

struct RandomParams {
    std::size_t vars = 6;
    std::size_t actions = 4;
    std::size_t depth = 3;      // CPT depth bound
    std::size_t max_domain = 2; // values per variable drawn from 2..max_domain
    std::size_t max_effects = 3;
    bool post_tests = false;    // allow correlated (post-action) tests
    std::uint64_t seed = 1;

    [[nodiscard]] std::string describe() const {
        return "random vars=" + std::to_string(vars) + " actions=" + std::to_string(actions) +
               " depth=" + std::to_string(depth) + " domain<=" + std::to_string(max_domain) +
               " effects<=" + std::to_string(max_effects) + " post=" + (post_tests ? "1" : "0") +
               " seed=" + std::to_string(seed);
    }
};

/// Seeded random MDP with tree CPTs; a single random initial state.
inline FactoredMDP random_mdp(const RandomParams& p) {
    if (p.vars < 1 || p.actions < 1 || p.max_domain < 2) throw std::invalid_argument("random_mdp: bad parameters");
    std::mt19937_64 rng(p.seed);
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    FactoredMDP m;
    m.discount = 0.9;
    for (std::size_t i = 0; i < p.vars; ++i) {
        Variable v;
        v.name = "V" + std::to_string(i);
        std::size_t d = 2 + pick(p.max_domain - 1);
        for (std::size_t x = 0; x < d; ++x) v.values.push_back("v" + std::to_string(x));
        m.variables.push_back(std::move(v));
    }
    auto dom = [&](VarId v) { return m.variables[v].domain_size(); };

    auto random_dist = [&](std::size_t d) {
        Distribution out;
        out.prob.assign(d, 0.0);
        if (pick(2) == 0) {
            out.prob[pick(d)] = 1.0;
            return out;
        }
        std::size_t a = pick(d), b = pick(d);
        if (a == b) {
            out.prob[a] = 1.0;
            return out;
        }
        double q = static_cast<double>(1 + pick(3)) / 4.0;
        out.prob[a] = q;
        out.prob[b] = 1.0 - q;
        return out;
    };

    for (std::size_t ai = 0; ai < p.actions; ++ai) {
        ActionSpec a;
        a.name = "a" + std::to_string(ai);
        std::size_t ne = 1 + pick(std::min(p.max_effects, p.vars));
        std::vector<VarId> affected;
        while (affected.size() < ne) {
            VarId v = static_cast<VarId>(pick(p.vars));
            if (std::find(affected.begin(), affected.end(), v) == affected.end()) affected.push_back(v);
        }
        // post tests only refer to variables earlier in `affected`, so no cycles
        for (std::size_t ei = 0; ei < affected.size(); ++ei) {
            VarId target = affected[ei];
            std::vector<std::pair<VarId, bool>> path;
            auto build = [&](auto&& self, std::size_t depth) -> CptTree {
                if (depth == p.depth || pick(3) == 0) return CptTree::make_leaf(random_dist(dom(target)));
                bool post = p.post_tests && ei > 0 && pick(3) == 0;
                VarId v = post ? affected[pick(ei)] : static_cast<VarId>(pick(p.vars));
                if (std::find(path.begin(), path.end(), std::pair{v, post}) != path.end())
                    return CptTree::make_leaf(random_dist(dom(target)));
                path.emplace_back(v, post);
                std::vector<CptTree> kids;
                for (std::size_t x = 0; x < dom(v); ++x) kids.push_back(self(self, depth + 1));
                path.pop_back();
                return CptTree::make_split(v, std::move(kids), post);
            };
            a.effects.emplace(target, build(build, 0));
        }
        m.actions.push_back(std::move(a));
    }

    std::vector<VarId> used;
    auto reward = [&](auto&& self, std::size_t depth) -> RewardTree {
        if (depth == 2 || pick(2) == 0) return RewardTree::make_leaf(static_cast<double>(pick(5)));
        VarId v = static_cast<VarId>(pick(p.vars));
        if (std::find(used.begin(), used.end(), v) != used.end()) return RewardTree::make_leaf(static_cast<double>(pick(5)));
        used.push_back(v);
        std::vector<RewardTree> kids;
        for (std::size_t x = 0; x < dom(v); ++x) kids.push_back(self(self, depth + 1));
        used.pop_back();
        return RewardTree::make_split(v, std::move(kids));
    };
    m.reward = reward(reward, 0);

    std::vector<ValueId> init;
    for (std::size_t v = 0; v < p.vars; ++v) init.push_back(static_cast<ValueId>(pick(dom(static_cast<VarId>(v)))));
    m.init = State(std::move(init));
    return m;
}

} // namespace sreach::gen
