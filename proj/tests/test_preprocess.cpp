#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace sreach;
using namespace fixtures;

namespace {

// Painting CPT that also tests whether the part is dry: the dryness test only
// changes probabilities, never supports.
const char* kPaintDry = R"(
(mdp
  (discount 0.9)
  (variables (PntP (vals F T)) (DryP (vals F T)))
  (action paint
    (effect PntP
      (split PntP
        (case T (dist (T 1)))
        (case F (split DryP
                  (case T (dist (T 0.9) (F 0.1)))
                  (case F (dist (T 0.6) (F 0.4))))))))
  (reward (val 0))
  (init (PntP F) (DryP T)))
)";

/// BFS over the transformed model.
std::set<State> compound_reachable(const CompoundModel& cm, const State& init) {
    std::set<State> seen{init};
    std::vector<State> queue{init};
    while (!queue.empty()) {
        State s = queue.back();
        queue.pop_back();
        for (std::size_t a = 0; a < cm.actions.size(); ++a)
            for (const auto& [t, p] : transition_distribution(cm, s, a))
                if (seen.insert(t).second) queue.push_back(t);
    }
    return seen;
}

} // namespace

TEST(EffectTable, ToggleHasTwoBranches) {
    auto m = gen::lights(2);
    auto t = effect_table(m.actions[0], 0);
    ASSERT_EQ(t.size(), 2U);
    EXPECT_EQ(t[0], (ConditionEffect{{{0, 0}}, {1}}));
    EXPECT_EQ(t[1], (ConditionEffect{{{0, 1}}, {0}}));
}

TEST(EffectTable, ConstantLeafHasEmptyCondition) {
    auto t = effect_table(CptTree::make_leaf(Distribution::point(2, 1)));
    ASSERT_EQ(t.size(), 1U);
    EXPECT_TRUE(t[0].condition.empty());
    EXPECT_EQ(t[0].effects, std::vector<ValueId>{1});
}

TEST(EffectTable, SupportIrrelevantTestsCollapse) {
    auto m = parse_mdp(kPaintDry);
    auto t = effect_table(m.actions[0], 0);
    ASSERT_EQ(t.size(), 2U);
    EXPECT_EQ(t[0], (ConditionEffect{{lit(m, "PntP", "F")}, {0, 1}}));
    EXPECT_EQ(t[1], (ConditionEffect{{lit(m, "PntP", "T")}, {1}}));
}

TEST(EffectTable, CollapsedEntriesCoverOriginalLeaves) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto m = gen::random_mdp(random_params(seed, 7, false, 3));
        for (const auto& a : m.actions)
            for (const auto& [v, cpt] : a.effects) {
                auto table = effect_table(cpt);
                for_each_leaf(cpt, [&](const std::vector<PathStep>& path, const Distribution& d) {
                    LiteralSet lits;
                    for (const auto& s : path) lits.push_back({s.var, s.value});
                    std::sort(lits.begin(), lits.end());
                    std::size_t matches = 0;
                    for (const auto& e : table)
                        if (std::includes(lits.begin(), lits.end(), e.condition.begin(), e.condition.end())) {
                            ++matches;
                            EXPECT_EQ(e.effects, d.support());
                        }
                    EXPECT_EQ(matches, 1U);
                });
            }
    }
}

TEST(Correlation, Groups) {
    auto assembly = parse_mdp(kAssembly);
    auto g = correlation_groups(assembly.actions[0]);
    ASSERT_EQ(g.size(), 1U);
    EXPECT_EQ(g[0], (std::vector<VarId>{0, 1, 2}));
    EXPECT_EQ(correlation_groups(assembly.actions[1]).size(), 2U);

    auto paint = gen::paint();
    for (const auto& a : paint.actions)
        for (const auto& grp : correlation_groups(a)) EXPECT_EQ(grp.size(), 1U);

    auto empty = parse_mdp("(mdp (discount 0.9) (variables (A (vals x y))) (action wait) (reward (val 0)))");
    EXPECT_TRUE(correlation_groups(empty.actions[0]).empty());
}

TEST(Compound, NoPostTestsMeansNoCompounds) {
    for (const auto& m : {gen::lights(5), gen::paint(), parse_mdp(kDrill)}) {
        auto cm = compound_transform(m);
        EXPECT_TRUE(cm.compounds().empty());
        for (std::size_t a = 0; a < m.actions.size(); ++a) EXPECT_EQ(cm.actions[a].groups.size(), m.actions[a].effects.size());
    }
}

TEST(Compound, AssemblyEffectSet) {
    auto m = parse_mdp(kAssembly);
    auto cm = compound_transform(m);
    auto comps = cm.compounds();
    ASSERT_EQ(comps.size(), 1U);
    const auto& g = cm.actions[0].groups[0];
    ASSERT_TRUE(g.var.compound());
    auto lookup = [&](VarId v) { return v == 0 ? 0U : 1U; }; // Asm6 F, Rdy4 T, Rdy5 T
    const auto& d = evaluate(g.cpt, lookup, lookup);
    std::set<LiteralSet> effects;
    for (std::size_t j = 0; j < d.prob.size(); ++j)
        if (d.prob[j] > 0) effects.insert(g.var.split(static_cast<ValueId>(j)));
    std::set<LiteralSet> expected{
        {lit(m, "Asm6", "F"), lit(m, "Rdy4", "T"), lit(m, "Rdy5", "T")},
        {lit(m, "Asm6", "T"), lit(m, "Rdy4", "F"), lit(m, "Rdy5", "F")},
    };
    EXPECT_EQ(effects, expected);
    // no compound value pairs Asm6=T with Rdy4=T after success from the pre state
    for (const auto& e : effects) EXPECT_FALSE(e[0].value == 1 && e[1].value == 1);
}

TEST(Compound, CapacityBoundOnDomainSize) {
    auto chain = [](std::size_t n) {
        std::string text = "(mdp (discount 0.9) (variables";
        for (std::size_t i = 0; i < n; ++i) text += " (B" + std::to_string(i) + " (vals F T))";
        text += ") (action a (effect B0 (dist (F 0.5) (T 0.5)))";
        for (std::size_t i = 1; i < n; ++i)
            text += " (effect B" + std::to_string(i) + " (split (post B" + std::to_string(i - 1) +
                    ") (case F (dist (F 1))) (case T (dist (T 1)))))";
        return parse_mdp(text + ") (reward (val 0)))");
    };
    EXPECT_NO_THROW(compound_transform(chain(8)));
    EXPECT_THROW(compound_transform(chain(9)), CapacityError);
    EXPECT_NO_THROW(compound_transform(chain(9), 512));
}

TEST(Compound, TransitionsMatchOriginal) {
    for (std::uint64_t seed = 2; seed <= 60; seed += 2) {
        auto p = random_params(seed, 6, true, 3);
        auto m = gen::random_mdp(p);
        auto cm = compound_transform(m);
        for (const auto& s : all_states(m))
            for (std::size_t a = 0; a < m.actions.size(); ++a) {
                auto x = as_map(transition_distribution(m, s, m.actions[a]));
                auto y = as_map(transition_distribution(cm, s, a));
                ASSERT_EQ(x.size(), y.size()) << p.describe();
                for (const auto& [t, pr] : x) EXPECT_NEAR(y[t], pr, 1e-12) << p.describe();
            }
    }
}

TEST(Compound, PreservesReachability) {
    for (std::uint64_t seed = 2; seed <= 80; seed += 2) {
        auto p = random_params(seed, 8, true);
        auto m = gen::random_mdp(p);
        auto cm = compound_transform(m);
        const auto& init = std::get<State>(*m.init);
        auto oracle = bfs_reachable(m, init);
        EXPECT_EQ(compound_reachable(cm, init), std::set<State>(oracle.begin(), oracle.end())) << p.describe();
    }
}

TEST(Compound, GroupsPartitionAffectedVariables) {
    for (std::uint64_t seed = 2; seed <= 80; seed += 2) {
        auto m = gen::random_mdp(random_params(seed, 10, true));
        for (const auto& a : m.actions) {
            std::vector<VarId> flat;
            for (const auto& g : correlation_groups(a)) flat.insert(flat.end(), g.begin(), g.end());
            std::sort(flat.begin(), flat.end());
            std::vector<VarId> affected;
            for (const auto& [v, _] : a.effects) affected.push_back(v);
            EXPECT_EQ(flat, affected);
        }
    }
}
