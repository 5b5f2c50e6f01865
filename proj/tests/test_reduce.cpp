#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace sreach;
using namespace fixtures;

namespace {

const char* kPaintDry = R"(
(mdp
  (discount 0.9)
  (variables (PntP (vals F T)) (DryP (vals F T)))
  (action paint
    (effect PntP
      (split DryP
        (case T (split PntP (case T (dist (T 1))) (case F (dist (T 0.9) (F 0.1)))))
        (case F (split PntP (case T (dist (T 1))) (case F (dist (T 0.6) (F 0.4))))))))
  (reward (split PntP (case F (val 0)) (case T (val 1))))
  (init (PntP F) (DryP T)))
)";

ReachableSet with_values(const FactoredMDP& m, std::vector<Literal> drop, std::vector<LiteralSet> excl = {}) {
    auto rs = vacuous_reachable_set(m, 2);
    for (const auto& l : drop) std::erase(rs.values, l);
    for (auto& e : excl) std::sort(e.begin(), e.end());
    rs.excl = std::move(excl);
    return rs;
}

std::vector<FactoredMDP> fixture_models() {
    return {gen::lights(6), gen::lights(5, true), gen::paint(), parse_mdp(kAssembly), parse_mdp(kDrill),
            parse_mdp(kPaintDry), gen::factory({.vars = 12, .actions = 8}),
            gen::factory({.vars = 12, .actions = 8, .starved = true})};
}

} // namespace

TEST(Prune, FixedConditionPromotesSubtree) {
    auto m = parse_mdp(kPaintDry);
    auto rs = with_values(m, {lit(m, "DryP", "F")});
    std::size_t pruned = 0;
    auto t = prune_tree(m.actions[0].effects.at(0), rs, {}, &pruned);
    EXPECT_EQ(pruned, 1U);
    ASSERT_FALSE(t.is_leaf());
    EXPECT_EQ(t.var, lit(m, "PntP", "F").var);
    EXPECT_EQ(t, m.actions[0].effects.at(0).children[1]);
}

TEST(Prune, BinaryExclusionCollapsesRewardTree) {
    auto m = parse_mdp(kDrill);
    auto rs = with_values(m, {}, {{lit(m, "DrlP1", "T"), lit(m, "DrlP2", "T")}});
    auto t = prune_tree(m.reward, rs);
    auto asm6 = RewardTree::make_split(lit(m, "AsmP6", "F").var, {RewardTree::make_leaf(0), RewardTree::make_leaf(10)});
    EXPECT_EQ(t, asm6);
}

TEST(Prune, VacuousSetLeavesTreesAlone) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto m = gen::random_mdp(random_params(seed, 8, true, 3));
        auto rs = vacuous_reachable_set(m);
        std::size_t pruned = 0;
        EXPECT_EQ(prune_tree(m.reward, rs, {}, &pruned), m.reward);
        for (const auto& a : m.actions)
            for (const auto& [v, cpt] : a.effects) EXPECT_EQ(prune_tree(cpt, rs, {}, &pruned), cpt);
        EXPECT_EQ(pruned, 0U);
    }
}

TEST(Prune, NeverTestsRemovedValues) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto m = gen::random_mdp(random_params(seed, 8, true, 3));
        auto rs = reachable_k(m, *m.init, 2);
        auto check = [&](const auto& tree) {
            for_each_leaf(tree, [&](const std::vector<PathStep>& path, const auto&) {
                LiteralSet pre;
                for (const auto& s : path) {
                    Literal l{s.var, s.value};
                    EXPECT_TRUE(std::binary_search(rs.values.begin(), rs.values.end(), l));
                    if (!s.post) pre.push_back(l);
                }
            });
        };
        check(prune_tree(m.reward, rs));
        for (const auto& a : m.actions)
            for (const auto& [v, cpt] : a.effects) check(prune_tree(cpt, rs));
    }
}

TEST(Removable, FixedVariables) {
    auto paint = gen::paint();
    auto rs = reachable_k(paint, *paint.init, 2);
    EXPECT_TRUE(removable_variables(rs, paint).empty());
    auto m = parse_mdp(kPaintDry);
    auto r2 = reachable_k(m, *m.init, 2);
    EXPECT_EQ(removable_variables(r2, m), std::vector<Literal>{lit(m, "DryP", "T")});
}

TEST(Reduce, VacuousSetIsIdentity) {
    for (const auto& m : fixture_models()) {
        auto red = reduce_model(m, vacuous_reachable_set(m));
        EXPECT_EQ(serialize_mdp(red.mdp), serialize_mdp(m));
    }
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto m = gen::random_mdp(random_params(seed, 8, true, 3));
        EXPECT_EQ(serialize_mdp(reduce_mdp(m, vacuous_reachable_set(m))), serialize_mdp(m));
    }
}

TEST(Reduce, LightsKeepEveryVariable) {
    auto m = gen::lights(10);
    auto rs = reachable_k(m, *m.init, 2);
    auto red = reduce_model(m, rs);
    EXPECT_EQ(red.mdp, m);
    EXPECT_EQ(red.pruned_branches, 0U);
}

TEST(Reduce, PaintWithoutSupplyDeletesEverything) {
    auto m = gen::paint();
    auto init = std::get<State>(*m.init);
    init[lit(m, "qty", "q0").var] = lit(m, "qty", "q0").value;
    m.init = init;
    auto rs = reachable_k(m, *m.init, 2);
    EXPECT_EQ(removable_variables(rs, m).size(), 5U);
    auto red = reduce_model(m, rs);
    EXPECT_TRUE(red.mdp.variables.empty());
    EXPECT_TRUE(validate_mdp(red.mdp).empty()) << describe(validate_mdp(red.mdp));
    EXPECT_EQ(red.mdp.actions.size(), 1U);
    EXPECT_EQ(red.dropped_actions, 3U);
    EXPECT_EQ(reduction_mismatch(m, rs, red), "");
}

TEST(Reduce, SemanticsOnFixtures) {
    for (const auto& m : fixture_models())
        for (int k = 1; k <= 3 && static_cast<std::size_t>(k) <= m.variables.size(); ++k) {
            auto rs = reachable_k(m, *m.init, k);
            auto red = reduce_model(m, rs);
            EXPECT_TRUE(validate_mdp(red.mdp).empty()) << describe(validate_mdp(red.mdp));
            EXPECT_EQ(reduction_mismatch(m, rs, red), "") << serialize_mdp(m);
        }
}

TEST(Reduce, SemanticsOnRandomInstances) {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        auto p = random_params(seed, 9, true, 3);
        auto m = gen::random_mdp(p);
        auto rs = reachable_k(m, *m.init, 2);
        auto red = reduce_model(m, rs);
        EXPECT_TRUE(validate_mdp(red.mdp).empty()) << p.describe() << describe(validate_mdp(red.mdp));
        EXPECT_EQ(reduction_mismatch(m, rs, red), "") << p.describe();
    }
}

TEST(Reduce, ReducedDistributionsStayNormalised) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto m = gen::random_mdp(random_params(seed, 9, true, 3));
        auto red = reduce_mdp(m, reachable_k(m, *m.init, 3 <= m.variables.size() ? 3 : 1));
        for (const auto& a : red.actions)
            for (const auto& [v, cpt] : a.effects)
                for_each_leaf(cpt, [&](const std::vector<PathStep>&, const Distribution& d) {
                    EXPECT_NEAR(d.sum(), 1.0, 1e-9);
                });
    }
}

TEST(Relevance, RewardClosure) {
    auto m = parse_mdp(kDrill);
    // reward tests all four variables
    EXPECT_EQ(relevant_variables(m).size(), 4U);
    auto chain = parse_mdp("(mdp (discount 0.9) (variables (A (vals F T)) (B (vals F T)) (C (vals F T)) (D (vals F T)))"
                           " (action a (effect A (split B (case F (dist (F 1))) (case T (dist (T 1)))))"
                           "           (effect B (split (post C) (case F (dist (F 1))) (case T (dist (T 1)))))"
                           "           (effect C (dist (T 0.5) (F 0.5))))"
                           " (action d (effect D (split A (case F (dist (T 1))) (case T (dist (F 1))))))"
                           " (reward (split A (case F (val 0)) (case T (val 1)))))");
    EXPECT_EQ(relevant_variables(chain), (std::vector<VarId>{0, 1, 2}));
}

TEST(Relevance, ClosedUnderCptTests) {
    for (std::uint64_t seed = 1; seed <= 40; ++seed) {
        auto m = gen::random_mdp(random_params(seed, 10, true));
        auto rel = relevant_variables(m);
        for (VarId v : rel)
            for (const auto& a : m.actions)
                if (auto it = a.effects.find(v); it != a.effects.end())
                    for_each_split(it->second, [&](VarId w, bool) {
                        EXPECT_TRUE(std::binary_search(rel.begin(), rel.end(), w));
                    });
        auto restricted = restrict_variables(m, rel);
        EXPECT_EQ(restricted.mdp.variables.size(), rel.size());
        EXPECT_TRUE(validate_mdp(restricted.mdp).empty());
    }
}

TEST(Effective, StarvedFactoryIsEmpty) {
    auto m = gen::factory({.starved = true});
    auto rs = reachable_k(m, *m.init, 2);
    auto em = effective_mdp(m, rs);
    EXPECT_EQ(em.report.effective_size, 0);
    EXPECT_GT(em.report.reachable_size, 1);
    EXPECT_TRUE(em.effective.variables.empty());
    EXPECT_TRUE(validate_mdp(em.effective).empty()) << describe(validate_mdp(em.effective));
}

TEST(Effective, FactoryDropsDecorativeVariables) {
    auto m = gen::factory({});
    auto em = effective_mdp(m, vacuous_reachable_set(m));
    EXPECT_EQ(em.report.reduced_variables, 31U);
    EXPECT_LT(em.report.effective_variables, 31U);
    EXPECT_GT(em.report.effective_size, 0);
    EXPECT_LE(em.report.effective_size, em.report.reachable_size);
}

TEST(Effective, NeverLargerThanReachable) {
    for (std::uint64_t seed = 1; seed <= 60; ++seed) {
        auto p = random_params(seed, 10, true);
        auto m = gen::random_mdp(p);
        auto em = effective_mdp(m, reachable_k(m, *m.init, 2));
        EXPECT_LE(em.report.effective_size, em.report.reachable_size) << p.describe();
        EXPECT_TRUE(validate_mdp(em.effective).empty()) << p.describe();
    }
}

TEST(Effective, ReportSerialises) {
    auto m = gen::paint();
    auto em = effective_mdp(m, reachable_k(m, *m.init, 4));
    auto text = serialize_report(m, em.report);
    EXPECT_NE(text.find("(reachable-size 5)"), std::string::npos);
    EXPECT_NE(text.find("(state-count 32)"), std::string::npos);
}
