#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace sreach;
using namespace fixtures;

namespace {

BigCount gap(const FactoredMDP& m, int k) {
    return check_completeness(m, *m.init, reachable_k(m, *m.init, k)).gap;
}

} // namespace

TEST(Bfs, Fixtures) {
    auto l = gen::lights(10);
    EXPECT_EQ(bfs_reachable(l, *l.init).size(), 2U);
    auto p = gen::paint();
    EXPECT_EQ(bfs_reachable(p, *p.init).size(), 5U);
    auto still = parse_mdp("(mdp (discount 0.9) (variables (A (vals x y))) (action wait) (reward (val 0)) (init (A y)))");
    auto r = bfs_reachable(still, *still.init);
    ASSERT_EQ(r.size(), 1U);
    EXPECT_EQ(r[0], State(std::vector<ValueId>{1}));
    EXPECT_THROW(bfs_reachable(gen::lights(20), *gen::lights(20).init, 1000), CapacityError);
}

TEST(Soundness, DetectsInjectedFault) {
    auto m = gen::paint();
    auto rs = reachable_k(m, *m.init, 2);
    EXPECT_TRUE(check_soundness(m, *m.init, rs).empty());
    // claim that PntP1 can never be painted while qty is q0
    LiteralSet bogus{lit(m, "PntP1", "T"), lit(m, "qty", "q0")};
    rs.excl.push_back(bogus);
    auto bad = check_soundness(m, *m.init, rs);
    ASSERT_FALSE(bad.empty());
    for (const auto& s : bad) EXPECT_TRUE(s.contains(bogus[0]) && s.contains(bogus[1]));
    VerifyOptions o;
    o.check_values = false;
    auto rep = verify_sets(m, *m.init, {rs}, o);
    EXPECT_FALSE(rep.sound);
    EXPECT_FALSE(rep.passed());
    EXPECT_NE(serialize_verification(m, rep).find("(soundness fail)"), std::string::npos);
}

TEST(Completeness, Gaps) {
    auto l = gen::lights(10);
    EXPECT_EQ(gap(l, 1), 1022);
    EXPECT_EQ(gap(l, 2), 0);
    EXPECT_EQ(gap(l, 3), 0);
    auto p = gen::paint();
    EXPECT_EQ(gap(p, 1), 27);
    EXPECT_EQ(gap(p, 2), 12);
    EXPECT_EQ(gap(p, 4), 0);
    auto c = check_completeness(p, *p.init, reachable_k(p, *p.init, 2), kDefaultMaxStates, 3);
    EXPECT_EQ(c.samples.size(), 3U);
}

TEST(ValuePreservation, Fixtures) {
    for (const auto& m : {gen::lights(8, true), gen::paint(), parse_mdp(kAssembly), parse_mdp(kDrill)})
        for (int k = 1; k <= 3; ++k) {
            auto v = check_value_preservation(m, *m.init, reachable_k(m, *m.init, k));
            EXPECT_TRUE(v.closed) << v.closure_error;
            EXPECT_LE(v.max_discrepancy, v.bound);
            EXPECT_LE(v.max_discrepancy, 1e-6);
        }
}

TEST(ValuePreservation, VacuousSetIsExact) {
    auto m = gen::random_mdp(random_params(9, 8, true));
    auto v = check_value_preservation(m, *m.init, vacuous_reachable_set(m));
    EXPECT_TRUE(v.closed);
    EXPECT_EQ(v.max_discrepancy, 0.0);
}

TEST(ValuePreservation, UnsoundSetIsReported) {
    auto m = gen::lights(2);
    ReachableSet rs = vacuous_reachable_set(m, 2);
    rs.excl = {{lit(m, "L0", "on"), lit(m, "L1", "off")}};
    auto v = check_value_preservation(m, *m.init, rs);
    EXPECT_FALSE(v.closed);
    EXPECT_FALSE(v.closure_error.empty());
}

TEST(Verify, RandomInstancesPass) {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto p = random_params(seed, 8, true);
        auto m = gen::random_mdp(p);
        VerifyOptions o;
        o.ks = {1, 2};
        if (m.variables.size() >= 3) o.ks.push_back(3);
        auto rep = verify_instance(m, *m.init, o, p.describe());
        EXPECT_TRUE(rep.passed()) << serialize_verification(m, rep);
        EXPECT_EQ(rep.runs.size(), o.ks.size());
    }
}

TEST(Verify, ReportFormat) {
    auto m = gen::paint();
    VerifyOptions o;
    o.ks = {2, 4};
    auto rep = verify_instance(m, *m.init, o, "paint");
    EXPECT_TRUE(rep.passed());
    auto text = serialize_verification(m, rep);
    EXPECT_NE(text.find("(oracle-size 5)"), std::string::npos);
    EXPECT_NE(text.find("(consistent 17) (gap 12)"), std::string::npos);
    EXPECT_NE(text.find("(consistent 5) (gap 0)"), std::string::npos);
    EXPECT_NE(text.find("(result pass)"), std::string::npos);
}
