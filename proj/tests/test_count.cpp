#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sreach;
using namespace fixtures;

namespace {

BigCount brute_force(const ReachableSet& rs, const FactoredMDP& m) {
    BigCount n = 0;
    for (const auto& s : all_states(m))
        if (state_consistent(rs, s)) n += 1;
    return n;
}

/// Random value subset and random constraints over distinct variables.
ReachableSet random_set(const FactoredMDP& m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ReachableSet rs;
    rs.k = 3;
    for (std::size_t v = 0; v < m.variables.size(); ++v)
        for (std::size_t x = 0; x < m.variables[v].domain_size(); ++x)
            if (x == 0 || rng() % 5 != 0) rs.values.push_back({static_cast<VarId>(v), static_cast<ValueId>(x)});
    std::size_t n = rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t size = 2 + rng() % 2;
        std::vector<VarId> vars;
        while (vars.size() < size && vars.size() < m.variables.size()) {
            auto v = static_cast<VarId>(rng() % m.variables.size());
            if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
        }
        if (vars.size() < 2) break;
        LiteralSet c;
        for (auto v : vars) c.push_back({v, static_cast<ValueId>(rng() % m.variables[v].domain_size())});
        std::sort(c.begin(), c.end());
        rs.excl.push_back(c);
    }
    return rs;
}

} // namespace

TEST(Count, Fixtures) {
    auto lights = gen::lights(10);
    EXPECT_EQ(count_consistent(vacuous_reachable_set(lights), lights), 1024);
    EXPECT_EQ(count_consistent(reachable_k(lights, *lights.init, 2), lights), 2);
    auto paint = gen::paint();
    EXPECT_EQ(count_consistent(reachable_k(paint, *paint.init, 4), paint), 5);
}

TEST(Count, MatchesBruteForce) {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto m = gen::random_mdp(random_params(seed, 9, false, 3));
        auto rs = random_set(m, seed * 31);
        EXPECT_EQ(count_consistent(rs, m), brute_force(rs, m)) << "seed " << seed;
    }
}

TEST(Count, MatchesEnumeration) {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        auto m = gen::random_mdp(random_params(seed, 10, true));
        auto rs = reachable_k(m, *m.init, 2);
        EXPECT_EQ(count_consistent(rs, m), enumerate_states(m, &rs).size());
    }
}

TEST(Count, LargeFreeProduct) {
    auto m = gen::factory({});
    EXPECT_EQ(count_consistent(vacuous_reachable_set(m), m), BigCount(1) << 31);
}

TEST(Count, DenseComponentFallsBackToSearch) {
    // complete constraint graph over 27 booleans: at most one light on
    auto m = gen::lights(27);
    ReachableSet rs = vacuous_reachable_set(m, 2);
    for (VarId a = 0; a < 27; ++a)
        for (VarId b = a + 1; b < 27; ++b) rs.excl.push_back({{a, 1}, {b, 1}});
    EXPECT_EQ(count_consistent(rs, m), 28);
    auto lights = gen::lights(31);
    EXPECT_EQ(count_consistent(reachable_k(lights, *lights.init, 2), lights), 2);
}

TEST(Count, DenseComponentWithManySolutionsHitsCapacity) {
    // 16 four-valued variables, value 3 at most once: 3^16 + 16 * 3^15 solutions
    FactoredMDP m;
    for (int i = 0; i < 16; ++i) m.variables.push_back({"X" + std::to_string(i), {"a", "b", "c", "d"}});
    ReachableSet rs = vacuous_reachable_set(m, 2);
    for (VarId a = 0; a < 16; ++a)
        for (VarId b = a + 1; b < 16; ++b) rs.excl.push_back({{a, 3}, {b, 3}});
    EXPECT_THROW(count_consistent(rs, m), CapacityError);
    // the same structure on 8 variables is small enough to enumerate
    ReachableSet small = vacuous_reachable_set(m, 2);
    for (VarId a = 0; a < 8; ++a)
        for (VarId b = a + 1; b < 8; ++b) small.excl.push_back({{a, 3}, {b, 3}});
    EXPECT_EQ(count_consistent(small, m), BigCount(6561 + 8 * 2187) * 65536);
}
