#include "fixtures.hpp"
#include "sreach/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace sreach;
using namespace fixtures;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("sreach_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path(name)) << text;
        return path(name);
    }

    static std::string read(const std::string& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    int run(cli::RunConfig cfg) {
        out_.str("");
        err_.str("");
        cfg.threads = 2;
        return cli::run(cfg, out_, err_);
    }

    static cli::RunConfig config(std::string command, std::string input, std::vector<int> ks = {2}) {
        cli::RunConfig c;
        c.command = std::move(command);
        c.input = std::move(input);
        c.ks = std::move(ks);
        return c;
    }

    fs::path dir_;
    std::ostringstream out_, err_;
};

} // namespace

TEST_F(Cli, AnalyzeLights) {
    auto model = write("lights.fmdp", serialize_mdp(gen::lights(10)));
    auto cfg = config("analyze", model);
    cfg.out = path("lights.reach");
    ASSERT_EQ(run(cfg), 0) << err_.str();
    EXPECT_NE(out_.str().find("2 consistent"), std::string::npos) << out_.str();
    auto rs = parse_reachable(gen::lights(10), read(cfg.out));
    EXPECT_EQ(rs.values.size(), 20U);
    EXPECT_EQ(rs.excl.size(), 90U);
}

TEST_F(Cli, AnalyzeToStdoutKeepsReportOnStderr) {
    auto model = write("paint.fmdp", serialize_mdp(gen::paint()));
    auto cfg = config("analyze", model, {4});
    cfg.sexpr = true;
    ASSERT_EQ(run(cfg), 0);
    auto rs = parse_reachable(gen::paint(), out_.str());
    EXPECT_EQ(rs.k, 4);
    EXPECT_NE(err_.str().find("(consistent 5)"), std::string::npos) << err_.str();
    EXPECT_NE(err_.str().find("(level (index"), std::string::npos);
}

TEST_F(Cli, ExitCodes) {
    auto garbage = write("bad.fmdp", "(mdp (discount");
    EXPECT_EQ(run(config("analyze", garbage)), cli::kParse);
    EXPECT_NE(err_.str().find("parse error"), std::string::npos);

    auto invalid = write("invalid.fmdp", "(mdp (discount 0.9) (variables (A (vals x y)))"
                                         " (action a (effect A (dist (x 0.5) (y 0.4)))) (reward (val 0)) (init (A x)))");
    EXPECT_EQ(run(config("analyze", invalid)), cli::kValidation);
    EXPECT_NE(err_.str().find("distribution sums to 0.9"), std::string::npos);

    auto big = write("factory.fmdp", serialize_mdp(gen::factory({})));
    EXPECT_EQ(run(config("solve", big)), cli::kCapacity);

    auto lights = write("lights2.fmdp", serialize_mdp(gen::lights(2)));
    auto open = config("solve", lights);
    open.reach = write("open.reach", "(reachable (k 1) (iterations 1) (values (L0 off) (L1 on)) (excl))");
    EXPECT_EQ(run(open), cli::kClosure);
    EXPECT_NE(err_.str().find("toggle"), std::string::npos);

    EXPECT_EQ(run(config("gen", "nonsense")), cli::kFailure);
    EXPECT_EQ(run(config("analyze", path("missing.fmdp"))), cli::kFailure);
    EXPECT_EQ(run(config("analyze", lights, {3})), cli::kFailure);
    EXPECT_EQ(run(config("frobnicate", lights)), cli::kFailure);
}

TEST_F(Cli, ReduceWithVacuousSetIsByteIdentical) {
    for (const auto& m : {gen::paint(), gen::factory({}), parse_mdp(kAssembly)}) {
        auto text = serialize_mdp(m);
        auto model = write("m.fmdp", text);
        auto cfg = config("reduce", model);
        cfg.reach = write("vac.reach", serialize_reachable(m, vacuous_reachable_set(m)));
        cfg.out = path("m.reduced.fmdp");
        ASSERT_EQ(run(cfg), 0) << err_.str();
        EXPECT_EQ(read(cfg.out), text);
        EXPECT_TRUE(fs::exists(path("m.reduced.effective.fmdp")));
    }
}

TEST_F(Cli, ReduceStarvedFactory) {
    auto model = write("starved.fmdp", serialize_mdp(gen::factory({.starved = true})));
    auto cfg = config("reduce", model);
    cfg.out = path("starved.reduced.fmdp");
    cfg.effective = path("starved.eff.fmdp");
    cfg.sexpr = true;
    ASSERT_EQ(run(cfg), 0) << err_.str();
    EXPECT_NE(out_.str().find("(effective-size 0)"), std::string::npos) << out_.str();
    EXPECT_NO_THROW(parse_mdp(read(cfg.out)));
    EXPECT_TRUE(parse_mdp(read(cfg.effective)).variables.empty());
}

TEST_F(Cli, SolveWithReachableSet) {
    auto m = gen::lights(10, true);
    auto model = write("goal.fmdp", serialize_mdp(m));
    auto cfg = config("solve", model);
    cfg.reach = write("goal.reach", serialize_reachable(m, reachable_k(m, *m.init, 2)));
    ASSERT_EQ(run(cfg), 0) << err_.str();
    auto solution = out_.str();
    EXPECT_EQ(std::count(solution.begin(), solution.end(), '\n'), 3);
    EXPECT_NE(err_.str().find("solved 2 states"), std::string::npos);
}

TEST_F(Cli, Verify) {
    auto lights = write("lights.fmdp", serialize_mdp(gen::lights(10)));
    auto cfg = config("verify", lights, {1, 2, 3});
    cfg.sexpr = true;
    cfg.out = path("verify.txt");
    ASSERT_EQ(run(cfg), 0) << out_.str();
    auto text = out_.str();
    EXPECT_NE(text.find("(gap 1022)"), std::string::npos);
    EXPECT_NE(text.find("(result pass)"), std::string::npos);

    auto paint = gen::paint();
    auto model = write("paint.fmdp", serialize_mdp(paint));
    auto bad = reachable_k(paint, *paint.init, 2);
    bad.excl.push_back({lit(paint, "PntP1", "T"), lit(paint, "qty", "q0")});
    auto vcfg = config("verify", model);
    vcfg.reach = write("bad.reach", serialize_reachable(paint, bad));
    EXPECT_EQ(run(vcfg), cli::kFailure);
    EXPECT_NE(err_.str().find("unsound"), std::string::npos) << err_.str();
}

TEST_F(Cli, Generators) {
    auto cfg = config("gen", "lights");
    cfg.n = 2;
    ASSERT_EQ(run(cfg), 0);
    auto m = parse_mdp(out_.str());
    EXPECT_EQ(bfs_reachable(m, *m.init).size(), 2U);

    ASSERT_EQ(run(config("gen", "paint")), 0);
    EXPECT_EQ(parse_mdp(out_.str()).variables.size(), 5U);

    auto f = config("gen", "factory");
    f.seed = 7;
    ASSERT_EQ(run(f), 0);
    auto factory = parse_mdp(out_.str());
    EXPECT_EQ(state_count(factory), BigCount(1) << 31);
    EXPECT_EQ(factory.actions.size(), 30U);

    auto r = config("gen", "random");
    r.vars = 6;
    r.actions = 3;
    r.post = true;
    ASSERT_EQ(run(r), 0);
    EXPECT_EQ(parse_mdp(out_.str()).variables.size(), 6U);
}

TEST_F(Cli, Executable) {
    std::string exe = SREACH_CLI_PATH;
    auto model = path("paint.fmdp");
    ASSERT_EQ(std::system((exe + " gen paint --out " + model).c_str()), 0);
    auto reach = path("paint.reach");
    ASSERT_EQ(std::system((exe + " analyze " + model + " --k 4 --out " + reach + " > /dev/null").c_str()), 0);
    EXPECT_EQ(parse_reachable(gen::paint(), read(reach)).k, 4);
    int rc = std::system((exe + " analyze " + path("absent.fmdp") + " 2> /dev/null").c_str());
    EXPECT_EQ(WEXITSTATUS(rc), 1);
    rc = std::system((exe + " verify " + model + " --k 2,4 > /dev/null 2>&1").c_str());
    EXPECT_EQ(WEXITSTATUS(rc), 0);
}
