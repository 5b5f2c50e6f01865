#include "sreach/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    using namespace sreach::cli;
    RunConfig cfg;
    CLI::App app{"Structured reachability analysis, reduction and solution of factored MDPs"};
    app.require_subcommand(1);

    auto common = [&](CLI::App* sub) {
        sub->add_option("--k", cfg.ks, "Complexity parameter; verify accepts a comma-separated list")
            ->delimiter(',');
        sub->add_option("--beta", cfg.beta, "Discount (defaults to the model's)");
        sub->add_option("--tol", cfg.tol, "Value iteration tolerance");
        sub->add_option("--seed", cfg.seed, "Random seed");
        sub->add_option("--out", cfg.out, "Output path ('-' for stdout)");
        sub->add_option("--threads", cfg.threads, "Worker threads");
        sub->add_flag("--sexpr", cfg.sexpr, "Machine-readable report");
        sub->add_option("--max-compound", cfg.max_compound, "Largest compound variable domain");
        sub->add_option("--max-candidates", cfg.max_candidates, "Exclusion candidate budget per level");
        sub->add_option("--max-states", cfg.max_states, "Explicit enumeration cap");
        sub->add_option("--reach", cfg.reach, "Reachable-set file");
    };

    auto* analyze = app.add_subcommand("analyze", "Compute the reachable set");
    analyze->add_option("model", cfg.input, "FMDP file")->required();
    common(analyze);

    auto* reduce = app.add_subcommand("reduce", "Write the reduced and effective models");
    reduce->add_option("model", cfg.input, "FMDP file")->required();
    reduce->add_option("--effective", cfg.effective, "Effective model output path");
    common(reduce);

    auto* solve = app.add_subcommand("solve", "Value iteration over enumerated states");
    solve->add_option("model", cfg.input, "FMDP file")->required();
    common(solve);

    auto* verify = app.add_subcommand("verify", "Check results against explicit search");
    verify->add_option("model", cfg.input, "FMDP file")->required();
    common(verify);

    auto* gen = app.add_subcommand("gen", "Generate a fixture model");
    gen->add_option("kind", cfg.input, "lights | paint | factory | random")->required();
    gen->add_option("--n", cfg.n, "Number of lights");
    gen->add_flag("--goal", cfg.goal, "Lights: reward L0 on and add a wait action");
    gen->add_option("--vars", cfg.vars, "Number of variables");
    gen->add_option("--actions", cfg.actions, "Number of actions");
    gen->add_option("--depth", cfg.depth, "Random: CPT depth bound");
    gen->add_flag("--starved", cfg.starved, "Factory: start without resources");
    gen->add_flag("--post", cfg.post, "Random: allow correlated effects");
    common(gen);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kFailure;
    }
    for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
    return run(cfg, std::cout, std::cerr);
}
