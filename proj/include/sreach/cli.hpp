#pragma once

#include "sreach/count.hpp"
#include "sreach/errors.hpp"
#include "sreach/format.hpp"
#include "sreach/generate.hpp"
#include "sreach/oracle.hpp"
#include "sreach/reach.hpp"
#include "sreach/reach_io.hpp"
#include "sreach/reduce.hpp"
#include "sreach/solve.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace sreach::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kParse = 2, kValidation = 3, kCapacity = 4, kClosure = 5 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;      // analyze | reduce | solve | verify | gen
    std::string input;        // model path, or generator kind for gen
    std::vector<int> ks{2};   // analyze/reduce use the first entry
    std::optional<double> beta;
    double tol = 1e-9;
    std::uint64_t seed = 7;
    std::string out = "-";
    std::string reach;        // reachable-set file
    std::string effective;    // effective-model output path (reduce)
    unsigned threads = std::max(1U, std::thread::hardware_concurrency());
    bool sexpr = false;
    std::size_t max_compound = kDefaultMaxCompound;
    std::uint64_t max_candidates = 50'000'000;
    std::uint64_t max_states = kDefaultMaxStates;
    // generators
    std::size_t n = 10;
    std::size_t vars = 31;
    std::size_t actions = 30;
    std::size_t depth = 3;
    bool starved = false;
    bool goal = false;
    bool post = false;

    void check() const {
        if (ks.empty()) throw UsageError("--k needs at least one value");
        for (int k : ks)
            if (k < 1) throw UsageError("--k values must be >= 1");
        if (!(tol > 0.0)) throw UsageError("--tol must be positive");
        if (max_compound == 0 || max_candidates == 0 || max_states == 0) throw UsageError("caps must be positive");
        if (beta && !(*beta >= 0.0 && *beta < 1.0)) throw UsageError("--beta must satisfy 0 <= beta < 1");
    }

    [[nodiscard]] ReachOptions reach_options() const { return {max_compound, max_candidates, threads}; }

    [[nodiscard]] SolveOptions solve_options() const {
        SolveOptions o;
        o.beta = beta;
        o.tol = tol;
        o.threads = threads;
        return o;
    }
};

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + path + "'");
    f << text;
}

/// Streams of one command run: the artifact goes to `out` (stdout when the
/// path is "-"); the report goes to stdout, or to stderr when stdout carries
/// the artifact.
struct Io {
    const RunConfig& cfg;
    std::ostream& stdout_;
    std::ostream& stderr_;

    [[nodiscard]] std::ostream& report() const { return cfg.out == "-" ? stderr_ : stdout_; }

    void artifact(const std::string& text) const {
        if (cfg.out == "-") stdout_ << text;
        else write_file(cfg.out, text);
    }
};

inline FactoredMDP load_model(const RunConfig& cfg) {
    if (cfg.input.empty()) throw UsageError("missing model path");
    return parse_mdp(read_file(cfg.input));
}

inline const InitialCondition& require_init(const FactoredMDP& mdp) {
    if (!mdp.init) throw ValidationError("model has no (init ...) section");
    return *mdp.init;
}

inline int check_k(const FactoredMDP& mdp, int k) {
    if (static_cast<std::size_t>(k) > std::max<std::size_t>(1, mdp.variables.size()))
        throw UsageError("--k " + std::to_string(k) + " exceeds the number of variables");
    return k;
}

inline std::string constraint_histogram(const ReachableSet& rs) {
    std::map<std::size_t, std::size_t> by_size;
    for (const auto& e : rs.excl) ++by_size[e.size()];
    std::string out;
    for (const auto& [size, count] : by_size) out += " (" + std::to_string(size) + " " + std::to_string(count) + ")";
    return out;
}

} // namespace detail

inline int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::Io io{cfg, out, err};
    auto mdp = detail::load_model(cfg);
    const auto& init = detail::require_init(mdp);
    int k = detail::check_k(mdp, cfg.ks.front());
    auto& rep = io.report();
    auto start = std::chrono::steady_clock::now();
    if (cfg.sexpr) rep << "(analysis (k " << k << ")";
    auto on_level = [&](const LevelStats& st, const ReachableSet&) {
        if (cfg.sexpr) {
            rep << "\n  (level (index " << st.level << ") (nodes " << st.nodes << ") (values " << st.values
                << ") (values-added " << st.values_added << ") (constraints " << st.constraints << ") (candidates "
                << st.candidates << ") (seconds " << sexpr::format_real(st.seconds) << "))";
        } else {
            rep << "level " << st.level << ": " << st.values << " values (+" << st.values_added << "), "
                << st.constraints << " constraints, " << st.nodes << " action nodes, " << st.candidates
                << " candidate sets, " << std::fixed << std::setprecision(4) << st.seconds << std::defaultfloat
                << " s\n";
        }
    };
    auto rs = reachable_k(mdp, init, k, cfg.reach_options(), on_level);
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    io.artifact(serialize_reachable(mdp, rs)); // kept even if counting runs out of capacity
    BigCount consistent = count_consistent(rs, mdp);
    if (cfg.sexpr) {
        rep << "\n  (iterations " << rs.iterations << ") (values " << rs.values.size() << ") (constraints"
            << detail::constraint_histogram(rs) << ")\n  (state-count " << state_count(mdp).str()
            << ") (consistent " << consistent.str() << ") (seconds " << sexpr::format_real(seconds) << "))\n";
    } else {
        rep << "fixpoint after " << rs.iterations << " levels: " << rs.values.size() << " values, " << rs.excl.size()
            << " constraints\n"
            << "states: " << state_count(mdp).str() << " total, " << consistent.str() << " consistent\n"
            << "time: " << std::fixed << std::setprecision(3) << seconds << std::defaultfloat << " s\n";
    }
    return kOk;
}

inline ReachableSet obtain_reachable(const RunConfig& cfg, const FactoredMDP& mdp) {
    if (!cfg.reach.empty()) return parse_reachable(mdp, detail::read_file(cfg.reach));
    return reachable_k(mdp, detail::require_init(mdp), detail::check_k(mdp, cfg.ks.front()), cfg.reach_options());
}

inline std::string effective_path(const RunConfig& cfg) {
    if (!cfg.effective.empty()) return cfg.effective;
    if (cfg.out == "-") return "";
    const std::string ext = ".fmdp";
    if (cfg.out.size() > ext.size() && cfg.out.compare(cfg.out.size() - ext.size(), ext.size(), ext) == 0)
        return cfg.out.substr(0, cfg.out.size() - ext.size()) + ".effective.fmdp";
    return cfg.out + ".effective";
}

inline int cmd_reduce(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::Io io{cfg, out, err};
    auto mdp = detail::load_model(cfg);
    auto rs = obtain_reachable(cfg, mdp);
    auto em = effective_mdp(mdp, rs);
    io.artifact(serialize_mdp(em.reduced));
    if (auto path = effective_path(cfg); !path.empty()) detail::write_file(path, serialize_mdp(em.effective));
    const auto& r = em.report;
    auto& rep = io.report();
    if (cfg.sexpr) {
        rep << serialize_report(mdp, r);
    } else {
        rep << "removed values: " << r.removed_values.size() << "\n"
            << "removable variables: " << r.removable_variables.size() << "\n"
            << "pruned branches: " << r.pruned_branch_count << "\n"
            << "dropped actions: " << r.dropped_actions << "\n"
            << "relevant variables: " << r.relevant_variables.size() << "\n"
            << "state count: " << r.state_count.str() << "\n"
            << "reduced model: " << r.reduced_variables << " variables\n"
            << "effective model: " << r.effective_variables << " variables\n"
            << "reachable size: " << r.reachable_size.str() << "\n"
            << "effective size: " << r.effective_size.str() << "\n";
    }
    return kOk;
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::Io io{cfg, out, err};
    auto mdp = detail::load_model(cfg);
    std::optional<ReachableSet> rs;
    if (!cfg.reach.empty()) rs = parse_reachable(mdp, detail::read_file(cfg.reach));
    auto states = enumerate_states(mdp, rs ? &*rs : nullptr, cfg.max_states);
    auto sol = value_iteration(mdp, states, cfg.solve_options());
    io.artifact(serialize_solution(mdp, sol));
    auto& rep = io.report();
    if (cfg.sexpr) rep << "(solve (beta " << sexpr::format_real(sol.beta) << ") (sweeps " << sol.sweeps << ") (states "
                       << sol.states.size() << ")";
    else rep << "solved " << sol.states.size() << " states in " << sol.sweeps << " sweeps (beta " << sol.beta << ")\n";
    if (mdp.init) {
        for (const auto& s : initial_states(mdp, *mdp.init)) {
            auto v = sol.value(s);
            if (cfg.sexpr) {
                rep << "\n  (initial " << state_name(mdp, s) << " "
                    << (v ? "(value " + sexpr::format_real(*v) + ")" : std::string("(value none)")) << ")";
            } else if (v) {
                rep << "V" << state_name(mdp, s) << " = " << std::setprecision(12) << *v << std::defaultfloat << "\n";
            } else {
                rep << "initial state " << state_name(mdp, s) << " is outside the solved state set\n";
            }
        }
    }
    if (cfg.sexpr) rep << ")\n";
    return kOk;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::Io io{cfg, out, err};
    auto mdp = detail::load_model(cfg);
    const auto& init = detail::require_init(mdp);
    VerifyOptions vo;
    vo.ks = cfg.ks;
    for (int k : vo.ks) detail::check_k(mdp, k);
    vo.reach = cfg.reach_options();
    vo.solve = cfg.solve_options();
    vo.max_states = cfg.max_states;
    VerificationReport rep;
    if (!cfg.reach.empty())
        rep = verify_sets(mdp, init, {parse_reachable(mdp, detail::read_file(cfg.reach))}, vo, cfg.input);
    else
        rep = verify_instance(mdp, init, vo, cfg.input);
    auto& os = io.report();
    if (cfg.sexpr) {
        os << serialize_verification(mdp, rep);
    } else {
        auto flag = [](bool b) { return b ? "pass" : "FAIL"; };
        os << "instance: " << cfg.input << "\noracle reachable states: " << rep.oracle_size << "\n";
        for (const auto& r : rep.runs) {
            os << "k=" << r.k << ": " << r.rs.iterations << " levels, " << r.rs.excl.size() << " constraints, "
               << r.consistent.str() << " consistent, gap " << r.completeness.gap.str() << ", "
               << r.soundness_violations.size() << " soundness violations";
            if (r.values) {
                if (r.values->closed) os << ", value discrepancy " << r.values->max_discrepancy;
                else os << ", closure violation: " << r.values->closure_error;
            }
            os << "\n";
            for (const auto& s : r.soundness_violations) os << "  unsound: " << state_name(mdp, s) << "\n";
            for (const auto& s : r.completeness.samples) os << "  gap sample: " << state_name(mdp, s) << "\n";
        }
        os << "soundness: " << flag(rep.sound) << "\nmonotonicity: " << flag(rep.monotone)
           << "\nlevel monotonicity: " << flag(rep.levels_monotone) << "\nvalue preservation: "
           << flag(rep.values_preserved) << "\nresult: " << flag(rep.passed()) << "\n";
    }
    return rep.passed() ? kOk : kFailure;
}

inline int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    detail::Io io{cfg, out, err};
    FactoredMDP mdp;
    if (cfg.input == "lights") {
        if (cfg.n < 1) throw UsageError("--n must be >= 1");
        mdp = gen::lights(cfg.n, cfg.goal);
    } else if (cfg.input == "paint") {
        mdp = gen::paint();
    } else if (cfg.input == "factory") {
        if (cfg.vars < 6 || cfg.actions < 2) throw UsageError("factory needs --vars >= 6 and --actions >= 2");
        mdp = gen::factory({cfg.vars, cfg.actions, cfg.seed, cfg.starved});
    } else if (cfg.input == "random") {
        if (cfg.vars < 1 || cfg.actions < 1) throw UsageError("random needs --vars >= 1 and --actions >= 1");
        gen::RandomParams p;
        p.vars = cfg.vars;
        p.actions = cfg.actions;
        p.depth = cfg.depth;
        p.post_tests = cfg.post;
        p.seed = cfg.seed;
        mdp = gen::random_mdp(p);
    } else {
        throw UsageError("unknown generator '" + cfg.input + "' (lights, paint, factory, random)");
    }
    require_valid(mdp);
    io.artifact(serialize_mdp(mdp));
    return kOk;
}

/// Runs one command and maps failures onto exit codes; diagnostics go to `err`.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        cfg.check();
        if (cfg.command == "analyze") return cmd_analyze(cfg, out, err);
        if (cfg.command == "reduce") return cmd_reduce(cfg, out, err);
        if (cfg.command == "solve") return cmd_solve(cfg, out, err);
        if (cfg.command == "verify") return cmd_verify(cfg, out, err);
        if (cfg.command == "gen") return cmd_gen(cfg, out, err);
        throw UsageError("unknown command '" + cfg.command + "'");
    } catch (const ParseError& e) {
        err << "parse error at " << e.line() << ":" << e.column() << ": " << e.what() << "\n";
        return kParse;
    } catch (const ValidationError& e) {
        err << "invalid model: " << e.what() << "\n";
        return kValidation;
    } catch (const CapacityError& e) {
        err << "capacity exceeded: " << e.what() << "\n";
        return kCapacity;
    } catch (const ClosureError& e) {
        err << "closure violation: " << e.what() << "\n";
        return kClosure;
    } catch (const UsageError& e) {
        err << "usage: " << e.what() << "\n";
        return kFailure;
    } catch (const std::invalid_argument& e) {
        err << "usage: " << e.what() << "\n";
        return kFailure;
    }
}

} // namespace sreach::cli
