// Command-line front end: validate network description files, evaluate the
// achievable-rate region, optimize input distributions, simulate the
// block-Markov scheme at finite block length, and sweep mixed channels.
//
// Exit codes: 0 success, 1 user/spec error, 2 file parse error,
// 3 optimizer found nothing feasible.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tworelay/fme.hpp"
#include "tworelay/info.hpp"
#include "tworelay/netspec.hpp"
#include "tworelay/optim.hpp"
#include "tworelay/pmf.hpp"
#include "tworelay/region.hpp"
#include "tworelay/rng.hpp"
#include "tworelay/sim.hpp"

namespace {

using nlohmann::ordered_json;
using namespace tworelay;

constexpr const char* kVersion = "1.0.0";

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

std::string reading_name(Reading r) {
    return r == Reading::Asymmetric ? "asymmetric" : "symmetric";
}

// ---------------------------------------------------------------------------
// Shared pieces

NetworkSpecFile load_or_die(const std::string& path) {
    return load_network_spec(path);  // ParseError propagates to main
}

int require_dist(const NetworkSpecFile& spec) {
    if (!spec.has_dist) {
        std::cerr << "error: '" << spec.name
                  << "' carries no input distribution; run `tworelay optimize` "
                     "first or add a \"dist\" block\n";
        return 1;
    }
    const auto rep = validate(spec.dist);
    if (!rep.ok()) {
        std::cerr << "error: input distribution is invalid:\n" << rep.to_string();
        return 1;
    }
    return 0;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

ordered_json verdict_to_json(const RegionVerdict& v) {
    ordered_json checks = ordered_json::array();
    for (const auto& c : v.checks)
        checks.push_back({{"id", c.id}, {"lhs", c.lhs}, {"rhs", c.rhs},
                          {"slack", c.rhs - c.lhs}, {"ok", c.ok}});
    return {{"feasible", v.feasible},
            {"rate", v.feasible ? ordered_json(v.achieved_rate) : ordered_json(nullptr)},
            {"min_slack", v.min_slack()},
            {"checks", checks}};
}

ordered_json projection_to_json(const ProjectionResult& p) {
    ordered_json j;
    j["feasible"] = p.feasible;
    j["unbounded"] = p.unbounded;
    if (p.feasible && !p.unbounded)
        j["max_rate"] = p.max_value.to_double();
    else
        j["max_rate"] = nullptr;
    j["reduced_rows"] = p.reduced.rows.size();
    j["contradictions"] = p.contradictions.size();
    return j;
}

void print_verdict(const RegionVerdict& v, const char* title) {
    std::cout << title << "\n";
    std::cout << "  feasible: " << (v.feasible ? "yes" : "no") << "\n";
    if (v.feasible) std::cout << "  rate: " << fmt(v.achieved_rate) << "\n";
    std::cout << "  min slack: " << fmt(v.min_slack()) << "\n";
    for (const auto& c : v.checks)
        std::cout << "    " << (c.ok ? "ok  " : "FAIL") << "  " << c.id
                  << "  lhs=" << fmt(c.lhs) << "  rhs=" << fmt(c.rhs)
                  << "  slack=" << fmt(c.rhs - c.lhs) << "\n";
}

// ---------------------------------------------------------------------------
// validate

int cmd_validate(const std::string& path) {
    const NetworkSpecFile spec = load_or_die(path);
    std::cout << "spec: " << spec.name << "\n";
    if (!spec.description.empty()) std::cout << "about: " << spec.description << "\n";
    std::cout << "alphabets:";
    for (int i = 0; i < kNumVars; ++i) {
        const Var v = static_cast<Var>(i);
        std::cout << " " << var_name(v) << "=" << spec.alpha[v];
    }
    std::cout << "\ndist: " << (spec.has_dist ? "present" : "absent") << "\n";

    const NetworkDist d = spec.has_dist ? spec.dist : spec.skeleton();
    const ValidationReport rep = validate(d);
    if (rep.ok()) {
        std::cout << "validation: OK\n";
        return 0;
    }
    std::cout << "validation: " << rep.violations.size() << " problem(s)\n"
              << rep.to_string();
    return 1;
}

// ---------------------------------------------------------------------------
// region

int cmd_region(const std::string& path, const std::string& mode,
               const std::string& reading_str, bool fme_check,
               const std::string& out_path) {
    const NetworkSpecFile spec = load_or_die(path);
    if (int rc = require_dist(spec)) return rc;
    const Reading reading =
        reading_str == "symmetric" ? Reading::Symmetric : Reading::Asymmetric;

    const InfoTermValues t = info_vector(spec.dist);
    std::cout << "spec: " << spec.name << "\n";
    std::cout << "information terms (bits):\n" << t.to_string();

    ordered_json j;
    j["command"] = "region";
    j["version"] = kVersion;
    j["spec"] = spec.name;
    j["mode"] = mode;
    j["reading"] = reading_name(reading);
    ordered_json terms;
    for (const auto& def : term_definitions())
        terms[def.name] = t[def.id];
    j["terms"] = terms;

    if (mode == "individual" || mode == "both") {
        const RegionVerdict v = evaluate_region(t);
        print_verdict(v, "closed form (individual compression decoding):");
        j["individual"] = verdict_to_json(v);
        if (fme_check) {
            const CrossCheck cc = cross_check_region(t);
            std::cout << "stepwise elimination cross-check:\n";
            std::cout << "  agreement: " << (cc.agrees() ? "true" : "false") << "\n";
            if (cc.projection.feasible && !cc.projection.unbounded)
                std::cout << "  projected max rate: "
                          << fmt(cc.projection.max_value.to_double()) << "\n";
            if (!cc.agrees()) std::cout << "  detail: " << cc.detail << "\n";
            j["fme_check"] = {{"agrees", cc.agrees()},
                              {"feasibility_agrees", cc.feasibility_agrees},
                              {"rate_agrees", cc.rate_agrees},
                              {"projection", projection_to_json(cc.projection)},
                              {"detail", cc.detail}};
        }
    }

    if (mode == "joint" || mode == "both") {
        const InequalitySystem sys = joint_decoding_system(t, reading);
        const ProjectionResult pr = project_max(sys, "R");
        std::cout << "joint compression decoding (" << reading_name(reading)
                  << " reading, " << sys.rows.size() << " rows):\n";
        std::cout << "  feasible: " << (pr.feasible ? "yes" : "no") << "\n";
        if (pr.feasible && !pr.unbounded)
            std::cout << "  max rate: " << fmt(pr.max_value.to_double()) << "\n";
        j["joint"] = projection_to_json(pr);
        j["joint"]["rows"] = sys.rows.size();
    }

    if (mode == "both") {
        const ModeComparison cmp = compare_modes(t, reading);
        std::cout << "matched-row rhs gaps (joint minus individual):\n";
        for (const auto& g : cmp.gaps)
            std::cout << "    " << g.individual_id << " -> " << g.joint_id
                      << "  individual=" << fmt(g.individual_rhs)
                      << "  joint=" << fmt(g.joint_rhs) << "  gap=" << fmt(g.gap)
                      << "\n";
        std::cout << "  min gap: " << fmt(cmp.min_gap()) << "\n";
        const auto& ct = cmp.containment;
        std::cout << "containment of the individual region in the joint region\n"
                  << "  (grid " << ct.grid << "x" << ct.grid << " over [0,"
                  << fmt(ct.extent1) << "]x[0," << fmt(ct.extent2) << "]): "
                  << (ct.contains ? "holds" : "FAILS") << "\n";
        if (ct.has_counterexample)
            std::cout << "  counterexample: (" << fmt(ct.ce1) << ", " << fmt(ct.ce2)
                      << ") violates " << ct.violated_row << "\n";
        ordered_json gaps = ordered_json::array();
        for (const auto& g : cmp.gaps)
            gaps.push_back({{"individual_id", g.individual_id},
                            {"joint_id", g.joint_id},
                            {"individual_rhs", g.individual_rhs},
                            {"joint_rhs", g.joint_rhs},
                            {"gap", g.gap}});
        j["comparison"] = {
            {"reading", reading_name(cmp.reading)},
            {"min_gap", cmp.min_gap()},
            {"gaps", gaps},
            {"containment",
             {{"grid", ct.grid},
              {"extent1", ct.extent1},
              {"extent2", ct.extent2},
              {"contains", ct.contains},
              {"has_counterexample", ct.has_counterexample},
              {"counterexample",
               ct.has_counterexample
                   ? ordered_json({{"rate1", ct.ce1},
                                   {"rate2", ct.ce2},
                                   {"violated_row", ct.violated_row}})
                   : ordered_json(nullptr)}}}};
    }

    if (!out_path.empty()) {
        write_text_file(out_path, j.dump(2) + "\n");
        std::cout << "report written to " << out_path << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// optimize

int cmd_optimize(const std::string& path, int restarts, int iterations,
                 std::uint64_t seed, const std::string& out_path,
                 const std::string& report_path) {
    const NetworkSpecFile spec = load_or_die(path);

    OptimizerConfig cfg;
    cfg.restarts = restarts;
    cfg.iterations = iterations;
    cfg.seed = seed;
    std::cout << "spec: " << spec.name << "\n";
    std::cout << "optimizing: restarts=" << cfg.restarts
              << " iterations=" << cfg.iterations << " seed=" << cfg.seed << "\n";

    const OptimizeResult res = maximize_rate(spec.channel, spec.alpha, cfg);
    if (!res.any_feasible) {
        std::cerr << "error: no restart reached a feasible distribution; the "
                     "compression constraints failed everywhere tried (try more "
                     "restarts, or alphabets with room for the quantizers)\n";
        return 3;
    }

    int feasible_restarts = 0;
    for (double r : res.restart_rates)
        if (!std::isnan(r)) ++feasible_restarts;
    std::cout << "best rate: " << fmt(res.best_rate) << " (restart "
              << res.best_restart << "; " << feasible_restarts << "/"
              << res.restart_rates.size() << " restarts feasible)\n";
    std::cout << "min slack at best: " << fmt(res.verdict.min_slack()) << "\n";

    if (!out_path.empty()) {
        NetworkSpecFile out = spec;
        out.has_dist = true;
        out.dist = res.best;
        save_network_spec(out, out_path);
        std::cout << "distribution written to " << out_path << "\n";
    }
    if (!report_path.empty()) {
        ordered_json j;
        j["command"] = "optimize";
        j["version"] = kVersion;
        j["spec"] = spec.name;
        j["seed"] = cfg.seed;
        j["restarts"] = cfg.restarts;
        j["iterations"] = cfg.iterations;
        j["best_rate"] = res.best_rate;
        j["best_restart"] = res.best_restart;
        ordered_json rates = ordered_json::array();
        for (double r : res.restart_rates)
            rates.push_back(std::isnan(r) ? ordered_json(nullptr) : ordered_json(r));
        j["restart_rates"] = rates;
        j["verdict"] = verdict_to_json(res.verdict);
        write_text_file(report_path, j.dump(2) + "\n");
        std::cout << "report written to " << report_path << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& path, std::vector<int> ns, int blocks,
                 const std::vector<int>& bits, double eps, int trials,
                 std::uint64_t seed, bool joint_decoding,
                 const std::string& out_path) {
    const NetworkSpecFile spec = load_or_die(path);
    if (int rc = require_dist(spec)) return rc;

    SimParams base;
    base.blocks = blocks;
    base.epsilon = eps;
    base.trials = trials;
    base.seed = seed;
    base.joint_decoding = joint_decoding;
    if (!bits.empty()) {
        base.k_msg = bits[0];
        base.k_s1 = bits[1];
        base.k_s2 = bits[2];
        base.k_011 = bits[3];
        base.k_012 = bits[4];
        base.k_021 = bits[5];
        base.k_022 = bits[6];
        base.k_h1 = bits[7];
        base.k_h2 = bits[8];
    }
    if (ns.empty()) ns.push_back(base.n);

    // Validate every row's parameters up front.
    for (int n : ns) {
        SimParams p = base;
        p.n = n;
        const auto bad = p.invariant_violations();
        if (!bad.empty()) {
            std::cerr << "error: invalid simulation parameters at n=" << n << ":\n";
            for (const auto& b : bad) std::cerr << "  - " << b << "\n";
            return 1;
        }
    }

    std::string csv;
    csv += std::string("# tworelay ") + kVersion + " simulate\n";
    csv += "# spec: " + spec.name + "\n";
    csv += "# seed: " + std::to_string(seed) + "\n";
    csv += "# trials per row: " + std::to_string(trials) + "\n";
    csv += "# bits: msg=" + std::to_string(base.k_msg) +
           " s1=" + std::to_string(base.k_s1) + " s2=" + std::to_string(base.k_s2) +
           " l011=" + std::to_string(base.k_011) + " l012=" + std::to_string(base.k_012) +
           " l021=" + std::to_string(base.k_021) + " l022=" + std::to_string(base.k_022) +
           " h1=" + std::to_string(base.k_h1) + " h2=" + std::to_string(base.k_h2) + "\n";
    csv += "n,blocks,epsilon,joint_decoding,trials,errors,p_hat,ci_lo,ci_hi";
    csv += ",rate_msg,rate_s1,rate_s2,rate_011,rate_012,rate_021,rate_022,rate_h1,rate_h2";
    for (int s = 0; s < kNumStages; ++s)
        csv += std::string(",ff_") + stage_name(static_cast<Stage>(s));
    csv += "\n";

    const SimContext ctx(spec.dist);
    for (int n : ns) {
        SimParams p = base;
        p.n = n;
        const ErrorEstimate est = estimate_error(ctx, p);
        csv += std::to_string(n) + "," + std::to_string(p.blocks) + "," +
               fmt(p.epsilon) + "," + (p.joint_decoding ? "1" : "0") + "," +
               std::to_string(est.trials) + "," + std::to_string(est.errors) + "," +
               fmt(est.p_hat) + "," + fmt(est.ci_lo) + "," + fmt(est.ci_hi);
        const int ks[] = {p.k_msg, p.k_s1, p.k_s2, p.k_011, p.k_012,
                          p.k_021, p.k_022, p.k_h1, p.k_h2};
        for (int k : ks) csv += "," + fmt(p.realized_rate(k));
        for (int s = 0; s < kNumStages; ++s) {
            const auto it = est.first_failure.find(static_cast<Stage>(s));
            csv += "," + std::to_string(it == est.first_failure.end() ? 0 : it->second);
        }
        csv += "\n";
        std::cout << "n=" << n << ": " << est.errors << "/" << est.trials
                  << " trials in error, p_hat=" << fmt(est.p_hat) << " [95% "
                  << fmt(est.ci_lo) << ", " << fmt(est.ci_hi) << "]\n";
    }

    if (!out_path.empty()) {
        write_text_file(out_path, csv);
        std::cout << "CSV written to " << out_path << "\n";
    } else {
        std::cout << csv;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const std::string& path, const std::string& mix_path, int points,
              bool reoptimize, int restarts, int iterations, std::uint64_t seed,
              const std::string& out_path) {
    const NetworkSpecFile a = load_or_die(path);
    const NetworkSpecFile b = load_or_die(mix_path);
    for (int i = 0; i < kNumVars; ++i) {
        const Var v = static_cast<Var>(i);
        if (a.alpha[v] != b.alpha[v]) {
            std::cerr << "error: alphabet mismatch between endpoints: "
                      << var_name(v) << " is " << a.alpha[v] << " vs " << b.alpha[v]
                      << "\n";
            return 1;
        }
    }
    if (!reoptimize) {
        if (int rc = require_dist(a)) return rc;
    }

    std::string csv;
    csv += std::string("# tworelay ") + kVersion + " sweep\n";
    csv += "# spec: " + a.name + "\n";
    csv += "# mix: " + b.name + "\n";
    csv += "# seed: " + std::to_string(seed) + "\n";
    csv += std::string("# mode: ") + (reoptimize ? "reoptimize" : "fixed-dist") + "\n";
    csv += "lambda,feasible,rate,min_slack\n";

    for (int i = 0; i < points; ++i) {
        const double lam =
            points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
        ConditionalTable channel = a.channel;
        for (std::size_t k = 0; k < channel.data().size(); ++k)
            channel.data()[k] =
                (1.0 - lam) * a.channel.data()[k] + lam * b.channel.data()[k];

        bool feasible = false;
        double rate = 0.0, slack = 0.0;
        if (reoptimize) {
            OptimizerConfig cfg;
            cfg.restarts = restarts;
            cfg.iterations = iterations;
            cfg.seed = mix_seed(seed, static_cast<std::uint64_t>(i));
            const OptimizeResult res = maximize_rate(channel, a.alpha, cfg);
            feasible = res.any_feasible;
            if (feasible) {
                rate = res.best_rate;
                slack = res.verdict.min_slack();
            }
        } else {
            NetworkDist d = a.dist;
            d.channel = channel;
            const RegionVerdict v = evaluate_region(d);
            feasible = v.feasible;
            rate = v.achieved_rate;
            slack = v.min_slack();
        }
        csv += fmt(lam);
        csv += feasible ? ",1," + fmt(rate) + "," + fmt(slack)
                        : ",0,nan,nan";
        csv += "\n";
    }

    if (!out_path.empty()) {
        write_text_file(out_path, csv);
        std::cout << "CSV written to " << out_path << "\n";
    } else {
        std::cout << csv;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-relay feedback network workbench"};
    app.set_version_flag("--version", std::string("tworelay ") + kVersion);
    app.require_subcommand(1);

    const std::uint64_t default_seed = 1;

    // validate ---------------------------------------------------------------
    std::string v_path;
    auto* v = app.add_subcommand("validate", "Check a network description file");
    v->add_option("spec", v_path, "network description (JSON)")->required();

    // region -----------------------------------------------------------------
    std::string r_path, r_mode = "individual", r_reading = "asymmetric", r_out;
    bool r_fme = false;
    auto* r = app.add_subcommand(
        "region", "Evaluate the achievable-rate region at the file's distribution");
    r->add_option("spec", r_path, "network description (JSON, must carry dist)")
        ->required();
    r->add_option("--mode", r_mode, "individual | joint | both")
        ->check(CLI::IsMember({"individual", "joint", "both"}));
    r->add_option("--reading", r_reading,
                  "joint-bound bookkeeping: asymmetric | symmetric")
        ->check(CLI::IsMember({"asymmetric", "symmetric"}));
    r->add_flag("--fme-check", r_fme,
                "verify the closed form against stepwise elimination");
    r->add_option("--out", r_out, "write a JSON report here");

    // optimize ---------------------------------------------------------------
    std::string o_path, o_out, o_report;
    int o_restarts = 16, o_iters = 400;
    std::uint64_t o_seed = default_seed;
    auto* o = app.add_subcommand("optimize",
                                 "Search for a rate-maximizing input distribution");
    o->add_option("spec", o_path, "network description (JSON)")->required();
    o->add_option("--restarts", o_restarts, "independent restarts")
        ->check(CLI::Range(1, 10000));
    o->add_option("--iters", o_iters, "iterations per restart")
        ->check(CLI::Range(1, 1000000));
    o->add_option("--seed", o_seed, "RNG seed")->envname("TWORELAY_SEED");
    o->add_option("--out", o_out, "write the spec with the best dist here");
    o->add_option("--report", o_report, "write a JSON report here");

    // simulate ----------------------------------------------------------------
    std::string s_path, s_out;
    std::vector<int> s_ns, s_bits;
    int s_blocks = 4, s_trials = 100;
    double s_eps = 0.3;
    std::uint64_t s_seed = default_seed;
    bool s_joint = false;
    auto* s = app.add_subcommand(
        "simulate", "Monte-Carlo the block-Markov scheme at finite block length");
    s->add_option("spec", s_path, "network description (JSON, must carry dist)")
        ->required();
    s->add_option("--n", s_ns, "block lengths, e.g. 6,12")
        ->delimiter(',')
        ->check(CLI::Range(1, 4096));
    s->add_option("--blocks", s_blocks, "blocks per transmission")
        ->check(CLI::Range(2, 1024));
    s->add_option("--bits", s_bits,
                  "9 budgets: msg,s1,s2,l011,l012,l021,l022,h1,h2")
        ->delimiter(',')
        ->expected(9);
    s->add_option("--eps", s_eps, "typicality tolerance in (0,1)");
    s->add_option("--trials", s_trials, "Monte-Carlo trials per row")
        ->check(CLI::Range(1, 10000000));
    s->add_option("--seed", s_seed, "RNG seed")->envname("TWORELAY_SEED");
    s->add_flag("--joint-decoding", s_joint,
                "decode both quantization indices jointly");
    s->add_option("--out", s_out, "write the CSV here (default: stdout)");

    // sweep -------------------------------------------------------------------
    std::string w_path, w_mix, w_out;
    int w_points = 11, w_restarts = 8, w_iters = 200;
    bool w_reopt = false;
    std::uint64_t w_seed = default_seed;
    auto* w = app.add_subcommand(
        "sweep", "Rate along the segment between two channels (plot data)");
    w->add_option("spec", w_path, "base network description (JSON)")->required();
    w->add_option("--mix", w_mix, "other endpoint (same alphabets)")->required();
    w->add_option("--points", w_points, "grid points on [0,1]")
        ->check(CLI::Range(1, 10001));
    w->add_flag("--reoptimize", w_reopt,
                "optimize the distribution at every grid point");
    w->add_option("--restarts", w_restarts, "restarts when reoptimizing")
        ->check(CLI::Range(1, 10000));
    w->add_option("--iters", w_iters, "iterations when reoptimizing")
        ->check(CLI::Range(1, 1000000));
    w->add_option("--seed", w_seed, "RNG seed")->envname("TWORELAY_SEED");
    w->add_option("--out", w_out, "write the CSV here (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints the message
        return 1;
    }

    try {
        if (*v) return cmd_validate(v_path);
        if (*r) return cmd_region(r_path, r_mode, r_reading, r_fme, r_out);
        if (*o) return cmd_optimize(o_path, o_restarts, o_iters, o_seed, o_out, o_report);
        if (*s)
            return cmd_simulate(s_path, s_ns, s_blocks, s_bits, s_eps, s_trials,
                                s_seed, s_joint, s_out);
        if (*w)
            return cmd_sweep(w_path, w_mix, w_points, w_reopt, w_restarts, w_iters,
                             w_seed, w_out);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
