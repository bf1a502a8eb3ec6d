// certeig_cli: batch front end.
//
//   certeig_cli <check|source|power|newton|pipeline|diagnose|oracle> --scenario FILE [options]
//
// Every flag can also be set through the environment with the CERTEIG_ prefix
// (CERTEIG_SCENARIO, CERTEIG_OUT, CERTEIG_SEED, CERTEIG_TARGET, CERTEIG_SCHEDULE, CERTEIG_ZETA,
// CERTEIG_ORACLE, CERTEIG_THREADS, CERTEIG_TIMING); command-line values win.

#include <iostream>
#include <map>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "certeig/cli_runner.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Certified principal eigenpair solver for 1-D slab transport"};
    app.require_subcommand(1, 1);

    certeig::RunConfig cfg;
    double target = 0.0;
    std::string schedule;
    double zeta = 0.0;
    std::string oracle = "on";
    std::string timing = "on";
    const std::map<std::string, bool> on_off{{"on", true}, {"off", false}};

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--scenario", cfg.scenario, "scenario JSON, or builtin:const|het|ref")
            ->envname("CERTEIG_SCENARIO")
            ->required();
        sub->add_option("--out", cfg.out_dir, "output directory")->envname("CERTEIG_OUT");
        sub->add_option("--seed", cfg.seed, "random seed")->envname("CERTEIG_SEED");
        sub->add_option("--target", target, "accuracy target")->envname("CERTEIG_TARGET");
        sub->add_option("--schedule", schedule, "Newton tolerance schedule")
            ->check(CLI::IsMember({"quad", "lin", "hybrid"}))
            ->envname("CERTEIG_SCHEDULE");
        sub->add_option("--zeta", zeta, "linear schedule reduction factor")->envname("CERTEIG_ZETA");
        sub->add_option("--oracle", oracle, "dense oracle checks")
            ->check(CLI::IsMember({"on", "off"}))
            ->envname("CERTEIG_ORACLE");
        sub->add_option("--threads", cfg.threads, "kernel threads; > 1 gives up bitwise reproducibility")
            ->check(CLI::PositiveNumber)
            ->envname("CERTEIG_THREADS");
        sub->add_option("--timing", timing, "write wallclock_ms (off: byte-identical traces)")
            ->check(CLI::IsMember({"on", "off"}))
            ->envname("CERTEIG_TIMING");
    };
    const std::pair<const char*, const char*> subs[] = {
        {"check", "validate the scenario and report alpha, M, rho"},
        {"source", "certified source solves on random right-hand sides"},
        {"power", "perturbed power iteration"},
        {"newton", "power warm-up followed by inexact Newton"},
        {"pipeline", "power phase to the Newton neighbourhood, then Newton to the target"},
        {"diagnose", "dense oracle constants, sandwich, DR bound, projector checks"},
        {"oracle", "dense eigendecomposition; writes oracle_u.csv"},
    };
    for (const auto& [name, help] : subs) {
        add_common(app.add_subcommand(name, help));
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--target") > 0) {
        cfg.target = target;
    }
    if (sub->count("--schedule") > 0) {
        cfg.schedule = schedule;
    }
    if (sub->count("--zeta") > 0) {
        cfg.zeta = zeta;
    }
    cfg.oracle = on_off.at(oracle);
    cfg.timing = on_off.at(timing);

    return certeig::run(certeig::parse_subcommand(sub->get_name()), cfg, std::cerr);
}
