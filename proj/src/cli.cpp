#include <iostream>

#include <CLI11.hpp>

#include "agvcost/harness.hpp"

namespace agvcost {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitMissionAborted = 3;

void add_common(CLI::App* cmd, CommonArgs& args, bool graph_required = true) {
    cmd->add_option("--config", args.config_path, "key-value config file")->required();
    auto* g = cmd->add_option("--graph", args.graph_path, "graph document");
    if (graph_required)
        g->required();
    cmd->add_option("--seed", args.seed, "seed override (takes precedence over config)");
    cmd->add_option("--out", args.out_path, "output CSV path")->required();
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"online arc-traversal-time estimation and planning for AGV fleets"};
    app.require_subcommand(1);

    CommonArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "generate the reference synthetic series");
    add_common(sim, sim_args);

    EstimateArgs est_args;
    auto* est = app.add_subcommand("estimate", "run one estimator over a series CSV");
    est->add_option("series", est_args.series_path, "input series CSV")->required();
    est->add_option("--method", est_args.method, "lsmw | rls | rls-adaptive | kf");
    est->add_option("--config", est_args.config_path, "optional config for estimator defaults");
    est->add_option("--seed", est_args.seed, "accepted for interface uniformity");
    est->add_option("--out", est_args.out_path, "output CSV path")->required();
    est->add_option("--window", est_args.window, "lsmw window size");
    est->add_option("--lambda", est_args.lambda, "rls forgetting factor");
    est->add_option("--alpha1", est_args.alpha1, "adaptive lambda depth");
    est->add_option("--alpha2", est_args.alpha2, "adaptive lambda slope");
    est->add_option("--alpha3", est_args.alpha3, "adaptive lambda threshold");
    est->add_option("--q", est_args.q, "kf process-noise variance");
    est->add_option("--r", est_args.r, "kf measurement-noise variance");

    CommonArgs cmp_args;
    auto* cmp = app.add_subcommand("compare", "run all estimators on the reference series");
    add_common(cmp, cmp_args);

    MissionArgs mis_args;
    auto* mis = app.add_subcommand("mission", "closed-loop plan/traverse/replan run");
    mis->add_option("--config", mis_args.config_path, "key-value config file")->required();
    mis->add_option("--graph", mis_args.graph_path, "graph document")->required();
    mis->add_option("--seed", mis_args.seed, "seed override");
    mis->add_option("--out", mis_args.out_path, "mission log CSV path")->required();
    mis->add_option("--src", mis_args.src, "start node (default mission.src from config)");
    mis->add_option("--dst", mis_args.dst, "destination node (default mission.dst)");
    mis->add_option("--battery-age", mis_args.battery_age, "new | drained");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitBadInput;
    }

    try {
        if (sim->parsed()) {
            RunManifest m = RunManifest::make(sim_args.seed, sim_args.config_path,
                                              sim_args.graph_path, sim_args.out_path);
            std::cerr << m.describe() << "\n";
            cmd_simulate(sim_args, std::cout);
        } else if (est->parsed()) {
            cmd_estimate(est_args, std::cout);
        } else if (cmp->parsed()) {
            cmd_compare(cmp_args, std::cout);
        } else if (mis->parsed()) {
            MissionOutcome outcome = cmd_mission(mis_args, std::cout);
            if (outcome.halted)
                return kExitMissionAborted;
        }
        return kExitOk;
    } catch (const PlanningError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissionAborted;
    } catch (const RobotHalted&) {
        std::cerr << "error: robot halted (battery at or below the halt threshold)\n";
        return kExitMissionAborted;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace agvcost
