#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "agvcost/agv_sim.hpp"
#include "agvcost/csvio.hpp"
#include "agvcost/estimators.hpp"
#include "agvcost/kvconfig.hpp"
#include "agvcost/planner.hpp"
#include "agvcost/traffic_graph.hpp"

namespace agvcost {

struct ForeignReservation {
    ArcId arc;
    std::string agv;
    double entry = 0.0, exit = 0.0;
};

struct MissionSettings {
    std::string agv = "AGV_1";
    NodeId src, dst;
    double drained_frac = 0.96;  // battery age of a "drained" vehicle
    std::vector<ForeignReservation> reservations;
};

// Config and graph resolved into ready-to-run pieces. Cost models are built
// for every arc: base_time = length / v_max, noise_std = noise_frac · base_time.
struct Setup {
    KvConfig kv;
    TrafficGraph graph;
    SimConfig sim;
    EstimatorSpec est;
    double v_max = 1.0;
    bool per_agv_banks = false;
    MissionSettings mission;
    std::uint64_t digest = 0;  // canonical config digest, seed override applied
};

Setup load_setup(const std::string& config_path, const std::string& graph_path,
                 std::optional<std::uint64_t> seed_override);

// One bank per arc, each fed a single noise-free observation taken at the
// given battery age — the "initial values" a fleet would carry into a mission.
BankSet primed_banks(const Setup& s, double battery_offset);

ReservationTable reservation_table(const Setup& s);

// Everything needed to reproduce a run bit-exactly (given the same build).
// The timestamp is informational and never written into output files.
struct RunManifest {
    std::optional<std::uint64_t> seed_override;
    std::string config_path, graph_path, out_path;
    std::string timestamp;

    static RunManifest make(std::optional<std::uint64_t> seed_override, std::string config,
                            std::string graph, std::string out);
    std::string describe() const;
};

struct CommonArgs {
    std::string config_path, graph_path, out_path;
    std::optional<std::uint64_t> seed;
};

struct EstimateArgs {
    std::string series_path, out_path;
    std::string config_path;  // optional source of estimator defaults
    std::string method = "kf";
    std::optional<std::size_t> window;
    std::optional<double> lambda, alpha1, alpha2, alpha3, q, r;
    std::optional<std::uint64_t> seed;  // accepted for interface uniformity
};

struct MissionArgs {
    std::string config_path, graph_path, out_path;
    std::optional<std::uint64_t> seed;
    std::string src, dst;              // empty → mission.src / mission.dst from config
    std::string battery_age = "new";   // new | drained
};

struct CompareReport {
    struct Row {
        std::string method;
        ErrorStats stats;
    };
    std::vector<Row> rows;  // lsmw, rls, rls-adaptive, kf
    std::string winner;     // lowest rmse; ties go to the earlier method
    std::size_t series_length = 0;
    std::uint64_t config_digest = 0;
    double plateau = 0.0;  // base_time · friction of the reference arc
    double lsmw_rmse_norm = 0.0, kf_rmse_norm = 0.0;

    std::string to_text() const;
    std::string to_csv() const;
};

struct MissionOutcome {
    std::vector<ArcId> route;  // arcs actually traversed
    bool halted = false;
    std::size_t reroutes = 0;
};

void cmd_simulate(const CommonArgs& args, std::ostream& status);
void cmd_estimate(const EstimateArgs& args, std::ostream& status);
CompareReport cmd_compare(const CommonArgs& args, std::ostream& status);
MissionOutcome cmd_mission(const MissionArgs& args, std::ostream& status);

// CLI11 front end; maps errors to the exit-code contract
// (0 ok, 1 internal, 2 bad input, 3 mission aborted).
int run_cli(int argc, char** argv);

}  // namespace agvcost
