#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "agvcost/errors.hpp"
#include "agvcost/traffic_graph.hpp"
#include "agvcost/types.hpp"

namespace agvcost {

// Piecewise-linear battery discharge curve over knots of
// (fraction of life, state of charge).
struct BatteryProfile {
    double t_empty = 3600.0;  // seconds until fully drained
    std::vector<std::pair<double, double>> knots = default_knots();

    // An Eneloop-like curve: short initial dip, long flat plateau, steep tail.
    static std::vector<std::pair<double, double>> default_knots() {
        return {{0.0, 1.0}, {0.05, 0.93}, {0.80, 0.88}, {0.95, 0.30}, {1.0, 0.0}};
    }

    void validate() const;
    double soc_at(double t) const;       // exact at knots, 0 for t ≥ t_empty
    double time_at_soc(double level) const;  // first crossing time
};

// SoC → speed fraction s ∈ (0, 1]. The ramp shape produces the
// fall/plateau/rise duration curve: slightly below peak near full charge
// (run-in), full speed across the plateau band, and a linear collapse toward
// s_min as the charge approaches the halt threshold.
struct SpeedResponse {
    enum class Kind { ramp, constant };

    Kind kind = Kind::ramp;
    double s_min = 0.12;
    double runin_drop = 0.2;   // 1 − s at full charge
    double plateau_lo = 0.85;
    double plateau_hi = 0.93;
    double ramp_lo = 0.05;     // SoC at which s reaches s_min (the halt level)

    void validate() const;
    double operator()(double soc) const;
};

struct CostModel {
    double base_time = 5.0;   // length / v_max, seconds
    double friction = 1.0;    // f ≥ 1
    SpeedResponse speed;
    double noise_std = 0.025;  // seconds
    double halt_soc = 0.05;
};

// Deterministic Gaussian source: mt19937_64 + Box–Muller. Hand-rolled so the
// stream is stable across standard-library implementations.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : gen_(seed) {}
    double normal();

private:
    double unit();  // uniform on (0, 1]

    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// duration = base_time · f / s(SoC(t)), without/with additive Gaussian noise.
// Noise is resampled if the sum would be non-positive. Throws RobotHalted
// once SoC(t) is at or below the halt threshold.
double noise_free_traversal_time(const CostModel& model, const BatteryProfile& battery, double t);
double true_traversal_time(const CostModel& model, const BatteryProfile& battery, double t,
                           GaussianRng& rng);

struct SimConfig {
    std::uint64_t seed = 42;
    double dt = 1.0;  // sampling interval, seconds
    BatteryProfile battery;
    std::map<ArcId, CostModel> models;  // ground-truth model per arc
    ArcId reference_arc;
    std::string agv = "AGV_1";
    double v_max = 1.0;  // m/s
};

// Samples the arc at start times 0, Δ, 2Δ, … until the robot halts; this is
// the reference synthetic series (one full battery life).
std::vector<TraversalObservation> generate_reference_series(const SimConfig& config,
                                                            const ArcId& arc);

// Mission time starts at 0; battery_offset ages the battery independently of
// the mission clock (a "drained" vehicle starts life-worn at clock 0).
struct MissionClock {
    double now = 0.0;
    double battery_offset = 0.0;
};

struct MissionResult {
    std::vector<TraversalObservation> observations;
    bool halted = false;
};

// Traverses the arcs in order: each arc's entry time is the previous arc's
// exit time, and the shared clock advances by each measured duration. A halt
// mid-path returns the partial series with the halted flag set.
MissionResult run_mission(const TrafficGraph& g, const SimConfig& config, const std::string& agv,
                          const std::vector<ArcId>& path, MissionClock& clock, GaussianRng& rng);

}  // namespace agvcost
