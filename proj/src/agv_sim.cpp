#include "agvcost/agv_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace agvcost {

void BatteryProfile::validate() const {
    if (!(t_empty > 0.0))
        throw UsageError("t_empty must be positive");
    if (knots.size() < 2)
        throw UsageError("battery profile needs at least 2 knots");
    if (knots.front().first != 0.0 || knots.front().second != 1.0)
        throw UsageError("battery profile must start at (0, 1)");
    if (knots.back().first != 1.0 || knots.back().second != 0.0)
        throw UsageError("battery profile must end at (1, 0)");
    for (std::size_t i = 1; i < knots.size(); ++i) {
        if (!(knots[i].first > knots[i - 1].first))
            throw UsageError("battery knot fractions must be strictly increasing");
        if (knots[i].second > knots[i - 1].second)
            throw UsageError("battery SoC must be non-increasing");
    }
}

double BatteryProfile::soc_at(double t) const {
    if (t < 0.0)
        throw UsageError("time must be non-negative");
    double fr = t / t_empty;
    if (fr >= 1.0)
        return 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        auto [f0, s0] = knots[i - 1];
        auto [f1, s1] = knots[i];
        if (fr <= f1)
            return s0 + (s1 - s0) * (fr - f0) / (f1 - f0);
    }
    return 0.0;
}

double BatteryProfile::time_at_soc(double level) const {
    if (level >= knots.front().second)
        return 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        auto [f0, s0] = knots[i - 1];
        auto [f1, s1] = knots[i];
        if (level >= s1 && s0 > s1) {
            double fr = f0 + (f1 - f0) * (s0 - level) / (s0 - s1);
            return fr * t_empty;
        }
    }
    return t_empty;
}

void SpeedResponse::validate() const {
    if (kind == Kind::constant)
        return;
    if (!(s_min > 0.0) || s_min > 1.0)
        throw UsageError("s_min must lie in (0, 1]");
    if (runin_drop < 0.0 || runin_drop >= 1.0)
        throw UsageError("runin_drop must lie in [0, 1)");
    if (!(0.0 < ramp_lo && ramp_lo < plateau_lo && plateau_lo < plateau_hi && plateau_hi < 1.0))
        throw UsageError("speed response needs 0 < ramp_lo < plateau_lo < plateau_hi < 1");
}

double SpeedResponse::operator()(double soc) const {
    if (kind == Kind::constant)
        return 1.0;
    if (soc >= plateau_hi)
        return 1.0 - runin_drop * (soc - plateau_hi) / (1.0 - plateau_hi);
    if (soc >= plateau_lo)
        return 1.0;
    double s = s_min + (1.0 - s_min) * (soc - ramp_lo) / (plateau_lo - ramp_lo);
    return std::clamp(s, s_min, 1.0);
}

double GaussianRng::unit() {
    // 53-bit mantissa, shifted into (0, 1] so log() below is always finite.
    return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
}

double GaussianRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = unit();
    double u2 = unit();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double noise_free_traversal_time(const CostModel& model, const BatteryProfile& battery, double t) {
    double soc = battery.soc_at(t);
    if (soc <= model.halt_soc)
        throw RobotHalted(t);
    double s = model.speed(soc);
    if (!(s > 0.0))
        throw NumericError("speed response returned a non-positive fraction");
    return model.base_time * model.friction / s;
}

double true_traversal_time(const CostModel& model, const BatteryProfile& battery, double t,
                           GaussianRng& rng) {
    double d0 = noise_free_traversal_time(model, battery, t);
    if (model.noise_std <= 0.0)
        return d0;
    double d;
    do {
        d = d0 + rng.normal() * model.noise_std;
    } while (d <= 0.0);
    return d;
}

std::vector<TraversalObservation> generate_reference_series(const SimConfig& config,
                                                            const ArcId& arc) {
    auto it = config.models.find(arc);
    if (it == config.models.end())
        throw UsageError("no cost model for arc '" + arc + "'");
    if (!(config.dt > 0.0))
        throw UsageError("sampling interval must be positive");
    config.battery.validate();

    GaussianRng rng(config.seed);
    std::vector<TraversalObservation> out;
    for (std::size_t k = 0;; ++k) {
        double t = static_cast<double>(k) * config.dt;
        double d;
        try {
            d = true_traversal_time(it->second, config.battery, t, rng);
        } catch (const RobotHalted&) {
            break;
        }
        out.push_back({arc, config.agv, t, d});
    }
    return out;
}

MissionResult run_mission(const TrafficGraph& g, const SimConfig& config, const std::string& agv,
                          const std::vector<ArcId>& path, MissionClock& clock, GaussianRng& rng) {
    for (std::size_t i = 0; i < path.size(); ++i) {
        const Arc& a = g.arc(path[i]);
        if (i > 0 && g.arc(path[i - 1]).to != a.from)
            throw UsageError("path is not contiguous at arc '" + path[i] + "'");
        if (config.models.find(path[i]) == config.models.end())
            throw UsageError("no cost model for arc '" + path[i] + "'");
    }

    MissionResult res;
    for (const auto& id : path) {
        double d;
        try {
            d = true_traversal_time(config.models.at(id), config.battery,
                                    clock.battery_offset + clock.now, rng);
        } catch (const RobotHalted&) {
            res.halted = true;
            return res;
        }
        res.observations.push_back({id, agv, clock.now, d});
        clock.now += d;
    }
    return res;
}

}  // namespace agvcost
