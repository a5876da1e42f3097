#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "agvcost/errors.hpp"
#include "agvcost/estimators.hpp"
#include "agvcost/types.hpp"

namespace agvcost {

enum class ArcKind { corridor, port_approach };

struct Arc {
    ArcId id;
    NodeId from, to;
    double length = 0.0;  // meters
    ArcKind kind = ArcKind::corridor;
};

// Directed transportation-floor graph. Topology is immutable after loading
// and validation; estimation state lives in the banks, not here.
//
// Document grammar (line oriented, whitespace separated, `#` comments):
//   node <id>
//   arc <id> <from> <to> <length_m> [corridor|port-approach]
class TrafficGraph {
public:
    static TrafficGraph load(const std::string& text);

    // Emits the same grammar, nodes sorted lexicographically, then arcs.
    std::string serialize() const;

    void add_node(const NodeId& id);
    void add_arc(Arc arc);

    const std::set<NodeId>& nodes() const { return nodes_; }
    const std::map<ArcId, Arc>& arcs() const { return arcs_; }
    bool has_node(const NodeId& id) const { return nodes_.count(id) != 0; }
    bool has_arc(const ArcId& id) const { return arcs_.count(id) != 0; }
    const Arc& arc(const ArcId& id) const;

    // Outgoing arc ids, lexicographically sorted (keeps searches deterministic).
    const std::vector<ArcId>& outgoing(const NodeId& id) const;

    double nominal_time(const ArcId& id, double v_max) const;

private:
    std::set<NodeId> nodes_;
    std::map<ArcId, Arc> arcs_;
    std::map<NodeId, std::vector<ArcId>> adjacency_;
};

using EstimatorVariant = std::variant<LsmwState, RlsState, KfState>;

// Per-arc online cost state: one filter plus a nominal-time fallback
// (length / v_max) used until the filter has produced its first estimate.
//
// rls and kf consume the first recorded observation as initialization, so
// they are warmed from the second call on; lsmw warms once its window fills.
// A kf bank without explicit noise levels uses the prior R = (1% · nominal)²
// and Q = q_over_r · R.
class ArcCostBank {
public:
    ArcCostBank(ArcId arc, EstimatorSpec spec, double nominal_time);
    // Wraps an existing filter state (used by tests to inject edge cases).
    ArcCostBank(ArcId arc, EstimatorVariant state, double nominal_time);

    // Feeds the duration into the estimator and returns the updated estimate.
    double record(const TraversalObservation& obs);

    // One-step-ahead prediction of the next traversal; nominal until warmed.
    double current_estimate() const;

    bool warmed() const;
    std::size_t observation_count() const { return count_; }
    const ArcId& arc_id() const { return arc_; }
    double nominal() const { return nominal_; }

private:
    ArcId arc_;
    EstimatorSpec spec_;
    double nominal_;
    std::optional<EstimatorVariant> state_;
    std::size_t count_ = 0;
};

// Bank collection keyed per arc, or per (arc, agv) when per_agv is set.
class BankSet {
public:
    explicit BankSet(EstimatorSpec spec, bool per_agv = false)
        : spec_(spec), per_agv_(per_agv) {}

    double record(const TrafficGraph& g, double v_max, const TraversalObservation& obs);
    const ArcCostBank* find(const ArcId& arc, const std::string& agv = "") const;
    void insert(ArcCostBank bank, const std::string& agv = "");
    bool per_agv() const { return per_agv_; }

private:
    std::string key(const ArcId& arc, const std::string& agv) const;

    std::map<std::string, ArcCostBank> banks_;
    EstimatorSpec spec_;
    bool per_agv_;
};

inline constexpr double kCostFloor = 1e-3;  // seconds

// Current planning costs: warmed estimates clamped to the positive floor,
// nominal length / v_max for cold arcs. Strictly positive for every arc.
std::map<ArcId, double> cost_snapshot(const TrafficGraph& g, const BankSet& banks,
                                      double v_max, const std::string& agv = "");

}  // namespace agvcost
