#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "agvcost/errors.hpp"
#include "agvcost/traffic_graph.hpp"
#include "agvcost/types.hpp"

namespace agvcost {

// A simple (loop-free) contiguous arc sequence.
struct Path {
    std::vector<ArcId> arcs;

    bool empty() const { return arcs.empty(); }
    std::size_t size() const { return arcs.size(); }
    bool operator==(const Path& other) const { return arcs == other.arcs; }
};

struct ArcInterval {
    ArcId arc;
    double entry = 0.0, exit = 0.0;  // exit − entry = cost used at planning time
};

struct Plan {
    Path path;
    std::vector<ArcInterval> intervals;
    std::string agv;
    NodeId src, dst;
    double depart = 0.0;
    double total_cost = 0.0;
};

struct Conflict {
    ArcId arc;
    double start = 0.0, end = 0.0;  // the overlapping interval
};

using CostMap = std::map<ArcId, double>;

double path_cost(const Path& path, const CostMap& costs);

// Minimum-total-cost simple path under strictly positive costs. Ties are
// broken by the lexicographically smallest arc-id sequence, which keeps
// repeated queries deterministic. Throws PlanningError when dst is
// unreachable.
Path shortest_path(const TrafficGraph& g, const CostMap& costs, const NodeId& src,
                   const NodeId& dst);

// Loopless paths in increasing (cost, arc-sequence) order, at most k of them
// (Yen-style spur enumeration around the shortest path).
std::vector<Path> k_shortest_paths(const TrafficGraph& g, const CostMap& costs, const NodeId& src,
                                   const NodeId& dst, std::size_t k);

// Arcs present in both plans whose occupancy intervals overlap with positive
// measure. Touching endpoints (exit_a == entry_b) is not a conflict.
std::vector<Conflict> detect_conflict(const Plan& a, const Plan& b);

// Per-arc ledger of admitted occupancy intervals. Single-writer: all
// admissions go through one owner.
class ReservationTable {
public:
    struct Entry {
        std::string agv;
        double entry = 0.0, exit = 0.0;
    };

    void admit(const Plan& plan);
    // Overlaps between the plan and reservations held by other AGVs.
    std::vector<Conflict> conflicts_with(const Plan& plan) const;
    void release(const std::string& agv);
    // Removes the reservations matching plan.intervals[from..] exactly.
    void release_suffix(const Plan& plan, std::size_t from);
    const std::vector<Entry>& on(const ArcId& arc) const;

private:
    std::map<ArcId, std::vector<Entry>> table_;
};

// Builds the timed plan for a path: entry of the first arc at `depart`, each
// exit = entry + cost, each next entry = previous exit.
Plan make_plan(const TrafficGraph& g, const Path& path, const CostMap& costs,
               const std::string& agv, double depart);

inline constexpr std::size_t kMaxCandidates = 32;

// Enumerates candidate paths by increasing cost and admits the first one
// whose occupancy does not overlap existing reservations. Throws
// PlanningError when dst is unreachable or all k candidates conflict.
Plan plan_with_reservations(const TrafficGraph& g, const CostMap& costs, ReservationTable& table,
                            const NodeId& src, const NodeId& dst, double depart,
                            const std::string& agv, std::size_t k = kMaxCandidates);

// Replans the remaining route from the AGV's current node (after `completed`
// arcs of `plan`) departing at `now`: releases the old suffix reservations
// and admits a fresh plan under the updated costs.
Plan replan_on_update(const TrafficGraph& g, const Plan& plan, std::size_t completed, double now,
                      const CostMap& new_costs, ReservationTable& table);

}  // namespace agvcost
