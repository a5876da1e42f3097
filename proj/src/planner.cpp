#include "agvcost/planner.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace agvcost {

namespace {

void check_costs(const TrafficGraph& g, const CostMap& costs) {
    for (const auto& [id, arc] : g.arcs()) {
        (void)arc;
        auto it = costs.find(id);
        if (it == costs.end())
            throw UsageError("cost map is missing arc '" + id + "'");
        if (!(it->second > 0.0))
            throw UsageError("cost for arc '" + id + "' must be positive");
    }
}

struct Label {
    double cost;
    std::vector<ArcId> seq;
    NodeId node;

    // Priority order: cheapest first, then lexicographically smallest arc
    // sequence. With strictly positive costs every proper prefix of a path is
    // strictly cheaper, so this order is extension-invariant and the first
    // settled label per node is its global optimum.
    bool operator>(const Label& other) const {
        if (cost != other.cost)
            return cost > other.cost;
        return seq > other.seq;
    }
};

std::optional<Path> dijkstra(const TrafficGraph& g, const CostMap& costs, const NodeId& src,
                             const NodeId& dst, const std::set<ArcId>& banned_arcs,
                             const std::set<NodeId>& banned_nodes) {
    if (src == dst)
        return Path{};

    std::priority_queue<Label, std::vector<Label>, std::greater<Label>> queue;
    std::set<NodeId> settled;
    queue.push({0.0, {}, src});

    while (!queue.empty()) {
        Label cur = queue.top();
        queue.pop();
        if (settled.count(cur.node))
            continue;
        settled.insert(cur.node);
        if (cur.node == dst)
            return Path{std::move(cur.seq)};

        for (const auto& arc_id : g.outgoing(cur.node)) {
            if (banned_arcs.count(arc_id))
                continue;
            const Arc& a = g.arc(arc_id);
            if (settled.count(a.to) || banned_nodes.count(a.to))
                continue;
            Label next{cur.cost + costs.at(arc_id), cur.seq, a.to};
            next.seq.push_back(arc_id);
            queue.push(std::move(next));
        }
    }
    return std::nullopt;
}

}  // namespace

double path_cost(const Path& path, const CostMap& costs) {
    double total = 0.0;
    for (const auto& id : path.arcs) {
        auto it = costs.find(id);
        if (it == costs.end())
            throw UsageError("cost map is missing arc '" + id + "'");
        total += it->second;
    }
    return total;
}

Path shortest_path(const TrafficGraph& g, const CostMap& costs, const NodeId& src,
                   const NodeId& dst) {
    if (!g.has_node(src))
        throw UsageError("unknown node '" + src + "'");
    if (!g.has_node(dst))
        throw UsageError("unknown node '" + dst + "'");
    check_costs(g, costs);
    auto p = dijkstra(g, costs, src, dst, {}, {});
    if (!p)
        throw PlanningError("no path from '" + src + "' to '" + dst + "'");
    return *p;
}

std::vector<Path> k_shortest_paths(const TrafficGraph& g, const CostMap& costs, const NodeId& src,
                                   const NodeId& dst, std::size_t k) {
    if (!g.has_node(src))
        throw UsageError("unknown node '" + src + "'");
    if (!g.has_node(dst))
        throw UsageError("unknown node '" + dst + "'");
    check_costs(g, costs);
    if (k == 0)
        return {};

    auto first = dijkstra(g, costs, src, dst, {}, {});
    if (!first)
        return {};

    auto order = [&](const Path& a, const Path& b) {
        double ca = path_cost(a, costs), cb = path_cost(b, costs);
        if (ca != cb)
            return ca < cb;
        return a.arcs < b.arcs;
    };

    std::vector<Path> found{*first};
    std::set<std::vector<ArcId>> seen{first->arcs};
    std::vector<Path> candidates;

    while (found.size() < k) {
        const Path& prev = found.back();
        // Spur off every node of the previously accepted path.
        for (std::size_t i = 0; i < prev.arcs.size(); ++i) {
            NodeId spur_node = i == 0 ? src : g.arc(prev.arcs[i - 1]).to;
            std::vector<ArcId> root(prev.arcs.begin(), prev.arcs.begin() + i);

            std::set<ArcId> banned_arcs;
            for (const Path& p : found) {
                if (p.arcs.size() > i &&
                    std::equal(root.begin(), root.end(), p.arcs.begin()))
                    banned_arcs.insert(p.arcs[i]);
            }
            std::set<NodeId> banned_nodes;
            NodeId walk = src;
            for (std::size_t j = 0; j < i; ++j) {
                banned_nodes.insert(walk);
                walk = g.arc(root[j]).to;
            }

            auto spur = dijkstra(g, costs, spur_node, dst, banned_arcs, banned_nodes);
            if (!spur)
                continue;
            Path candidate;
            candidate.arcs = root;
            candidate.arcs.insert(candidate.arcs.end(), spur->arcs.begin(), spur->arcs.end());
            if (seen.insert(candidate.arcs).second)
                candidates.push_back(std::move(candidate));
        }
        if (candidates.empty())
            break;
        auto best = std::min_element(candidates.begin(), candidates.end(), order);
        found.push_back(*best);
        candidates.erase(best);
    }
    return found;
}

std::vector<Conflict> detect_conflict(const Plan& a, const Plan& b) {
    std::vector<Conflict> out;
    for (const auto& ia : a.intervals) {
        for (const auto& ib : b.intervals) {
            if (ia.arc != ib.arc)
                continue;
            double lo = std::max(ia.entry, ib.entry);
            double hi = std::min(ia.exit, ib.exit);
            if (hi > lo)
                out.push_back({ia.arc, lo, hi});
        }
    }
    return out;
}

void ReservationTable::admit(const Plan& plan) {
    for (const auto& iv : plan.intervals)
        table_[iv.arc].push_back({plan.agv, iv.entry, iv.exit});
}

std::vector<Conflict> ReservationTable::conflicts_with(const Plan& plan) const {
    std::vector<Conflict> out;
    for (const auto& iv : plan.intervals) {
        auto it = table_.find(iv.arc);
        if (it == table_.end())
            continue;
        for (const auto& e : it->second) {
            if (e.agv == plan.agv)
                continue;
            double lo = std::max(iv.entry, e.entry);
            double hi = std::min(iv.exit, e.exit);
            if (hi > lo)
                out.push_back({iv.arc, lo, hi});
        }
    }
    return out;
}

void ReservationTable::release(const std::string& agv) {
    for (auto& [arc, entries] : table_) {
        (void)arc;
        std::erase_if(entries, [&](const Entry& e) { return e.agv == agv; });
    }
}

void ReservationTable::release_suffix(const Plan& plan, std::size_t from) {
    for (std::size_t i = from; i < plan.intervals.size(); ++i) {
        const auto& iv = plan.intervals[i];
        auto it = table_.find(iv.arc);
        if (it == table_.end())
            continue;
        auto& entries = it->second;
        auto match = std::find_if(entries.begin(), entries.end(), [&](const Entry& e) {
            return e.agv == plan.agv && e.entry == iv.entry && e.exit == iv.exit;
        });
        if (match != entries.end())
            entries.erase(match);
    }
}

const std::vector<ReservationTable::Entry>& ReservationTable::on(const ArcId& arc) const {
    static const std::vector<Entry> none;
    auto it = table_.find(arc);
    return it == table_.end() ? none : it->second;
}

Plan make_plan(const TrafficGraph& g, const Path& path, const CostMap& costs,
               const std::string& agv, double depart) {
    Plan plan;
    plan.path = path;
    plan.agv = agv;
    plan.depart = depart;
    double t = depart;
    for (const auto& id : path.arcs) {
        auto it = costs.find(id);
        if (it == costs.end())
            throw UsageError("cost map is missing arc '" + id + "'");
        plan.intervals.push_back({id, t, t + it->second});
        t += it->second;
        plan.total_cost += it->second;
    }
    if (!path.empty()) {
        plan.src = g.arc(path.arcs.front()).from;
        plan.dst = g.arc(path.arcs.back()).to;
    }
    return plan;
}

Plan plan_with_reservations(const TrafficGraph& g, const CostMap& costs, ReservationTable& table,
                            const NodeId& src, const NodeId& dst, double depart,
                            const std::string& agv, std::size_t k) {
    auto candidates = k_shortest_paths(g, costs, src, dst, k);
    if (candidates.empty())
        throw PlanningError("no path from '" + src + "' to '" + dst + "'");
    for (const auto& path : candidates) {
        Plan plan = make_plan(g, path, costs, agv, depart);
        plan.src = src;
        plan.dst = dst;
        if (table.conflicts_with(plan).empty()) {
            table.admit(plan);
            return plan;
        }
    }
    throw PlanningError("no conflict-free route from '" + src + "' to '" + dst + "' within " +
                        std::to_string(k) + " candidates");
}

Plan replan_on_update(const TrafficGraph& g, const Plan& plan, std::size_t completed, double now,
                      const CostMap& new_costs, ReservationTable& table) {
    if (completed > plan.path.size())
        throw UsageError("completed count exceeds plan length");
    table.release_suffix(plan, completed);
    NodeId current = completed == 0
                         ? plan.src
                         : g.arc(plan.path.arcs[completed - 1]).to;
    return plan_with_reservations(g, new_costs, table, current, plan.dst, now, plan.agv);
}

}  // namespace agvcost
