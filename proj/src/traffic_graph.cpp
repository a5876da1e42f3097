#include "agvcost/traffic_graph.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "agvcost/csvio.hpp"

namespace agvcost {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) {
        if (tok[0] == '#')
            break;
        out.push_back(tok);
    }
    return out;
}

double parse_length(const std::string& tok, int line_no) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError("arc length is not a number: '" + tok + "'", line_no);
    return v;
}

}  // namespace

TrafficGraph TrafficGraph::load(const std::string& text) {
    TrafficGraph g;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    struct PendingArc {
        Arc arc;
        int line_no;
    };
    std::vector<PendingArc> pending;

    while (std::getline(in, line)) {
        ++line_no;
        auto toks = tokenize(line);
        if (toks.empty())
            continue;
        if (toks[0] == "node") {
            if (toks.size() != 2)
                throw ParseError("expected: node <id>", line_no);
            if (g.nodes_.count(toks[1]))
                throw ParseError("duplicate node id '" + toks[1] + "'", line_no);
            g.add_node(toks[1]);
        } else if (toks[0] == "arc") {
            if (toks.size() != 5 && toks.size() != 6)
                throw ParseError("expected: arc <id> <from> <to> <length_m> [kind]", line_no);
            Arc a;
            a.id = toks[1];
            a.from = toks[2];
            a.to = toks[3];
            a.length = parse_length(toks[4], line_no);
            if (toks.size() == 6) {
                if (toks[5] == "corridor")
                    a.kind = ArcKind::corridor;
                else if (toks[5] == "port-approach")
                    a.kind = ArcKind::port_approach;
                else
                    throw ParseError("unknown arc kind '" + toks[5] + "'", line_no);
            }
            pending.push_back({std::move(a), line_no});
        } else {
            throw ParseError("unknown directive '" + toks[0] + "'", line_no);
        }
    }

    if (g.nodes_.empty())
        throw Error("graph document declares no nodes");

    for (auto& [arc, arc_line] : pending) {
        try {
            g.add_arc(std::move(arc));
        } catch (const Error& e) {
            throw ParseError(e.what(), arc_line);
        }
    }
    return g;
}

void TrafficGraph::add_node(const NodeId& id) {
    nodes_.insert(id);
    adjacency_.try_emplace(id);
}

void TrafficGraph::add_arc(Arc arc) {
    if (arcs_.count(arc.id))
        throw UsageError("duplicate arc id '" + arc.id + "'");
    if (!has_node(arc.from))
        throw UsageError("arc '" + arc.id + "' references undeclared node '" + arc.from + "'");
    if (!has_node(arc.to))
        throw UsageError("arc '" + arc.id + "' references undeclared node '" + arc.to + "'");
    if (arc.from == arc.to)
        throw UsageError("arc '" + arc.id + "' is a self-loop");
    if (!(arc.length > 0.0))
        throw UsageError("arc '" + arc.id + "' length must be positive");

    auto& out = adjacency_[arc.from];
    out.insert(std::lower_bound(out.begin(), out.end(), arc.id), arc.id);
    arcs_.emplace(arc.id, std::move(arc));
}

const Arc& TrafficGraph::arc(const ArcId& id) const {
    auto it = arcs_.find(id);
    if (it == arcs_.end())
        throw UsageError("unknown arc '" + id + "'");
    return it->second;
}

const std::vector<ArcId>& TrafficGraph::outgoing(const NodeId& id) const {
    static const std::vector<ArcId> none;
    auto it = adjacency_.find(id);
    return it == adjacency_.end() ? none : it->second;
}

double TrafficGraph::nominal_time(const ArcId& id, double v_max) const {
    if (!(v_max > 0.0))
        throw UsageError("v_max must be positive");
    return arc(id).length / v_max;
}

std::string TrafficGraph::serialize() const {
    std::string out;
    for (const auto& n : nodes_)
        out += "node " + n + "\n";
    for (const auto& [id, a] : arcs_) {
        out += "arc " + id + " " + a.from + " " + a.to + " " + format_double(a.length);
        if (a.kind == ArcKind::port_approach)
            out += " port-approach";
        out += "\n";
    }
    return out;
}

ArcCostBank::ArcCostBank(ArcId arc, EstimatorSpec spec, double nominal_time)
    : arc_(std::move(arc)), spec_(spec), nominal_(nominal_time) {
    if (!(nominal_ > 0.0))
        throw UsageError("nominal time must be positive");
}

ArcCostBank::ArcCostBank(ArcId arc, EstimatorVariant state, double nominal_time)
    : arc_(std::move(arc)), nominal_(nominal_time), state_(std::move(state)), count_(1) {
    if (!(nominal_ > 0.0))
        throw UsageError("nominal time must be positive");
}

double ArcCostBank::record(const TraversalObservation& obs) {
    if (obs.arc != arc_)
        throw UsageError("observation for arc '" + obs.arc + "' fed to bank '" + arc_ + "'");
    if (!(obs.duration > 0.0))
        throw UsageError("traversal duration must be positive");

    const double y = obs.duration;
    if (!state_) {
        // First observation: lsmw treats it as a window sample, rls and kf
        // consume it as initialization (θ̂_0 = y, resp. x̂_0 = y with P_0 = R).
        switch (spec_.method) {
            case Method::lsmw: {
                LsmwState st(spec_.window);
                st.step({Eigen::VectorXd::Ones(1), y});
                state_ = std::move(st);
                break;
            }
            case Method::rls:
            case Method::rls_adaptive: {
                bool adaptive = spec_.method == Method::rls_adaptive;
                LambdaMode mode =
                    adaptive ? (spec_.alpha3 >= 0.0
                                    ? LambdaMode::adaptive(spec_.alpha1, spec_.alpha2, spec_.alpha3)
                                    : LambdaMode::adaptive_auto(spec_.alpha1, spec_.alpha2))
                             : LambdaMode::constant(spec_.lambda);
                Eigen::VectorXd theta0(1);
                theta0 << y;
                Eigen::MatrixXd P0(1, 1);
                P0 << 1e8;
                RlsState st(theta0, P0, mode);
                st.prime_scale(y);
                state_ = std::move(st);
                break;
            }
            case Method::kf: {
                double R = spec_.r >= 0.0 ? spec_.r : (0.01 * nominal_) * (0.01 * nominal_);
                double Q = spec_.q >= 0.0 ? spec_.q : spec_.q_over_r * R;
                state_ = KfState(y, R, 1.0, 1.0, Q, R);
                break;
            }
        }
    } else {
        const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
        if (auto* lsmw = std::get_if<LsmwState>(&*state_)) {
            lsmw->step({one, y});
        } else if (auto* rls = std::get_if<RlsState>(&*state_)) {
            rls->step({one, y});
        } else {
            auto& kf = std::get<KfState>(*state_);
            kf.predict();
            kf.correct(y);
        }
    }
    ++count_;
    return current_estimate();
}

bool ArcCostBank::warmed() const {
    if (!state_)
        return false;
    if (const auto* lsmw = std::get_if<LsmwState>(&*state_))
        return lsmw->full();
    return true;
}

double ArcCostBank::current_estimate() const {
    if (!state_)
        return nominal_;
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
    if (const auto* lsmw = std::get_if<LsmwState>(&*state_))
        return lsmw->predict(one).value_or(nominal_);
    if (const auto* rls = std::get_if<RlsState>(&*state_))
        return rls->predict(one);
    // Random-walk model: the next-step prediction is the filtered state.
    return std::get<KfState>(*state_).x_hat();
}

std::string BankSet::key(const ArcId& arc, const std::string& agv) const {
    return per_agv_ ? arc + '\x1f' + agv : arc;
}

double BankSet::record(const TrafficGraph& g, double v_max, const TraversalObservation& obs) {
    auto k = key(obs.arc, obs.agv);
    auto it = banks_.find(k);
    if (it == banks_.end())
        it = banks_.emplace(k, ArcCostBank(obs.arc, spec_, g.nominal_time(obs.arc, v_max))).first;
    return it->second.record(obs);
}

const ArcCostBank* BankSet::find(const ArcId& arc, const std::string& agv) const {
    auto it = banks_.find(key(arc, agv));
    return it == banks_.end() ? nullptr : &it->second;
}

void BankSet::insert(ArcCostBank bank, const std::string& agv) {
    auto k = key(bank.arc_id(), agv);
    banks_.insert_or_assign(k, std::move(bank));
}

std::map<ArcId, double> cost_snapshot(const TrafficGraph& g, const BankSet& banks, double v_max,
                                      const std::string& agv) {
    std::map<ArcId, double> out;
    for (const auto& [id, arc] : g.arcs()) {
        const ArcCostBank* bank = banks.find(id, agv);
        double est = bank && bank->warmed() ? bank->current_estimate()
                                            : g.nominal_time(id, v_max);
        out[id] = std::max(est, kCostFloor);
    }
    return out;
}

}  // namespace agvcost
