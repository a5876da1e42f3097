#include "agvcost/harness.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <sstream>

namespace agvcost {

namespace {

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw UsageError(what + ": '" + s + "' is not a number");
    }
}

BatteryProfile battery_from(const KvConfig& kv) {
    BatteryProfile b;
    b.t_empty = kv.get_double("battery.t_empty", b.t_empty);
    std::vector<std::pair<double, double>> knots;
    for (int i = 0;; ++i) {
        std::string key = "battery.knot." + std::to_string(i);
        if (!kv.has(key))
            break;
        auto toks = split_ws(kv.get_string(key, ""));
        if (toks.size() != 2)
            throw UsageError("config key '" + key + "' needs '<fraction> <soc>'");
        knots.emplace_back(to_double(toks[0], key), to_double(toks[1], key));
    }
    if (!knots.empty())
        b.knots = std::move(knots);
    b.validate();
    return b;
}

SpeedResponse speed_from(const KvConfig& kv, double halt_soc) {
    SpeedResponse s;
    std::string kind = kv.get_string("model.speed.kind", "ramp");
    if (kind == "constant")
        s.kind = SpeedResponse::Kind::constant;
    else if (kind == "ramp")
        s.kind = SpeedResponse::Kind::ramp;
    else
        throw UsageError("model.speed.kind must be 'ramp' or 'constant'");
    s.s_min = kv.get_double("model.speed.s_min", s.s_min);
    s.runin_drop = kv.get_double("model.speed.runin_drop", s.runin_drop);
    s.plateau_lo = kv.get_double("model.speed.plateau_lo", s.plateau_lo);
    s.plateau_hi = kv.get_double("model.speed.plateau_hi", s.plateau_hi);
    s.ramp_lo = halt_soc;
    s.validate();
    return s;
}

EstimatorSpec estimator_from(const KvConfig& kv) {
    EstimatorSpec e;
    std::string name = kv.get_string("estimator.method", std::string(method_name(e.method)));
    auto m = method_from_name(name);
    if (!m)
        throw UsageError("unknown estimator method '" + name + "'");
    e.method = *m;
    double w = kv.get_double("estimator.window", static_cast<double>(e.window));
    if (!(w >= 1.0) || w != std::floor(w))
        throw UsageError("estimator.window must be a positive integer");
    e.window = static_cast<std::size_t>(w);
    e.lambda = kv.get_double("estimator.lambda", e.lambda);
    e.alpha1 = kv.get_double("estimator.alpha1", e.alpha1);
    e.alpha2 = kv.get_double("estimator.alpha2", e.alpha2);
    e.alpha3 = kv.get_double("estimator.alpha3", e.alpha3);
    e.q = kv.get_double("estimator.q", e.q);
    e.r = kv.get_double("estimator.r", e.r);
    e.q_over_r = kv.get_double("estimator.q_over_r", e.q_over_r);
    if (!(e.q_over_r > 0.0))
        throw UsageError("estimator.q_over_r must be positive");
    return e;
}

}  // namespace

Setup load_setup(const std::string& config_path, const std::string& graph_path,
                 std::optional<std::uint64_t> seed_override) {
    Setup s;
    s.kv = KvConfig::from_file(config_path);
    if (seed_override)
        s.kv.set("seed", std::to_string(*seed_override));
    s.graph = TrafficGraph::load(read_text_file(graph_path));
    s.digest = s.kv.digest();

    s.v_max = s.kv.get_double("agv.v_max", 1.0);
    if (!(s.v_max > 0.0))
        throw UsageError("agv.v_max must be positive");

    s.sim.seed = s.kv.get_u64("seed", 42);
    s.sim.dt = s.kv.get_double("sim.dt", 1.0);
    if (!(s.sim.dt > 0.0))
        throw UsageError("sim.dt must be positive");
    s.sim.agv = s.kv.get_string("agv.id", "AGV_1");
    s.sim.v_max = s.v_max;
    s.sim.battery = battery_from(s.kv);

    double halt_soc = s.kv.get_double("model.halt_soc", 0.05);
    if (!(halt_soc > 0.0) || halt_soc >= 1.0)
        throw UsageError("model.halt_soc must lie in (0, 1)");
    double friction = s.kv.get_double("model.friction", 1.0);
    if (friction < 1.0)
        throw UsageError("model.friction must be at least 1");
    double noise_frac = s.kv.get_double("model.noise_frac", 0.005);
    if (noise_frac < 0.0)
        throw UsageError("model.noise_frac must be non-negative");
    SpeedResponse speed = speed_from(s.kv, halt_soc);

    for (const auto& [id, arc] : s.graph.arcs()) {
        (void)arc;
        CostModel m;
        m.base_time = s.graph.nominal_time(id, s.v_max);
        m.friction = friction;
        m.speed = speed;
        m.noise_std = noise_frac * m.base_time;
        m.halt_soc = halt_soc;
        s.sim.models.emplace(id, m);
    }

    s.sim.reference_arc = s.kv.get_string("sim.arc", s.graph.arcs().begin()->first);
    if (!s.graph.has_arc(s.sim.reference_arc))
        throw UsageError("sim.arc '" + s.sim.reference_arc + "' is not in the graph");

    s.est = estimator_from(s.kv);
    s.per_agv_banks = s.kv.get_bool("banks.per_agv", false);

    s.mission.agv = s.kv.get_string("mission.agv", s.sim.agv);
    s.mission.src = s.kv.get_string("mission.src", "");
    s.mission.dst = s.kv.get_string("mission.dst", "");
    s.mission.drained_frac = s.kv.get_double("mission.drained_frac", 0.96);
    if (!(s.mission.drained_frac >= 0.0) || s.mission.drained_frac >= 1.0)
        throw UsageError("mission.drained_frac must lie in [0, 1)");
    for (int i = 0;; ++i) {
        std::string key = "mission.reservation." + std::to_string(i);
        if (!s.kv.has(key))
            break;
        auto toks = split_ws(s.kv.get_string(key, ""));
        if (toks.size() != 4)
            throw UsageError("config key '" + key + "' needs '<arc> <agv> <entry> <exit>'");
        ForeignReservation r;
        r.arc = toks[0];
        r.agv = toks[1];
        r.entry = to_double(toks[2], key);
        r.exit = to_double(toks[3], key);
        if (!s.graph.has_arc(r.arc))
            throw UsageError(key + ": unknown arc '" + r.arc + "'");
        if (!(r.exit > r.entry))
            throw UsageError(key + ": exit must be after entry");
        s.mission.reservations.push_back(std::move(r));
    }
    return s;
}

BankSet primed_banks(const Setup& s, double battery_offset) {
    BankSet banks(s.est, s.per_agv_banks);
    for (const auto& [id, arc] : s.graph.arcs()) {
        (void)arc;
        double d = noise_free_traversal_time(s.sim.models.at(id), s.sim.battery, battery_offset);
        banks.record(s.graph, s.v_max, {id, s.mission.agv, 0.0, d});
    }
    return banks;
}

ReservationTable reservation_table(const Setup& s) {
    ReservationTable table;
    for (const auto& r : s.mission.reservations) {
        Plan p;
        p.path.arcs = {r.arc};
        p.intervals = {{r.arc, r.entry, r.exit}};
        p.agv = r.agv;
        p.src = s.graph.arc(r.arc).from;
        p.dst = s.graph.arc(r.arc).to;
        p.depart = r.entry;
        p.total_cost = r.exit - r.entry;
        table.admit(p);
    }
    return table;
}

RunManifest RunManifest::make(std::optional<std::uint64_t> seed_override, std::string config,
                              std::string graph, std::string out) {
    RunManifest m;
    m.seed_override = seed_override;
    m.config_path = std::move(config);
    m.graph_path = std::move(graph);
    m.out_path = std::move(out);
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    m.timestamp = buf;
    return m;
}

std::string RunManifest::describe() const {
    std::string seed_text = seed_override ? std::to_string(*seed_override) : "config";
    return "run: seed=" + seed_text + " config=" + config_path + " graph=" + graph_path +
           " out=" + out_path + " at=" + timestamp;
}

void cmd_simulate(const CommonArgs& args, std::ostream& status) {
    Setup s = load_setup(args.config_path, args.graph_path, args.seed);
    auto series = generate_reference_series(s.sim, s.sim.reference_arc);
    write_text_file(args.out_path, series_to_csv(series));
    status << "wrote " << args.out_path << " (" << series.size() << " rows, arc "
           << s.sim.reference_arc << ", seed " << s.sim.seed << ")\n";
}

void cmd_estimate(const EstimateArgs& args, std::ostream& status) {
    auto m = method_from_name(args.method);
    if (!m)
        throw UsageError("unknown method '" + args.method + "'");

    EstimatorSpec spec;
    if (!args.config_path.empty())
        spec = estimator_from(KvConfig::from_file(args.config_path));
    spec.method = *m;
    if (args.window)
        spec.window = *args.window;
    if (args.lambda)
        spec.lambda = *args.lambda;
    if (args.alpha1)
        spec.alpha1 = *args.alpha1;
    if (args.alpha2)
        spec.alpha2 = *args.alpha2;
    if (args.alpha3)
        spec.alpha3 = *args.alpha3;
    if (args.q)
        spec.q = *args.q;
    if (args.r)
        spec.r = *args.r;

    auto series = series_from_csv(read_text_file(args.series_path));
    auto run = run_estimator(spec, series);

    std::vector<EstimateRow> rows(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        rows[i].t = series[i].start_time;
        rows[i].observed = series[i].duration;
        if (run.predicted[i]) {
            rows[i].predicted = *run.predicted[i];
            rows[i].residual = series[i].duration - *run.predicted[i];
        }
    }
    write_text_file(args.out_path, estimates_to_csv(rows, run.stats));
    status << "method=" << args.method << " rmse=" << format_double(run.stats.rmse)
           << " std=" << format_double(run.stats.std_dev)
           << " mean=" << format_double(run.stats.mean_error) << " count=" << run.stats.count
           << "\n";
    status << "wrote " << args.out_path << "\n";
}

CompareReport cmd_compare(const CommonArgs& args, std::ostream& status) {
    Setup s = load_setup(args.config_path, args.graph_path, args.seed);
    auto series = generate_reference_series(s.sim, s.sim.reference_arc);

    CompareReport rep;
    rep.series_length = series.size();
    rep.config_digest = s.digest;
    const CostModel& ref_model = s.sim.models.at(s.sim.reference_arc);
    rep.plateau = ref_model.base_time * ref_model.friction;

    for (Method m : {Method::lsmw, Method::rls, Method::rls_adaptive, Method::kf}) {
        EstimatorSpec spec = s.est;
        spec.method = m;
        auto run = run_estimator(spec, series);
        rep.rows.push_back({std::string(method_name(m)), run.stats});
    }
    const auto* best = &rep.rows.front();
    for (const auto& row : rep.rows)
        if (row.stats.rmse < best->stats.rmse)
            best = &row;
    rep.winner = best->method;
    rep.lsmw_rmse_norm = rep.rows[0].stats.rmse / rep.plateau;
    rep.kf_rmse_norm = rep.rows[3].stats.rmse / rep.plateau;

    if (!args.out_path.empty())
        write_text_file(args.out_path, rep.to_csv());
    status << rep.to_text();
    if (!args.out_path.empty())
        status << "wrote " << args.out_path << "\n";
    return rep;
}

std::string CompareReport::to_text() const {
    std::ostringstream out;
    out << "series length: " << series_length << "\n";
    out << "method        rmse          std           mean          max_abs\n";
    for (const auto& r : rows) {
        out << r.method << std::string(14 - r.method.size(), ' ');
        out << format_double(r.stats.rmse) << std::string(14 - format_double(r.stats.rmse).size(), ' ');
        out << format_double(r.stats.std_dev)
            << std::string(14 - format_double(r.stats.std_dev).size(), ' ');
        out << format_double(r.stats.mean_error)
            << std::string(14 - format_double(r.stats.mean_error).size(), ' ');
        out << format_double(r.stats.max_abs) << "\n";
    }
    out << "winner: " << winner << "\n";
    out << "normalized (plateau=" << format_double(plateau)
        << "): lsmw=" << format_double(lsmw_rmse_norm) << " kf=" << format_double(kf_rmse_norm)
        << "\n";
    out << "config digest: " << to_hex16(config_digest) << "\n";
    return out.str();
}

std::string CompareReport::to_csv() const {
    std::string out = "method,rmse,std_dev,mean_error,max_abs,count\n";
    for (const auto& r : rows) {
        out += r.method;
        out += ',';
        out += format_double(r.stats.rmse);
        out += ',';
        out += format_double(r.stats.std_dev);
        out += ',';
        out += format_double(r.stats.mean_error);
        out += ',';
        out += format_double(r.stats.max_abs);
        out += ',';
        out += std::to_string(r.stats.count);
        out += '\n';
    }
    out += "# winner=" + winner + "\n";
    out += "# series_length=" + std::to_string(series_length) + "\n";
    out += "# plateau=" + format_double(plateau) + "\n";
    out += "# lsmw_rmse_norm=" + format_double(lsmw_rmse_norm) + "\n";
    out += "# kf_rmse_norm=" + format_double(kf_rmse_norm) + "\n";
    out += "# config_digest=" + to_hex16(config_digest) + "\n";
    return out;
}

MissionOutcome cmd_mission(const MissionArgs& args, std::ostream& status) {
    Setup s = load_setup(args.config_path, args.graph_path, args.seed);

    NodeId src = args.src.empty() ? s.mission.src : args.src;
    NodeId dst = args.dst.empty() ? s.mission.dst : args.dst;
    if (src.empty() || dst.empty())
        throw UsageError("mission needs --src and --dst (or mission.src/mission.dst in config)");
    if (!s.graph.has_node(src))
        throw UsageError("unknown node '" + src + "'");
    if (!s.graph.has_node(dst))
        throw UsageError("unknown node '" + dst + "'");

    double battery_offset;
    if (args.battery_age == "new")
        battery_offset = 0.0;
    else if (args.battery_age == "drained")
        battery_offset = s.mission.drained_frac * s.sim.battery.t_empty;
    else
        throw UsageError("battery-age must be 'new' or 'drained'");

    MissionOutcome outcome;
    std::string csv = "seq,arc,entry,planned,actual,rerouted\n";

    // A vehicle already at the halt threshold cannot even be primed; that is a
    // halted mission with an empty route, not an internal error.
    try {
        BankSet banks = primed_banks(s, battery_offset);
        ReservationTable table = reservation_table(s);
        MissionClock clock{0.0, battery_offset};
        GaussianRng rng(s.sim.seed);
        const std::string& agv = s.mission.agv;

        auto costs = cost_snapshot(s.graph, banks, s.v_max, agv);
        Plan plan = plan_with_reservations(s.graph, costs, table, src, dst, clock.now, agv);

        std::size_t seq = 0;
        bool rerouted = false;
        while (!plan.path.empty()) {
            const ArcId arc = plan.path.arcs.front();
            const double planned = plan.intervals.front().exit - plan.intervals.front().entry;

            MissionResult leg = run_mission(s.graph, s.sim, agv, {arc}, clock, rng);
            if (leg.halted) {
                outcome.halted = true;
                break;
            }
            const auto& obs = leg.observations.front();
            banks.record(s.graph, s.v_max, obs);
            outcome.route.push_back(arc);

            csv += std::to_string(seq++) + ',' + arc + ',' + format_double(obs.start_time) + ',' +
                   format_double(planned) + ',' + format_double(obs.duration) + ',' +
                   (rerouted ? "1" : "0") + '\n';

            // Arrived at the next node: replan the remaining route with fresh costs.
            std::vector<ArcId> old_rest(plan.path.arcs.begin() + 1, plan.path.arcs.end());
            costs = cost_snapshot(s.graph, banks, s.v_max, agv);
            plan = replan_on_update(s.graph, plan, 1, clock.now, costs, table);
            rerouted = plan.path.arcs != old_rest;
            if (rerouted)
                ++outcome.reroutes;
        }
    } catch (const RobotHalted&) {
        outcome.halted = true;
    }

    std::string route_str;
    for (const auto& a : outcome.route) {
        if (!route_str.empty())
            route_str += ' ';
        route_str += a;
    }
    csv += "# route=" + route_str + "\n";
    csv += "# battery_age=" + args.battery_age + "\n";
    csv += std::string("# halted=") + (outcome.halted ? "1" : "0") + "\n";
    csv += "# reroutes=" + std::to_string(outcome.reroutes) + "\n";
    csv += "# config_digest=" + to_hex16(s.digest) + "\n";
    write_text_file(args.out_path, csv);

    status << "route: " << (route_str.empty() ? "(none)" : route_str) << "\n";
    if (outcome.halted)
        status << "mission aborted: robot halted\n";
    status << "wrote " << args.out_path << "\n";
    return outcome;
}

}  // namespace agvcost
