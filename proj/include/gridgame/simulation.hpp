#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gridgame/frequency.hpp"
#include "gridgame/grid_case.hpp"
#include "gridgame/hvac.hpp"
#include "gridgame/payoff.hpp"
#include "gridgame/power_flow.hpp"
#include "gridgame/protection.hpp"
#include "gridgame/rng.hpp"
#include "gridgame/stability.hpp"

namespace gridgame {

/// Fleet attached to one bus: `units` identical thermostat loads whose
/// initial thermal states are diversified at episode start. k_gain is the
/// bus-level attack gain (split across units internally).
struct FleetSpec {
    int bus = 0;
    int units = 12;
    double unit_p_rated = 1.0;  // MW
    double k_gain = 2.0;        // MW/degC, bus level
    double q_factor = 0.5;
    double r_thermal = 12.0;
    double c_thermal = 30.0;
    double setpoint = 22.5;
    double deadband = 0.5;
};

/// Everything that defines an episode apart from the agents' actions.
struct ScenarioConfig {
    GridCase base_case;
    double load_scale = 1.0;    // stress factor on static case loads
    std::vector<FleetSpec> fleets;
    AmbientProfile ambient;
    double ambient_offset = 0.0;  // degC, episode randomization
    NoiseSpec noise;              // uniform load-profile noise
    GenModel gen;
    double control_dt = 1.0;   // s between power-flow solves / agent actions
    double physics_dt = 0.01;  // s, thermal/frequency substep
    int episode_steps = 1200;
    double beta_q = 2.0;       // fleet reactive blow-up exponent at low voltage
    double v_blackout = 0.5;   // pu
    double measurement_sigma = 0.002;  // pu, observation noise
    double relay_v_lower = 0.8;
    double relay_alpha = kDefenseAlpha;
};

/// One row per control step; reproduces the frequency/voltage traces.
struct TraceRecord {
    double t = 0.0;
    double freq = 60.0;
    std::vector<double> v_mag;
    int attacked_bus = 0;
    double delta_t_attack = 0.0;
    double v_lower = 0.8;
    double payoff = 0.0;
    std::vector<ProtectionEvent> events;
};

struct SimState {
    GridCase net;  // current topology including trips/sheds; loads are the scaled static part
    std::map<int, HvacFleet> fleets;
    PowerFlowSolution sol;
    double freq = 60.0;
    GenModel gen;
    double p_sched = 0.0;  // pu, scheduled (initial) demand AGC balances against
    std::vector<VoltageRelay> vrelays;
    std::vector<FreqRelay> frelays;
    FvsiReport fvsi;
    int attacked_bus = 0;
    int attacked_line = 0;
    std::vector<double> prev_v;      // true voltages, previous control step
    std::vector<double> noisy_v;     // measured voltages, this step
    std::vector<double> noisy_prev_v;
    std::vector<double> noisy_theta;
    std::vector<double> noisy_flow;  // per-branch from-side P, pu
    double t = 0.0;
    std::uint64_t step_index = 0;
    bool blackout = false;
    double last_delta_t = 0.0;
    std::vector<ProtectionEvent> events;
    std::vector<TraceRecord> trace;
    std::mt19937_64 meas_rng;
    std::mt19937_64 init_rng;
};

namespace detail {

inline double supply_capacity(double v) {
    if (v <= 0.0) return 0.0;
    return std::min(1.0, v * v);  // compressor output derates with V^2
}

inline void draw_measurements(SimState& s, const ScenarioConfig& cfg) {
    const std::size_t n = s.net.buses.size();
    s.noisy_prev_v = s.noisy_v.empty() ? std::vector<double>(n, 1.0) : s.noisy_v;
    s.noisy_v.assign(n, 0.0);
    s.noisy_theta.assign(n, 0.0);
    s.noisy_flow.assign(s.net.branches.size(), 0.0);
    std::normal_distribution<double> g(0.0, cfg.measurement_sigma);
    for (std::size_t i = 0; i < n; ++i) {
        s.noisy_v[i] = s.sol.v_mag[i] + g(s.meas_rng);
        s.noisy_theta[i] = s.sol.v_ang[i] + g(s.meas_rng);
    }
    for (std::size_t k = 0; k < s.net.branches.size(); ++k)
        s.noisy_flow[k] = s.sol.flows[k].p_from / s.net.s_base + g(s.meas_rng);
}

}  // namespace detail

/// Blackout predicate: power flow failed, any energized load bus below the
/// floor, or the attacked bus islanded from the slack.
inline bool detect_blackout(const PowerFlowSolution& sol, const GridCase& c,
                            int attacked_bus = 0, double v_floor = 0.5) {
    if (!sol.converged) return true;
    for (std::size_t i = 0; i < c.buses.size(); ++i) {
        if (!sol.energized[i]) continue;
        if (c.buses[i].kind == BusKind::pq && sol.v_mag[i] < v_floor) return true;
    }
    if (attacked_bus > 0) {
        const int ai = c.bus_index(attacked_bus);
        if (ai >= 0 && !sol.energized[static_cast<std::size_t>(ai)]) return true;
    }
    return false;
}

/// Demand per bus for the current fleet/noise state, including the reactive
/// amplification of depressed buses (motor-stall proxy: fleet Q scales with
/// (1/v)^beta_q against the previous step's voltage).
inline std::map<int, BusDemand> effective_demand(const SimState& s, const ScenarioConfig& cfg) {
    std::map<int, BusDemand> dem =
        aggregate_demand(s.fleets, s.net, cfg.noise, s.step_index);
    for (const auto& [bus_id, fleet] : s.fleets) {
        if (!fleet.connected) continue;
        const int i = s.net.bus_index(bus_id);
        if (i < 0) continue;
        const double v_prev = s.prev_v.empty() ? 1.0 : s.prev_v[static_cast<std::size_t>(i)];
        if (v_prev <= 0.0) continue;
        const double v_clamped = std::max(0.6, std::min(1.05, v_prev));
        const double amp = std::pow(1.0 / v_clamped, cfg.beta_q);
        double p_fleet = 0.0;
        for (const HvacState& u : fleet.units) p_fleet += u.p_draw;
        dem[bus_id].q_mvar += fleet.params.q_factor * p_fleet * (amp - 1.0);
    }
    return dem;
}

/// Builds the episode start state: scaled loads, diversified fleet states,
/// initial solve, balanced AGC, relays at the static thresholds.
inline SimState init_sim(const ScenarioConfig& cfg, std::uint64_t seed) {
    SimState s;
    s.net = cfg.base_case;
    for (Bus& b : s.net.buses) {
        b.p_load *= cfg.load_scale;
        b.q_load *= cfg.load_scale;
    }
    s.meas_rng = substream(seed, "measurement");
    s.init_rng = substream(seed, "episode-init");
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (const FleetSpec& spec : cfg.fleets) {
        if (s.net.bus_index(spec.bus) < 0)
            throw ValidationError("fleet bus " + std::to_string(spec.bus) + " not in case");
        HvacFleet fleet;
        fleet.params.bus = spec.bus;
        fleet.params.r_thermal = spec.r_thermal;
        fleet.params.c_thermal = spec.c_thermal;
        fleet.params.setpoint = spec.setpoint;
        fleet.params.deadband = spec.deadband;
        fleet.params.p_rated = spec.unit_p_rated;
        fleet.params.q_factor = spec.q_factor;
        fleet.params.k_gain = spec.k_gain / std::max(1, spec.units);
        fleet.units.resize(static_cast<std::size_t>(spec.units));
        for (HvacState& unit : fleet.units) {
            unit.t_inside = spec.setpoint + spec.deadband * (2.0 * u01(s.init_rng) - 1.0);
            unit.on = u01(s.init_rng) < 0.5;
            unit.p_draw = unit.on ? spec.unit_p_rated : 0.0;
        }
        s.fleets[spec.bus] = std::move(fleet);
    }
    s.prev_v.assign(s.net.buses.size(), 1.0);
    // initial operating point
    GridCase solver_case = s.net;
    for (auto& [bus_id, d] : effective_demand(s, cfg)) {
        Bus& b = solver_case.bus(bus_id);
        b.p_load = d.p_mw;
        b.q_load = d.q_mvar;
    }
    s.sol = solve_power_flow(solver_case);
    if (!s.sol.converged)
        throw ValidationError("scenario base point does not solve; lower load_scale");
    s.prev_v = s.sol.v_mag;
    s.freq = s.net.f_nominal;
    s.gen = cfg.gen;
    s.gen.f_nominal = s.net.f_nominal;
    double total_pu = 0.0;
    for (const auto& [bus_id, d] : effective_demand(s, cfg)) total_pu += d.p_mw;
    s.p_sched = total_pu / s.net.s_base;
    for (const Bus& b : s.net.buses) {
        if (b.kind != BusKind::pq) continue;
        VoltageRelay vr;
        vr.bus = b.id;
        vr.v_lower = cfg.relay_v_lower;
        vr.alpha = cfg.relay_alpha;
        s.vrelays.push_back(vr);
        FreqRelay fr;
        fr.bus = b.id;
        s.frelays.push_back(fr);
    }
    s.fvsi = compute_fvsi_report(s.sol, solver_case, 0.0);
    const UnstableBus ub = most_unstable_bus(s.fvsi, solver_case);
    s.attacked_bus = ub.bus;
    s.attacked_line = s.fvsi.max_entry ? s.fvsi.max_entry->line : 0;
    detail::draw_measurements(s, cfg);
    s.noisy_prev_v = s.noisy_v;
    return s;
}

/// Takes incident in-service branches of `bus` out of service except the main
/// feeder (the line importing the most power at trip time; |Z| breaks ties),
/// and opens the bus's HVAC feeder circuits. The bus stays energized at a
/// degraded voltage unless a cascade removes the kept line.
inline void apply_voltage_trip(SimState& s, int bus_id) {
    int keep = -1;
    double best_import = -1e30;
    for (std::size_t k = 0; k < s.net.branches.size(); ++k) {
        const Branch& br = s.net.branches[k];
        if (!br.in_service || (br.from_bus != bus_id && br.to_bus != bus_id)) continue;
        double import_mw = 0.0;
        if (k < s.sol.flows.size())
            import_mw = br.from_bus == bus_id ? -s.sol.flows[k].p_from : -s.sol.flows[k].p_to;
        if (keep < 0 || import_mw > best_import + 1e-12 ||
            (std::abs(import_mw - best_import) <= 1e-12 &&
             br.z_mag < s.net.branches[static_cast<std::size_t>(keep)].z_mag)) {
            keep = static_cast<int>(k);
            best_import = import_mw;
        }
    }
    for (std::size_t k = 0; k < s.net.branches.size(); ++k) {
        Branch& br = s.net.branches[k];
        if (!br.in_service || (br.from_bus != bus_id && br.to_bus != bus_id)) continue;
        if (static_cast<int>(k) != keep) br.in_service = false;
    }
    if (auto it = s.fleets.find(bus_id); it != s.fleets.end()) it->second.connected = false;
}

/// Frequency shed: drops the whole load at the bus.
inline void apply_load_shed(SimState& s, int bus_id) {
    Bus& b = s.net.bus(bus_id);
    b.p_load = 0.0;
    b.q_load = 0.0;
    if (auto it = s.fleets.find(bus_id); it != s.fleets.end()) it->second.connected = false;
}

/// One control step: thermal/attack update, demand aggregation, power flow,
/// frequency, FVSI scan, relays (with trip consequences), blackout detection,
/// trace. Returns the events emitted this step.
inline std::vector<ProtectionEvent> simulate_step(SimState& s, const ScenarioConfig& cfg,
                                                  double attack_delta_t,
                                                  std::optional<double> defense_v_lower) {
    if (s.blackout) throw StepAfterBlackout();

    // (0) defender retune (all load-bus relays, uniformly), attacker injection
    if (defense_v_lower) {
        for (VoltageRelay& r : s.vrelays)
            r = set_thresholds(r, *defense_v_lower, cfg.relay_alpha);
    }
    s.last_delta_t = attack_delta_t;
    for (auto& [bus_id, fleet] : s.fleets) {
        const double dt_inj = (bus_id == s.attacked_bus) ? attack_delta_t : 0.0;
        for (HvacState& u : fleet.units) u.delta_t_attack = dt_inj;
    }

    // (1) thermal substeps at the previous step's voltages
    const int substeps = std::max(1, static_cast<int>(std::lround(cfg.control_dt / cfg.physics_dt)));
    const double amb = cfg.ambient.at(s.t) + cfg.ambient_offset;
    for (auto& [bus_id, fleet] : s.fleets) {
        if (!fleet.connected) continue;
        const int bi = s.net.bus_index(bus_id);
        const double v_prev = s.prev_v[static_cast<std::size_t>(bi)];
        const double cap = detail::supply_capacity(v_prev);
        for (HvacState& u : fleet.units)
            for (int k = 0; k < substeps; ++k) u = step_hvac(u, fleet.params, amb, cfg.physics_dt, cap);
    }

    // (2) demand aggregation (+ reactive amplification), (3) power flow
    const std::map<int, BusDemand> dem = effective_demand(s, cfg);
    GridCase solver_case = s.net;
    const std::vector<bool> energized = energized_from_slack(solver_case);
    double total_pu = 0.0;
    for (const auto& [bus_id, d] : dem) {
        const int bi = solver_case.bus_index(bus_id);
        if (!energized[static_cast<std::size_t>(bi)]) continue;
        Bus& b = solver_case.bus(bus_id);
        b.p_load = d.p_mw;
        b.q_load = d.q_mvar;
        total_pu += d.p_mw;
    }
    total_pu /= s.net.s_base;
    PowerFlowSolution next = solve_power_flow(solver_case, /*flat_start=*/false, &s.sol);
    if (!next.converged) next = solve_power_flow(solver_case, /*flat_start=*/true);

    std::vector<ProtectionEvent> step_events;
    if (!next.converged) {
        s.blackout = true;  // collapse: the solver itself is the detector
        s.sol = next;
    } else {
        s.sol = next;

        // (4) frequency: AGC against demand in excess of schedule
        const double imbalance = total_pu - s.p_sched;
        for (int k = 0; k < substeps; ++k) {
            auto [f, g] = step_frequency(s.gen, imbalance, s.freq, cfg.physics_dt);
            s.freq = f;
            s.gen = g;
        }

        // (5) FVSI scan and most-unstable-bus selection
        s.fvsi = compute_fvsi_report(s.sol, solver_case, s.t);
        if (!s.fvsi.entries.empty()) {
            const UnstableBus ub = most_unstable_bus(s.fvsi, solver_case);
            s.attacked_bus = ub.bus;
            s.attacked_line = s.fvsi.max_entry->line;
        }

        // (6) relays; trips reshape the network for the following steps
        for (VoltageRelay& r : s.vrelays) {
            const int bi = s.net.bus_index(r.bus);
            if (bi < 0 || !s.sol.energized[static_cast<std::size_t>(bi)]) continue;
            auto [next_r, ev] = step_voltage_relay(r, s.sol.v_mag[static_cast<std::size_t>(bi)],
                                                   cfg.control_dt, s.t);
            r = next_r;
            if (ev) {
                apply_voltage_trip(s, r.bus);
                step_events.push_back(*ev);
            }
        }
        for (FreqRelay& r : s.frelays) {
            const int bi = s.net.bus_index(r.bus);
            if (bi < 0 || !s.sol.energized[static_cast<std::size_t>(bi)]) continue;
            auto [next_r, ev] = step_freq_relay(r, s.freq, cfg.control_dt, s.t);
            r = next_r;
            if (ev) {
                apply_load_shed(s, r.bus);
                step_events.push_back(*ev);
            }
        }

        // (7) blackout: low voltage now, or the attacked bus cut off by trips
        if (detect_blackout(s.sol, solver_case, 0, cfg.v_blackout)) s.blackout = true;
        const auto energized_now = energized_from_slack(s.net);
        const int ai = s.net.bus_index(s.attacked_bus);
        if (ai >= 0 && !energized_now[static_cast<std::size_t>(ai)]) s.blackout = true;
    }

    for (const ProtectionEvent& ev : step_events) s.events.push_back(ev);

    // (8) measurements and trace
    detail::draw_measurements(s, cfg);
    TraceRecord rec;
    rec.t = s.t;
    rec.freq = s.freq;
    rec.v_mag = s.sol.v_mag;
    rec.attacked_bus = s.attacked_bus;
    rec.delta_t_attack = attack_delta_t;
    rec.v_lower = s.vrelays.empty() ? cfg.relay_v_lower : s.vrelays.front().v_lower;
    rec.events = step_events;
    s.trace.push_back(rec);

    s.prev_v = s.sol.v_mag;
    s.t += cfg.control_dt;
    ++s.step_index;
    return step_events;
}

/// The agents' view of the post-step state. dv_dt is the backward difference
/// of the measured voltage over one control interval.
inline Observation observe(const SimState& s, double control_dt = 1.0) {
    Observation obs;
    const int ai = s.net.bus_index(s.attacked_bus);
    if (ai >= 0) {
        obs.v = s.noisy_v[static_cast<std::size_t>(ai)];
        obs.theta = s.noisy_theta[static_cast<std::size_t>(ai)];
        obs.dv_dt = (s.noisy_v[static_cast<std::size_t>(ai)] -
                     s.noisy_prev_v[static_cast<std::size_t>(ai)]) /
                    control_dt;
    }
    if (s.attacked_line >= 0 &&
        s.attacked_line < static_cast<int>(s.noisy_flow.size()))
        obs.p_flow = s.noisy_flow[static_cast<std::size_t>(s.attacked_line)];
    obs.v_lower = s.vrelays.empty() ? 0.8 : s.vrelays.front().v_lower;
    obs.fvsi_max = s.fvsi.max_entry ? s.fvsi.max_entry->value : 0.0;
    return obs;
}

}  // namespace gridgame
