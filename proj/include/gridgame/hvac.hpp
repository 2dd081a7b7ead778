#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "gridgame/errors.hpp"
#include "gridgame/grid_case.hpp"
#include "gridgame/rng.hpp"

namespace gridgame {

/// Parameters of one thermostat-controlled cooling unit.
struct HvacParams {
    int bus = 0;
    double r_thermal = 12.0;  // envelope resistance, degC/MW
    double c_thermal = 30.0;  // heat capacity, MJ/degC
    double setpoint = 22.5;   // degC
    double deadband = 0.5;    // hysteresis half-width, degC
    double p_rated = 1.0;     // compressor draw when on, MW
    double q_factor = 0.5;    // reactive fraction, Q = q_factor * P
    double k_gain = 0.0;      // attack power gain, MW/degC (this unit's share)
};

/// Thermal + electrical state of one unit. delta_t_attack is the falsified
/// sensor offset currently injected at this unit.
struct HvacState {
    double t_inside = 22.5;  // degC
    bool on = false;
    double delta_t_attack = 0.0;  // degC
    double p_draw = 0.0;          // MW
};

/// Outdoor temperature time series, fixed step.
struct AmbientProfile {
    std::vector<double> samples;  // degC
    double step = 1.0;            // s

    double at(double t) const {
        if (samples.empty()) throw ValidationError("empty ambient profile");
        if (step <= 0) throw ValidationError("ambient profile step must be positive");
        const double pos = t / step;
        if (pos <= 0) return samples.front();
        const std::size_t i = static_cast<std::size_t>(pos);
        if (i + 1 >= samples.size()) return samples.back();
        const double frac = pos - static_cast<double>(i);
        return samples[i] * (1.0 - frac) + samples[i + 1] * frac;
    }
};

/// Uniform load-profile noise. variance_mw is the variance in MW^2-units;
/// the centered support half-width is sqrt(3*variance).
struct NoiseSpec {
    double variance_mw = 0.0;
    std::uint64_t seed = 0;
};

/// Power injected by the attack for a falsified temperature delta:
/// delta_p = k * delta_t, exactly.
inline double attack_power_delta(double delta_t_c, double k_gain_mw_per_c) {
    return k_gain_mw_per_c * delta_t_c;
}

/// One first-order RC step of the thermostat loop.
///
/// The thermostat switches on the *perceived* temperature (true indoor plus
/// the injected falsification), so a positive delta_t_attack locks the
/// compressor on. supply_capacity in [0,1] derates the delivered cooling at
/// depressed supply voltage (compressor torque loss); electrical draw is not
/// derated, which is what lets a sagging bus accumulate unmet thermal load.
inline HvacState step_hvac(const HvacState& s, const HvacParams& p, double ambient_c, double dt_s,
                           double supply_capacity = 1.0) {
    if (dt_s <= 0) throw ValidationError("step_hvac: dt must be positive");
    HvacState out = s;
    const double cooling = s.on ? p.p_rated * supply_capacity : 0.0;
    const double dT = ((ambient_c - s.t_inside) / (p.r_thermal * p.c_thermal) -
                       cooling / p.c_thermal) *
                      dt_s;
    out.t_inside = s.t_inside + dT;
    const double perceived = out.t_inside + s.delta_t_attack;
    if (perceived > p.setpoint + p.deadband)
        out.on = true;
    else if (perceived < p.setpoint - p.deadband)
        out.on = false;
    out.p_draw = (out.on ? p.p_rated : 0.0) + attack_power_delta(s.delta_t_attack, p.k_gain);
    return out;
}

/// Noise sample for (bus, control step); stateless, so identical inputs
/// always reproduce identical samples.
inline double load_noise_mw(const NoiseSpec& n, int bus_id, std::uint64_t step_index) {
    if (n.variance_mw < 0) throw ValidationError("noise variance must be non-negative");
    if (n.variance_mw == 0) return 0.0;
    const double half_width = std::sqrt(3.0 * n.variance_mw);
    const double u = hash_uniform01(n.seed, static_cast<std::uint64_t>(bus_id), step_index);
    return (2.0 * u - 1.0) * half_width;
}

struct BusDemand {
    double p_mw = 0.0;
    double q_mvar = 0.0;
};

/// A fleet of units attached to one bus.
struct HvacFleet {
    HvacParams params;  // per-unit parameters
    std::vector<HvacState> units;
    bool connected = true;  // feeder breaker; opened by a voltage-relay trip
};

/// Composes per-bus demand: static case load + HVAC draw + uniform noise.
/// Noise applies to buses carrying a fleet (it models HVAC load-profile
/// error). Reactive fleet demand is q_factor * P per unit.
inline std::map<int, BusDemand> aggregate_demand(const std::map<int, HvacFleet>& fleets,
                                                 const GridCase& c, const NoiseSpec& noise,
                                                 std::uint64_t step_index) {
    std::map<int, BusDemand> out;
    for (const Bus& b : c.buses) out[b.id] = BusDemand{b.p_load, b.q_load};
    for (const auto& [bus_id, fleet] : fleets) {
        auto it = out.find(bus_id);
        if (it == out.end())
            throw ValidationError("aggregate_demand: unknown bus " + std::to_string(bus_id));
        if (!fleet.connected) continue;
        double p = 0.0;
        for (const HvacState& u : fleet.units) p += u.p_draw;
        it->second.p_mw += p + load_noise_mw(noise, bus_id, step_index);
        it->second.q_mvar += fleet.params.q_factor * p;
    }
    return out;
}

/// Synthetic day slice: base temperature with a Gaussian hump so demand peaks
/// at `peak_t` seconds (default: minute 2).
inline AmbientProfile make_ambient_profile(double duration_s, double base_c = 27.0,
                                           double hump_c = 8.0, double peak_t = 120.0,
                                           double width_s = 160.0, double step_s = 1.0) {
    AmbientProfile prof;
    prof.step = step_s;
    const std::size_t n = static_cast<std::size_t>(duration_s / step_s) + 1;
    prof.samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) * step_s;
        const double z = (t - peak_t) / width_s;
        prof.samples.push_back(base_c + hump_c * std::exp(-z * z));
    }
    return prof;
}

/// Parses a `time_s,ambient_c` CSV body into a profile (fixed step inferred
/// from the first two rows).
AmbientProfile parse_ambient_csv(const std::string& text);  // defined in io.hpp

}  // namespace gridgame
