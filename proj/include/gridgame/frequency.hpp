#pragma once

#include <utility>

#include "gridgame/errors.hpp"

namespace gridgame {

/// Aggregate swing-style frequency model with PI secondary control.
///
///   d(df)/dt = (f_nominal / 2H) * (p_ctrl - p_imbalance - D * df)
///   p_ctrl   = kp * (-df) + p_agc,   d(p_agc)/dt = -ki * df
///
/// p_imbalance is the demand in excess of scheduled generation (pu, positive
/// when load leads). With gains at zero the model reduces to pure droop:
/// steady-state df = -p_imbalance / D.
struct GenModel {
    double h_inertia = 4.0;   // s
    double d_damping = 1.5;   // pu per Hz
    double agc_kp = 8.0;      // pu per Hz
    double agc_ki = 1.2;      // pu per Hz per s
    double p_agc = 0.0;       // integral state, pu
    double f_nominal = 60.0;  // Hz
};

inline std::pair<double, GenModel> step_frequency(const GenModel& g, double p_imbalance_pu,
                                                  double freq_hz, double dt_s) {
    if (dt_s <= 0) throw ValidationError("step_frequency: dt must be positive");
    GenModel out = g;
    const double df = freq_hz - g.f_nominal;
    const double p_ctrl = g.agc_kp * (-df) + g.p_agc;
    const double ddf =
        (g.f_nominal / (2.0 * g.h_inertia)) * (p_ctrl - p_imbalance_pu - g.d_damping * df);
    out.p_agc = g.p_agc - g.agc_ki * df * dt_s;
    return {freq_hz + ddf * dt_s, out};
}

}  // namespace gridgame
