#pragma once

#include <array>
#include <cmath>

#include "gridgame/errors.hpp"
#include "gridgame/protection.hpp"

namespace gridgame {

/// What both agents see: the most-unstable-bus slice of the state plus two
/// engineered features (max FVSI and the backward-difference dV/dt).
struct Observation {
    double p_flow = 0.0;    // attacked-line active flow, pu
    double v = 1.0;         // attacked-bus voltage, pu (noisy)
    double theta = 0.0;     // attacked-bus angle, rad (noisy)
    double v_lower = 0.8;   // current defender threshold, pu
    double fvsi_max = 0.0;  // current max FVSI
    double dv_dt = 0.0;     // (v - prev v) / control interval, pu/s

    static constexpr int kDim = 6;
    std::array<double, kDim> as_array() const {
        return {p_flow, v, theta, v_lower, fvsi_max, dv_dt};
    }
};

/// Continuous attacker action: falsified temperature offset, degC.
struct AttackAction {
    double delta_t = 0.0;
};

inline constexpr double kDeltaTMax = 2.5;  // degC

inline AttackAction clamp_attack(double delta_t) {
    return AttackAction{std::min(kDeltaTMax, std::max(0.0, delta_t))};
}

/// Discrete defender action: index into the lower-threshold grid
/// 0.80, 0.85, ..., 1.30 pu.
struct DefenseAction {
    int index = 0;
};

inline constexpr int kDefenseLevels = 11;
inline constexpr double kDefenseAlpha = 1.625;

inline double defense_threshold(const DefenseAction& a) {
    if (a.index < 0 || a.index >= kDefenseLevels)
        throw ValidationError("defense action index " + std::to_string(a.index) +
                              " outside [0, " + std::to_string(kDefenseLevels) + ")");
    return kThresholdMin + 0.05 * a.index;
}

struct PayoffParams {
    double k_gain = 2.0;   // MW/degC
    double r_th = 0.01;    // nominal max |dV/dt| under noise, pu/s
    double alpha = kDefenseAlpha;
};

/// The game's common payoff with both thresholds explicit.
///
///   f = log(1 + k dT) - log(1 + |dV/dt| / R_th)
///       + c1 log(1 + e^(-V/v_lower)) + c2 log(1 + e^(-v_upper/V))
///
/// where c1 = 0 iff V < v_lower and c2 = 0 iff V > v_upper: the stealth terms
/// pay the attacker only while the voltage sits inside the relay band.
/// f is concave in dT everywhere and convex in v_upper (partial, v_lower
/// held fixed).
inline double payoff_f_thresholds(double v, double dv_dt, double delta_t, double v_lower,
                                  double v_upper, const PayoffParams& p) {
    if (!std::isfinite(v) || !std::isfinite(dv_dt))
        throw ValidationError("payoff: non-finite observation");
    if (p.r_th <= 0) throw ValidationError("payoff: r_th must be positive");
    const double part1 = std::log1p(p.k_gain * delta_t);
    const double part2 = std::log1p(std::abs(dv_dt) / p.r_th);
    const double c1 = (v < v_lower) ? 0.0 : 1.0;
    const double c2 = (v > v_upper) ? 0.0 : 1.0;
    const double part3 = c1 * std::log1p(std::exp(-v / v_lower));
    const double part4 = c2 * std::log1p(std::exp(-v_upper / v));
    return part1 - part2 + part3 + part4;
}

inline double payoff_f(const Observation& obs, const AttackAction& a, double v_lower,
                       const PayoffParams& p) {
    return payoff_f_thresholds(obs.v, obs.dv_dt, a.delta_t, v_lower, p.alpha * v_lower, p);
}

/// Zero-sum rewards: (f, -f).
struct Rewards {
    double r_laa = 0.0;
    double r_avps = 0.0;
};

inline Rewards rewards(double f) { return Rewards{f, -f}; }

}  // namespace gridgame
