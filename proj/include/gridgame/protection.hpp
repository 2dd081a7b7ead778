#pragma once

#include <optional>
#include <string>
#include <utility>

#include "gridgame/errors.hpp"

namespace gridgame {

enum class EventKind { uv_trip, ov_trip, ufls_shed, ofls_shed };

inline const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::uv_trip: return "uv_trip";
        case EventKind::ov_trip: return "ov_trip";
        case EventKind::ufls_shed: return "ufls_shed";
        case EventKind::ofls_shed: return "ofls_shed";
    }
    return "?";
}

struct ProtectionEvent {
    EventKind kind;
    int bus = 0;
    double time = 0.0;  // s
};

/// Under-voltage activation delay in minutes: 0.5 / (1 - v/v_lower).
/// Defined only in violation (v < v_lower); deeper violations trip faster.
inline double uv_delay_minutes(double v, double v_lower) {
    if (v < 0 || v >= v_lower)
        throw NotInViolation("uv_delay: v=" + std::to_string(v) + " not below v_lower=" +
                             std::to_string(v_lower));
    return 0.5 / (1.0 - v / v_lower);
}

/// Over-voltage activation delay in minutes: 0.5 / (v/v_upper - 1).
inline double ov_delay_minutes(double v, double v_upper) {
    if (v <= v_upper)
        throw NotInViolation("ov_delay: v=" + std::to_string(v) + " not above v_upper=" +
                             std::to_string(v_upper));
    return 0.5 / (v / v_upper - 1.0);
}

/// Inverse-time voltage relay with adaptive thresholds.
/// v_upper is tied to v_lower through alpha: v_upper = alpha * v_lower.
struct VoltageRelay {
    int bus = 0;
    double v_lower = 0.8;  // pu
    double alpha = 1.625;  // v_upper / v_lower, in (1, 2]
    double uv_timer = 0.0;  // accumulated violation time, s
    double ov_timer = 0.0;
    bool tripped = false;

    double v_upper() const { return alpha * v_lower; }
};

/// Defender action space for the lower threshold, pu of nominal.
inline constexpr double kThresholdMin = 0.80;
inline constexpr double kThresholdMax = 1.30;

/// Retunes the thresholds. Timers are preserved: retuning grants no amnesty
/// for an ongoing violation.
inline VoltageRelay set_thresholds(const VoltageRelay& r, double v_lower, double alpha) {
    if (v_lower < kThresholdMin || v_lower > kThresholdMax)
        throw ValidationError("set_thresholds: v_lower " + std::to_string(v_lower) +
                              " outside [" + std::to_string(kThresholdMin) + ", " +
                              std::to_string(kThresholdMax) + "]");
    if (!(alpha > 1.0 && alpha <= 2.0))
        throw ValidationError("set_thresholds: alpha " + std::to_string(alpha) +
                              " outside (1, 2]");
    VoltageRelay out = r;
    out.v_lower = v_lower;
    out.alpha = alpha;
    return out;
}

/// Advances the relay one step against the bus voltage.
///
/// While in violation the timer accumulates and the delay target is
/// recomputed from the *current* voltage (inverse-time behavior under a
/// moving waveform); leaving the violation region resets the timer. The trip
/// event fires once; the relay is then absorbed for the episode. Taking
/// incident branches out of service is the simulation loop's job.
inline std::pair<VoltageRelay, std::optional<ProtectionEvent>> step_voltage_relay(
    const VoltageRelay& r, double v, double dt_s, double now_s = 0.0) {
    if (dt_s <= 0) throw ValidationError("step_voltage_relay: dt must be positive");
    VoltageRelay out = r;
    if (out.tripped) return {out, std::nullopt};
    std::optional<ProtectionEvent> ev;
    if (v < out.v_lower) {
        out.uv_timer += dt_s;
        const double target_s = uv_delay_minutes(v, out.v_lower) * 60.0;
        if (out.uv_timer >= target_s) {
            out.tripped = true;
            ev = ProtectionEvent{EventKind::uv_trip, out.bus, now_s};
        }
    } else {
        out.uv_timer = 0.0;
    }
    if (!out.tripped) {
        if (v > out.v_upper()) {
            out.ov_timer += dt_s;
            const double target_s = ov_delay_minutes(v, out.v_upper()) * 60.0;
            if (out.ov_timer >= target_s) {
                out.tripped = true;
                ev = ProtectionEvent{EventKind::ov_trip, out.bus, now_s};
            }
        } else {
            out.ov_timer = 0.0;
        }
    }
    return {out, ev};
}

/// Fixed-delay frequency load-shedding relay, [59.5, 60.5] Hz band, 540 s.
struct FreqRelay {
    int bus = 0;
    double f_lower = 59.5;  // Hz
    double f_upper = 60.5;
    double delay = 540.0;  // s
    double timer = 0.0;
    bool shed = false;
};

inline std::pair<FreqRelay, std::optional<ProtectionEvent>> step_freq_relay(const FreqRelay& r,
                                                                            double f_hz,
                                                                            double dt_s,
                                                                            double now_s = 0.0) {
    if (dt_s <= 0) throw ValidationError("step_freq_relay: dt must be positive");
    FreqRelay out = r;
    if (out.shed) return {out, std::nullopt};
    std::optional<ProtectionEvent> ev;
    if (f_hz < out.f_lower || f_hz > out.f_upper) {
        out.timer += dt_s;
        if (out.timer >= out.delay) {
            out.shed = true;
            ev = ProtectionEvent{f_hz < out.f_lower ? EventKind::ufls_shed : EventKind::ofls_shed,
                                 out.bus, now_s};
        }
    } else {
        out.timer = 0.0;
    }
    return {out, ev};
}

}  // namespace gridgame
