#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gridgame/grid_case.hpp"
#include "gridgame/hvac.hpp"

using namespace gridgame;

namespace {

HvacParams unit_params() {
    HvacParams p;
    p.bus = 3;
    p.r_thermal = 12.0;
    p.c_thermal = 30.0;
    p.setpoint = 22.5;
    p.deadband = 0.5;
    p.p_rated = 1.0;
    p.q_factor = 0.5;
    p.k_gain = 2.0;
    return p;
}

double run_duty(const HvacParams& p, double ambient, double delta_t, double seconds) {
    HvacState s;
    s.t_inside = p.setpoint;
    s.delta_t_attack = delta_t;
    double on_time = 0.0, dt = 0.5;
    // settle first, then measure
    for (double t = 0; t < seconds; t += dt) s = step_hvac(s, p, ambient, dt);
    for (double t = 0; t < seconds; t += dt) {
        s = step_hvac(s, p, ambient, dt);
        if (s.on) on_time += dt;
    }
    return on_time / seconds;
}

}  // namespace

TEST_CASE("attack_power_delta is k * delta_t, exactly and linearly") {
    CHECK(attack_power_delta(0.0, 2.0) == 0.0);
    CHECK(attack_power_delta(2.0, 2.0) == 4.0);  // the motivating magnitude
    for (double a : {0.3, 1.1, 2.2})
        for (double b : {0.1, 0.7, 1.9})
            CHECK(attack_power_delta(a + b, 2.0) ==
                  Catch::Approx(attack_power_delta(a, 2.0) + attack_power_delta(b, 2.0))
                      .margin(1e-12));
}

TEST_CASE("thermostat cycles with ambient above setpoint") {
    HvacParams p = unit_params();
    double duty = run_duty(p, 30.0, 0.0, 3600.0);
    CHECK(duty > 0.0);
    CHECK(duty < 1.0);  // time-average draw below p_rated
}

TEST_CASE("large falsified temperature locks the compressor on") {
    HvacParams p = unit_params();
    HvacState s;
    s.t_inside = p.setpoint;
    s.delta_t_attack = 10.0;
    bool always_on_after_start = true;
    for (int i = 0; i < 4000; ++i) {
        s = step_hvac(s, p, 30.0, 1.0);
        if (i > 10 && !s.on) always_on_after_start = false;
    }
    CHECK(always_on_after_start);
    CHECK(s.p_draw == Catch::Approx(p.p_rated + p.k_gain * 10.0));
}

TEST_CASE("dt to zero freezes the temperature") {
    HvacParams p = unit_params();
    HvacState s;
    s.t_inside = 25.0;
    s.on = true;
    HvacState next = step_hvac(s, p, 35.0, 1e-9);
    CHECK(std::abs(next.t_inside - s.t_inside) < 1e-8);
    CHECK_THROWS_AS(step_hvac(s, p, 35.0, 0.0), ValidationError);
}

TEST_CASE("duty is non-decreasing in ambient (cooling mode)") {
    HvacParams p = unit_params();
    double prev = -1.0;
    for (double amb : {24.0, 27.0, 30.0, 33.0, 36.0}) {
        double duty = run_duty(p, amb, 0.0, 2400.0);
        CHECK(duty >= prev - 1e-9);
        prev = duty;
    }
}

TEST_CASE("mean draw is non-decreasing in the injected delta") {
    HvacParams p = unit_params();
    double prev = -1.0;
    for (double dt_attack : {0.0, 0.5, 1.0, 1.5, 2.5}) {
        HvacState s;
        s.t_inside = p.setpoint;
        s.delta_t_attack = dt_attack;
        double acc = 0.0;
        int n = 0;
        for (double t = 0; t < 3600; t += 1.0) {
            s = step_hvac(s, p, 29.0, 1.0);
            if (t > 600) {
                acc += s.p_draw;
                ++n;
            }
        }
        double mean = acc / n;
        CHECK(mean >= prev - 1e-9);
        prev = mean;
    }
}

TEST_CASE("reduced supply capacity raises duty") {
    HvacParams p = unit_params();
    HvacState s;
    s.t_inside = p.setpoint;
    auto duty_at = [&](double cap) {
        HvacState st = s;
        double on_time = 0.0;
        for (double t = 0; t < 3600; t += 1.0) {
            st = step_hvac(st, p, 30.0, 1.0, cap);
            if (t > 600 && st.on) on_time += 1.0;
        }
        return on_time / 3000.0;
    };
    CHECK(duty_at(0.7) > duty_at(1.0));
}

TEST_CASE("aggregate demand composes static load, fleet and noise") {
    GridCase c = ieee14_case();
    std::map<int, HvacFleet> fleets;

    SECTION("no fleets, zero variance: demand equals case loads") {
        auto dem = aggregate_demand(fleets, c, NoiseSpec{0.0, 1}, 0);
        for (const Bus& b : c.buses) {
            CHECK(dem.at(b.id).p_mw == b.p_load);
            CHECK(dem.at(b.id).q_mvar == b.q_load);
        }
    }
    SECTION("fleet draw and reactive fraction are added") {
        HvacFleet f;
        f.params = unit_params();
        HvacState on_unit;
        on_unit.on = true;
        on_unit.p_draw = 1.0;
        f.units = {on_unit, on_unit, on_unit};
        fleets[3] = f;
        auto dem = aggregate_demand(fleets, c, NoiseSpec{0.0, 1}, 0);
        CHECK(dem.at(3).p_mw == Catch::Approx(94.2 + 3.0));
        CHECK(dem.at(3).q_mvar == Catch::Approx(19.0 + 0.5 * 3.0));
    }
    SECTION("disconnected fleet contributes nothing") {
        HvacFleet f;
        f.params = unit_params();
        HvacState on_unit;
        on_unit.on = true;
        on_unit.p_draw = 1.0;
        f.units = {on_unit};
        f.connected = false;
        fleets[3] = f;
        auto dem = aggregate_demand(fleets, c, NoiseSpec{0.0, 1}, 0);
        CHECK(dem.at(3).p_mw == 94.2);
    }
    SECTION("unknown bus is an error") {
        HvacFleet f;
        f.params = unit_params();
        f.params.bus = 99;
        fleets[99] = f;
        CHECK_THROWS_AS(aggregate_demand(fleets, c, NoiseSpec{0.0, 1}, 0), ValidationError);
    }
}

TEST_CASE("noise samples: support, determinism, empirical variance") {
    const double var = 1.5;
    NoiseSpec n{var, 42};
    const double half = std::sqrt(3.0 * var);
    double acc = 0.0, acc2 = 0.0;
    const int kSamples = 100000;
    for (int i = 0; i < kSamples; ++i) {
        double s = load_noise_mw(n, 3, static_cast<std::uint64_t>(i));
        CHECK(std::abs(s) <= half);
        acc += s;
        acc2 += s * s;
    }
    const double mean = acc / kSamples;
    const double variance = acc2 / kSamples - mean * mean;
    CHECK(variance == Catch::Approx(var).epsilon(0.05));
    // same (seed, bus, t) twice: identical
    CHECK(load_noise_mw(n, 3, 777) == load_noise_mw(n, 3, 777));
    CHECK(load_noise_mw(n, 3, 777) != load_noise_mw(n, 4, 777));
    CHECK(load_noise_mw(NoiseSpec{0.0, 42}, 3, 1) == 0.0);
}

TEST_CASE("ambient profile interpolation and synthetic hump") {
    AmbientProfile prof = make_ambient_profile(1200.0, 27.0, 8.0, 120.0, 160.0);
    CHECK(prof.at(120.0) == Catch::Approx(35.0).margin(1e-9));
    CHECK(prof.at(0.0) < prof.at(120.0));
    CHECK(prof.at(1200.0) < prof.at(120.0));
    CHECK(prof.at(-5.0) == prof.at(0.0));
    CHECK(prof.at(99999.0) == prof.samples.back());
    AmbientProfile empty;
    CHECK_THROWS_AS(empty.at(0.0), ValidationError);
}
