#pragma once

#include "gridgame/simulation.hpp"

namespace gridgame {

/// The bundled experiment: IEEE 14-bus backbone operated at a stressed
/// evening point, HVAC fleets concentrated in the voltage-weak 9/10/14
/// pocket plus bus 3, demand peaking at simulated minute 2. Tuned so the
/// attack-free peak settles while a sustained falsified-temperature attack
/// at the most unstable bus tips the pocket past its loadability nose.
inline ScenarioConfig make_default_scenario(double episode_s = 1200.0) {
    ScenarioConfig cfg;
    cfg.base_case = ieee14_case();
    cfg.load_scale = 1.30;
    cfg.ambient = make_ambient_profile(episode_s + 60.0, 27.0, 8.0, 120.0, 160.0);
    cfg.episode_steps = static_cast<int>(episode_s / cfg.control_dt);
    cfg.beta_q = 3.0;

    FleetSpec f9;
    f9.bus = 9;
    f9.units = 20;
    f9.unit_p_rated = 1.25;
    FleetSpec f10;
    f10.bus = 10;
    f10.units = 10;
    f10.unit_p_rated = 1.0;
    FleetSpec f14;
    f14.bus = 14;
    f14.units = 12;
    f14.unit_p_rated = 1.0;
    FleetSpec f3;
    f3.bus = 3;
    f3.units = 16;
    f3.unit_p_rated = 1.25;
    FleetSpec f4;
    f4.bus = 4;
    f4.units = 10;
    f4.unit_p_rated = 1.0;
    cfg.fleets = {f9, f10, f14, f3, f4};
    return cfg;
}

}  // namespace gridgame
