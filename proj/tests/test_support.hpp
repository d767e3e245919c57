#pragma once

// Shared generators for randomized tests. Everything is seeded explicitly so
// failures reproduce.

#include <random>
#include <vector>

#include "bcmpc/milp.hpp"
#include "bcmpc/schedule.hpp"
#include "bcmpc/thermal.hpp"

namespace testutil {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline bcmpc::BuildingModel random_building(Rng& rng, double range = 0.25) {
    bcmpc::BuildingModel nom = bcmpc::nominal_building();
    auto draw = [&](double v) { return v * uniform(rng, 1.0 - range, 1.0 + range); };
    return bcmpc::BuildingModel{draw(nom.r_a_inf), draw(nom.r_am), draw(nom.r_m_inf),
                                draw(nom.c_a),     draw(nom.c_m),  draw(nom.alpha_a),
                                draw(nom.alpha_m)};
}

inline bcmpc::HeatPumpModel random_heat_pump(Rng& rng, double range = 0.25) {
    bcmpc::HeatPumpModel nom = bcmpc::nominal_heat_pump();
    auto draw = [&](double v) { return v * uniform(rng, 1.0 - range, 1.0 + range); };
    return bcmpc::HeatPumpModel{draw(nom.beta1), draw(nom.beta2), draw(nom.gamma)};
}

inline bcmpc::CycleConstraint random_cycle(Rng& rng, int min_on = 3, int min_off = 3) {
    static const std::vector<std::vector<int>> valid = {
        {0, 0, 0}, {0, 0, 1}, {0, 1, 1}, {1, 1, 1}, {1, 1, 0}, {1, 0, 0}};
    bcmpc::CycleConstraint c;
    c.min_on_steps = min_on;
    c.min_off_steps = min_off;
    c.history = valid[std::uniform_int_distribution<std::size_t>(0, valid.size() - 1)(rng)];
    return c;
}

/// A generic randomized MPC instance: mixed home/sleep/away schedule, two- or
/// three-level tariff, valid cycle history. Continuous draws keep objective
/// ties measure-zero.
inline bcmpc::MpcInstance random_instance(Rng& rng, int horizon) {
    using namespace bcmpc;
    BuildingModel b = random_building(rng);
    HeatPumpModel hp = random_heat_pump(rng);
    const double dt = kDefaultDt;
    StateSpace ss = discretize(b, dt);

    ThermalState x0{uniform(rng, 16.0, 24.0), uniform(rng, 16.0, 24.0)};

    ComfortSchedule comfort;
    Tariff tariff;
    int j = 0;
    while (j < horizon) {
        int block = std::min(horizon - j, 1 + static_cast<int>(uniform(rng, 0.0, 6.0)));
        const double t_set = uniform(rng, 19.0, 22.0);
        const double pick = uniform(rng, 0.0, 1.0);
        const double t_delta = pick < 0.55 ? 0.5 : (pick < 0.8 ? 1.0 : kInf);
        for (int i = 0; i < block; ++i) {
            comfort.t_set.push_back(t_set);
            comfort.t_delta.push_back(t_delta);
        }
        j += block;
    }
    const int levels = 2 + (uniform(rng, 0.0, 1.0) < 0.4 ? 1 : 0);
    std::vector<double> level_price(levels);
    for (auto& p : level_price) p = uniform(rng, 0.05, 0.40);
    j = 0;
    while (j < horizon) {
        int block = std::min(horizon - j, 1 + static_cast<int>(uniform(rng, 0.0, 8.0)));
        const double p = level_price[std::uniform_int_distribution<int>(0, levels - 1)(rng)];
        for (int i = 0; i < block; ++i) tariff.price.push_back(p);
        j += block;
    }
    tariff.pi_min = *std::min_element(tariff.price.begin(), tariff.price.end());
    tariff.pi_max = *std::max_element(tariff.price.begin(), tariff.price.end());

    std::vector<Disturbance> w(static_cast<std::size_t>(horizon));
    double t_inf = uniform(rng, -5.0, 10.0);
    for (auto& d : w) {
        t_inf += uniform(rng, -0.2, 0.2);
        d.t_inf = t_inf;
        d.g = std::max(0.0, uniform(rng, -0.2, 0.6));
    }

    PenaltyWeights pen{uniform(rng, 0.5, 2.0), uniform(rng, 0.5, 2.0)};
    CycleConstraint cycle = random_cycle(rng);

    return build_instance(b, hp, ss, x0, w, comfort, tariff, pen, cycle, horizon);
}

}  // namespace testutil
