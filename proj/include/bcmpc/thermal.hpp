#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "bcmpc/common.hpp"

namespace bcmpc {

// Units used throughout: temperature degC, power kW, energy kWh, time hours,
// thermal resistance degC/kW, capacitance kWh/degC, irradiation kW/m2.

/// Two-state RC envelope: indoor air node and building mass node, both
/// coupled to each other and to outdoor air, with solar gains on each node.
struct BuildingModel {
    double r_a_inf = 0.0;  ///< air <-> outdoor resistance
    double r_am = 0.0;     ///< air <-> mass resistance
    double r_m_inf = 0.0;  ///< mass <-> outdoor resistance
    double c_a = 0.0;      ///< air capacitance
    double c_m = 0.0;      ///< mass capacitance
    double alpha_a = 0.0;  ///< air solar absorption (m2)
    double alpha_m = 0.0;  ///< mass solar absorption (m2)

    void validate() const {
        if (!(r_a_inf > 0 && r_am > 0 && r_m_inf > 0 && c_a > 0 && c_m > 0 &&
              alpha_a > 0 && alpha_m > 0))
            throw std::invalid_argument("BuildingModel: all parameters must be > 0");
    }
};

/// Single-stage air-to-air heat pump. Heat output varies linearly with the
/// indoor/outdoor temperature difference; electrical draw is constant when on.
struct HeatPumpModel {
    double beta1 = 0.0;  ///< heat output slope (kW/degC)
    double beta2 = 0.0;  ///< heat output intercept (kW)
    double gamma = 0.0;  ///< electrical power when on (kW)

    void validate() const {
        if (!(beta2 > 0) || !(gamma > 0))
            throw std::invalid_argument("HeatPumpModel: beta2 and gamma must be > 0");
        // keep heat output positive over a -20..20 degC temperature difference
        if (!(std::abs(beta1) * 40.0 < 10.0 * beta2))
            throw std::invalid_argument("HeatPumpModel: |beta1|*40 must stay below 10*beta2");
    }
};

struct ThermalState {
    double t_a = 0.0;
    double t_m = 0.0;
};

struct Disturbance {
    double t_inf = 0.0;  ///< outdoor temperature
    double g = 0.0;      ///< global solar irradiation, >= 0
};

/// Simulator sanity range; leaving it signals plant divergence.
inline constexpr double kMinPlausibleTemp = -50.0;
inline constexpr double kMaxPlausibleTemp = 60.0;

/// Discrete state-space form x' = A x + B_k u + E w at time step dt.
/// B_k depends on the linearization temperature, so only its scalar b11 is
/// produced per step (see hp_input); A and E are constant per building.
struct StateSpace {
    double a11 = 0, a12 = 0, a21 = 0, a22 = 0;
    double e11 = 0, e12 = 0, e21 = 0, e22 = 0;
    double dt = 0;
};

/// Explicit-Euler discretization of the RC model.
inline StateSpace discretize(const BuildingModel& b, double dt) {
    b.validate();
    if (!(dt > 0)) throw std::invalid_argument("discretize: dt must be > 0");
    StateSpace ss;
    ss.dt = dt;
    ss.a11 = 1.0 - dt / b.c_a * (1.0 / b.r_a_inf + 1.0 / b.r_am);
    ss.a12 = dt / (b.c_a * b.r_am);
    ss.a21 = dt / (b.c_m * b.r_am);
    ss.a22 = 1.0 - dt / b.c_m * (1.0 / b.r_m_inf + 1.0 / b.r_am);
    ss.e11 = dt / (b.r_a_inf * b.c_a);
    ss.e12 = b.alpha_a * dt / b.c_a;
    ss.e21 = dt / (b.r_m_inf * b.c_m);
    ss.e22 = b.alpha_m * dt / b.c_m;
    if (!(ss.a11 > 0) || !(ss.a22 > 0))
        throw std::invalid_argument("discretize: dt too large, diagonal of A not positive");
    return ss;
}

/// Heat-pump input column b11 = dt/c_a * (beta1*(t_inf - t_ref) + beta2).
/// t_ref is the setpoint when building MPC matrices and the actual air
/// temperature when stepping the plant.
inline double hp_input(const HeatPumpModel& hp, const BuildingModel& b,
                       double t_ref, double t_inf, double dt) {
    return dt / b.c_a * (hp.beta1 * (t_inf - t_ref) + hp.beta2);
}

inline double power(const HeatPumpModel& hp, int u) { return hp.gamma * u; }

/// One explicit-Euler step of the continuous-truth plant. The heat pump
/// output is evaluated at the actual air temperature, not the setpoint
/// linearization the MPC uses.
inline ThermalState plant_step(const ThermalState& x, int u, const Disturbance& d,
                               const BuildingModel& b, const HeatPumpModel& hp,
                               double dt) {
    if (u != 0 && u != 1) throw std::invalid_argument("plant_step: u must be 0 or 1");
    if (d.g < 0) throw std::invalid_argument("plant_step: irradiation must be >= 0");
    const double q_hp = u * (hp.beta1 * (d.t_inf - x.t_a) + hp.beta2);
    ThermalState n;
    n.t_a = x.t_a + dt / b.c_a * ((d.t_inf - x.t_a) / b.r_a_inf +
                                  (x.t_m - x.t_a) / b.r_am + b.alpha_a * d.g + q_hp);
    n.t_m = x.t_m + dt / b.c_m * ((d.t_inf - x.t_m) / b.r_m_inf +
                                  (x.t_a - x.t_m) / b.r_am + b.alpha_m * d.g);
    if (!(n.t_a > kMinPlausibleTemp && n.t_a < kMaxPlausibleTemp &&
          n.t_m > kMinPlausibleTemp && n.t_m < kMaxPlausibleTemp))
        throw SolverError("plant_step: state diverged outside plausible range (t_a=" +
                          format_double(n.t_a) + ", t_m=" + format_double(n.t_m) + ")");
    return n;
}

/// Nominal building and heat pump used to seed scenario randomization.
inline BuildingModel nominal_building() {
    return BuildingModel{5.0, 1.0, 10.0, 2.0, 10.0, 0.02, 0.05};
}

inline HeatPumpModel nominal_heat_pump() { return HeatPumpModel{0.05, 6.0, 3.0}; }

/// Default 5-minute time step.
inline constexpr double kDefaultDt = 1.0 / 12.0;

}  // namespace bcmpc
