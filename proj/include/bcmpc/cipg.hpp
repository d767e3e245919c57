#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "bcmpc/milp.hpp"
#include "bcmpc/schedule.hpp"
#include "bcmpc/thermal.hpp"

namespace bcmpc {

// ---------------------------------------------------------------------------
// Constraint-informed parameter groupings. The optimal control depends on
// ratios and differences of the raw problem data, not on the raw values
// themselves; these groupings collapse equivalent instances onto the same
// feature vector.
//
// Per-step channel order (fixed across dataset, model and CSV schema):
//   0: pi2   heat-pump input column b11
//   1: pi3a  e11 * t_inf      2: pi3b  e21 * t_inf
//   3: pi3c  e12 * g          4: pi3d  e22 * g
//   5: pi4   comfort band position (0.5 on away steps)
//   6: pi5   gamma-scaled normalized price
//   7: away  1 when the step's comfort is unconstrained
// ---------------------------------------------------------------------------

inline constexpr int kStepChannels = 8;

struct FeatureVector {
    int horizon = 0;
    std::array<double, 4> pi1{};            ///< a11, a12, a21, a22
    std::vector<double> pi2;                ///< per step
    std::vector<std::array<double, 4>> pi3; ///< per step
    std::vector<double> pi4;                ///< per step
    std::vector<double> pi5;                ///< per step
    std::array<double, 3> pi6{};            ///< u_{k-1}, u_{k-2}, u_{k-3}
    std::vector<double> away;               ///< per step, 0/1

    double step_channel(int j, int c) const {
        switch (c) {
            case 0: return pi2[j];
            case 1: return pi3[j][0];
            case 2: return pi3[j][1];
            case 3: return pi3[j][2];
            case 4: return pi3[j][3];
            case 5: return pi4[j];
            case 6: return pi5[j];
            default: return away[j];
        }
    }
};

inline std::array<double, 4> group_building(const StateSpace& ss) {
    return {ss.a11, ss.a12, ss.a21, ss.a22};
}

inline std::vector<double> group_hp(const std::vector<double>& b11) { return b11; }

inline std::vector<std::array<double, 4>> group_weather(
    const StateSpace& ss, const std::vector<Disturbance>& w) {
    std::vector<std::array<double, 4>> pi3(w.size());
    for (std::size_t j = 0; j < w.size(); ++j)
        pi3[j] = {ss.e11 * w[j].t_inf, ss.e21 * w[j].t_inf, ss.e12 * w[j].g, ss.e22 * w[j].g};
    return pi3;
}

/// Position of the current air temperature inside each step's band: 0 at
/// the lower bound, 1 at the upper bound, outside [0,1] when out of band.
/// Away steps emit the 0.5 sentinel; the away flag channel carries the
/// distinction.
inline std::vector<double> group_comfort(double t_a_now, const ComfortSchedule& comfort) {
    std::vector<double> pi4(comfort.size());
    for (std::size_t j = 0; j < comfort.size(); ++j) {
        if (comfort.away(j)) {
            pi4[j] = 0.5;
            continue;
        }
        if (!(comfort.t_delta[j] > 0))
            throw std::invalid_argument("group_comfort: t_delta must be > 0 on occupied steps");
        pi4[j] = (t_a_now - (comfort.t_set[j] - comfort.t_delta[j])) / (2.0 * comfort.t_delta[j]);
    }
    return pi4;
}

/// Price position within the schedule-wide extremes, scaled by gamma so the
/// value reads as the cost rate of turning the heat pump on. A flat tariff
/// degenerates to the symmetric 0.5 * gamma.
inline std::vector<double> group_price(const Tariff& tariff, double gamma) {
    std::vector<double> pi5(tariff.price.size());
    const double range = tariff.pi_max - tariff.pi_min;
    for (std::size_t j = 0; j < tariff.price.size(); ++j)
        pi5[j] = range > 1e-12 ? gamma * (tariff.price[j] - tariff.pi_min) / range
                               : 0.5 * gamma;
    return pi5;
}

/// Most recent control first: [u_{k-1}, u_{k-2}, u_{k-3}].
inline std::array<double, 3> group_history(const CycleConstraint& cycle) {
    const auto& h = cycle.history;
    const std::size_t n = h.size();
    return {static_cast<double>(h[n - 1]), static_cast<double>(h[n - 2]),
            static_cast<double>(h[n - 3])};
}

inline FeatureVector assemble(const MpcInstance& inst) {
    FeatureVector fv;
    fv.horizon = inst.horizon;
    fv.pi1 = group_building(inst.ss);
    fv.pi2 = group_hp(inst.b11);
    fv.pi3 = group_weather(inst.ss, inst.disturbances);
    fv.pi4 = group_comfort(inst.state0.t_a, inst.comfort);
    fv.pi5 = group_price(inst.tariff, inst.step_energy / inst.ss.dt);
    fv.pi6 = group_history(inst.cycle);
    fv.away.resize(static_cast<std::size_t>(inst.horizon));
    for (int j = 0; j < inst.horizon; ++j)
        fv.away[static_cast<std::size_t>(j)] = inst.comfort.away(j) ? 1.0 : 0.0;
    return fv;
}

/// Flat layout [pi1(4), step 0 channels 0..7, step 1, ..., pi6(3)];
/// total length 4 + 8N + 3.
inline std::vector<double> flatten(const FeatureVector& fv) {
    std::vector<double> out;
    out.reserve(4 + static_cast<std::size_t>(kStepChannels) * fv.horizon + 3);
    out.insert(out.end(), fv.pi1.begin(), fv.pi1.end());
    for (int j = 0; j < fv.horizon; ++j)
        for (int c = 0; c < kStepChannels; ++c) out.push_back(fv.step_channel(j, c));
    out.insert(out.end(), fv.pi6.begin(), fv.pi6.end());
    return out;
}

}  // namespace bcmpc
