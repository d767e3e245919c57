#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bcmpc/cipg.hpp"
#include "bcmpc/milp.hpp"
#include "bcmpc/nn.hpp"
#include "bcmpc/scenario.hpp"
#include "bcmpc/schedule.hpp"
#include "bcmpc/thermal.hpp"

namespace bcmpc {

// ---------------------------------------------------------------------------
// Closed-loop evaluation harness. Every policy sees the same plant, the same
// perfect forecasts and the same dwell-time state machine.
// ---------------------------------------------------------------------------

struct MpcParams {
    int horizon = 72;
    double dt = kDefaultDt;
    PenaltyWeights penalties;
    int min_on_steps = 3;
    int min_off_steps = 3;
    long node_limit = 1'000'000;

    void validate() const {
        if (horizon < 1) throw ConfigError("mpc: horizon must be >= 1");
        if (!(dt > 0)) throw ConfigError("mpc: dt must be > 0");
        penalties.validate();
        if (min_on_steps < 1 || min_off_steps < 1)
            throw ConfigError("mpc: dwell times must be >= 1");
        if (node_limit < 1) throw ConfigError("mpc: node limit must be >= 1");
    }
};

struct SimContext {
    int k = 0;
    ThermalState state;
    const CycleConstraint* cycle = nullptr;
    const Scenario* scenario = nullptr;
    const ScenarioTrace* trace = nullptr;
    const StateSpace* ss = nullptr;
    const MpcParams* params = nullptr;

    /// The receding-horizon instance seen from step k (built, not solved).
    MpcInstance instance() const {
        const auto& tr = *trace;
        std::span<const Disturbance> w(tr.w.data() + k, static_cast<std::size_t>(params->horizon));
        ComfortSchedule comfort;
        comfort.t_set.assign(tr.comfort.t_set.begin() + k,
                             tr.comfort.t_set.begin() + k + params->horizon);
        comfort.t_delta.assign(tr.comfort.t_delta.begin() + k,
                               tr.comfort.t_delta.begin() + k + params->horizon);
        Tariff tariff;
        tariff.price.assign(tr.tariff.price.begin() + k,
                            tr.tariff.price.begin() + k + params->horizon);
        tariff.pi_min = tr.tariff.pi_min;
        tariff.pi_max = tr.tariff.pi_max;
        return build_instance(scenario->building, scenario->hp, *ss, state, w, comfort, tariff,
                              params->penalties, *cycle, params->horizon);
    }
};

class Policy {
  public:
    virtual ~Policy() = default;
    virtual std::string id() const = 0;
    virtual ControlDecision decide(const SimContext& ctx) = 0;
};

/// Thermostat hysteresis: on below the band, off above it, hold inside;
/// off when away; dwell-time lockout overrides everything.
inline int rule_based_control(double t_a, double t_set, double t_delta,
                              const CycleConstraint& cycle) {
    const int forced = cycle.forced_control();
    if (forced >= 0) return forced;
    if (std::isinf(t_delta)) return 0;  // away
    if (t_a < t_set - t_delta) return 1;
    if (t_a > t_set + t_delta) return 0;
    return cycle.last_control();  // hold
}

class RuleBasedPolicy : public Policy {
  public:
    std::string id() const override { return "rule-based"; }
    ControlDecision decide(const SimContext& ctx) override {
        const auto k = static_cast<std::size_t>(ctx.k);
        ControlDecision d;
        const double t_set = ctx.trace->comfort.t_set[k];
        const double t_delta = ctx.trace->comfort.t_delta[k];
        d.applied = rule_based_control(ctx.state.t_a, t_set, t_delta, *ctx.cycle);
        // raw = hysteresis intent before the lockout overlay
        CycleConstraint unlocked = *ctx.cycle;
        unlocked.history.assign(unlocked.history.size(), unlocked.last_control());
        d.raw = rule_based_control(ctx.state.t_a, t_set, t_delta, unlocked);
        d.probability = d.raw;
        d.overridden = d.raw != d.applied;
        return d;
    }
};

class MpcPolicy : public Policy {
  public:
    explicit MpcPolicy(BnbOptions opts = {}) : opts_(opts) {}
    std::string id() const override { return "mpc"; }
    ControlDecision decide(const SimContext& ctx) override {
        MpcInstance inst = ctx.instance();
        MpcSolution sol = solve_bnb(inst, opts_);
        if (sol.status != MpcStatus::Optimal)
            throw SolverError("mpc policy: solver reported infeasible model at step " +
                              std::to_string(ctx.k));
        ControlDecision d;
        d.applied = sol.u.front();
        d.raw = d.applied;
        d.probability = d.applied;
        return d;
    }

  private:
    BnbOptions opts_;
};

class GruPolicy : public Policy {
  public:
    explicit GruPolicy(const GruAgent& agent, std::string name = "bc-gru")
        : agent_(&agent), name_(std::move(name)) {}
    std::string id() const override { return name_; }
    ControlDecision decide(const SimContext& ctx) override {
        MpcInstance inst = ctx.instance();
        return predict_control(*agent_, assemble(inst), *ctx.cycle);
    }

  private:
    const GruAgent* agent_;
    std::string name_;
};

// ---------------------------------------------------------------------------
// Trajectories and scoring.
// ---------------------------------------------------------------------------

struct StepRecord {
    double t_a = 0, t_m = 0;  ///< state at the step start
    int u_raw = 0, u_applied = 0;
    double probability = 0;
    double t_inf = 0, g = 0;
    double price = 0;
    double t_set = 0, t_delta = 0;
    double power_kw = 0;
};

struct Trajectory {
    std::string scenario_id, policy_id;
    double dt = kDefaultDt;
    int warmup_steps = 0;  ///< excluded from scoring
    std::vector<StepRecord> steps;
    ThermalState final_state;
    std::vector<int> initial_history;
    double decision_seconds = 0.0;  ///< wall clock spent inside the policy
    long decisions = 0;

    double t_a_after(std::size_t k) const {
        return k + 1 < steps.size() ? steps[k + 1].t_a : final_state.t_a;
    }
};

/// Six hours of warm-up are excluded from scoring to remove the bias of the
/// arbitrary initial state.
inline int default_warmup_steps(double dt) { return static_cast<int>(std::lround(6.0 / dt)); }

inline Trajectory simulate(Policy& policy, const Scenario& scenario, const DataLibraries& libs,
                           const MpcParams& params) {
    params.validate();
    ScenarioTrace trace = materialize(scenario, libs, params.dt, params.horizon);
    StateSpace ss = discretize(scenario.building, params.dt);

    Trajectory traj;
    traj.scenario_id = scenario.id;
    traj.policy_id = policy.id();
    traj.dt = params.dt;
    traj.warmup_steps = default_warmup_steps(params.dt);
    traj.steps.reserve(static_cast<std::size_t>(trace.sim_steps));

    CycleConstraint cycle;
    cycle.min_on_steps = params.min_on_steps;
    cycle.min_off_steps = params.min_off_steps;
    cycle.history.assign(
        static_cast<std::size_t>(std::max(params.min_on_steps, params.min_off_steps)), 0);
    traj.initial_history = cycle.history;

    ThermalState state{trace.comfort.t_set[0], trace.comfort.t_set[0]};

    SimContext ctx;
    ctx.scenario = &scenario;
    ctx.trace = &trace;
    ctx.ss = &ss;
    ctx.params = &params;

    for (int k = 0; k < trace.sim_steps; ++k) {
        ctx.k = k;
        ctx.state = state;
        ctx.cycle = &cycle;
        const auto t0 = std::chrono::steady_clock::now();
        const ControlDecision d = policy.decide(ctx);
        traj.decision_seconds +=
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        ++traj.decisions;

        const auto ku = static_cast<std::size_t>(k);
        StepRecord rec;
        rec.t_a = state.t_a;
        rec.t_m = state.t_m;
        rec.u_raw = d.raw;
        rec.u_applied = d.applied;
        rec.probability = d.probability;
        rec.t_inf = trace.w[ku].t_inf;
        rec.g = trace.w[ku].g;
        rec.price = trace.tariff.price[ku];
        rec.t_set = trace.comfort.t_set[ku];
        rec.t_delta = trace.comfort.t_delta[ku];
        rec.power_kw = power(scenario.hp, d.applied);
        traj.steps.push_back(rec);

        state = plant_step(state, d.applied, trace.w[ku], scenario.building, scenario.hp,
                           params.dt);
        cycle = cycle.advanced(d.applied);
    }
    traj.final_state = state;
    return traj;
}

struct EvaluationReport {
    std::string scenario_id, policy_id;
    double objective = 0;      ///< $
    double energy_cost = 0;    ///< $
    double comfort_under = 0;  ///< degC*steps below the band
    double comfort_over = 0;   ///< degC*steps above the band
    long steps_scored = 0;
    double energy_kwh = 0;

    double comfort_violation() const { return comfort_under + comfort_over; }
};

/// Score a trajectory with the same accounting the MPC minimizes: per-step
/// energy cost plus penalty-weighted excursions of the end-of-step air
/// temperature from that step's band.
inline EvaluationReport evaluate(const Trajectory& traj, const HeatPumpModel& hp,
                                 const PenaltyWeights& penalties) {
    EvaluationReport r;
    r.scenario_id = traj.scenario_id;
    r.policy_id = traj.policy_id;
    for (std::size_t k = static_cast<std::size_t>(traj.warmup_steps); k < traj.steps.size();
         ++k) {
        const StepRecord& s = traj.steps[k];
        r.energy_cost += s.price * hp.gamma * traj.dt * s.u_applied;
        r.energy_kwh += hp.gamma * traj.dt * s.u_applied;
        if (!std::isinf(s.t_delta)) {
            const double next = traj.t_a_after(k);
            r.comfort_under += std::max(0.0, (s.t_set - s.t_delta) - next);
            r.comfort_over += std::max(0.0, next - (s.t_set + s.t_delta));
        }
        ++r.steps_scored;
    }
    r.objective = r.energy_cost + penalties.under * r.comfort_under +
                  penalties.over * r.comfort_over;
    return r;
}

// ---------------------------------------------------------------------------
// Multi-policy, multi-scenario comparison (Table-2-shaped).
// ---------------------------------------------------------------------------

struct PolicyAggregate {
    std::string policy_id;
    double objective = 0, energy_cost = 0, comfort_under = 0, comfort_over = 0;
    double mean_decision_seconds = 0;
    long decisions = 0;

    double comfort_violation() const { return comfort_under + comfort_over; }
};

struct ComparisonResult {
    std::vector<EvaluationReport> per_run;           ///< one per (scenario, policy)
    std::vector<Trajectory> trajectories;            ///< same order as per_run
    std::vector<PolicyAggregate> aggregates;         ///< one per policy
};

inline ComparisonResult compare(const std::vector<Policy*>& policies,
                                const std::vector<Scenario>& scenarios,
                                const DataLibraries& libs, const MpcParams& params,
                                std::size_t jobs = 1) {
    ComparisonResult out;
    const std::size_t n = scenarios.size() * policies.size();
    out.per_run.resize(n);
    out.trajectories.resize(n);
    // scenario-major order; policies stay serial inside a worker so a Policy
    // instance is never shared across threads
    parallel_for(jobs, scenarios.size(), [&](std::size_t si) {
        for (std::size_t pi = 0; pi < policies.size(); ++pi) {
            Trajectory traj = simulate(*policies[pi], scenarios[si], libs, params);
            EvaluationReport rep = evaluate(traj, scenarios[si].hp, params.penalties);
            out.trajectories[si * policies.size() + pi] = std::move(traj);
            out.per_run[si * policies.size() + pi] = rep;
        }
    });
    for (std::size_t pi = 0; pi < policies.size(); ++pi) {
        PolicyAggregate agg;
        agg.policy_id = policies[pi]->id();
        for (std::size_t si = 0; si < scenarios.size(); ++si) {
            const auto& rep = out.per_run[si * policies.size() + pi];
            const auto& traj = out.trajectories[si * policies.size() + pi];
            agg.objective += rep.objective;
            agg.energy_cost += rep.energy_cost;
            agg.comfort_under += rep.comfort_under;
            agg.comfort_over += rep.comfort_over;
            agg.mean_decision_seconds += traj.decision_seconds;
            agg.decisions += traj.decisions;
        }
        if (agg.decisions > 0) agg.mean_decision_seconds /= static_cast<double>(agg.decisions);
        out.aggregates.push_back(agg);
    }
    return out;
}

}  // namespace bcmpc
