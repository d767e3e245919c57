#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcmpc/dataset.hpp"
#include "bcmpc/model_io.hpp"
#include "bcmpc/sim.hpp"

namespace bcmpc {

// ---------------------------------------------------------------------------
// MPC-guided imitation loop: closed-loop MPC data first, then iterations in
// which the cloned agent drives the plant while the MPC labels every visited
// state; the dataset only ever grows.
// ---------------------------------------------------------------------------

struct DaggerConfig {
    double epsilon_abs = -1.0;  ///< objective-gap stop threshold ($); <=0 selects the relative rule
    double epsilon_rel = 0.15;  ///< epsilon = epsilon_rel * J_MPC on the evaluation set
    int max_iterations = 7;
    TrainConfig train;
    int eval_scenarios = 5;
    int eval_days = 5;
    double val_fraction = 0.1;

    void validate() const {
        if (epsilon_abs <= 0 && !(epsilon_rel > 0))
            throw ConfigError("dagger: need epsilon_abs > 0 or epsilon_rel > 0");
        if (max_iterations < 0) throw ConfigError("dagger: max_iterations must be >= 0");
        if (eval_scenarios < 1 || eval_days < 1)
            throw ConfigError("dagger: evaluation set must be nonempty");
        if (!(val_fraction > 0 && val_fraction < 1))
            throw ConfigError("dagger: val_fraction must be in (0,1)");
        train.validate();
    }
};

struct PipelineConfig {
    std::uint64_t seed = 1;
    MpcParams mpc;
    ScenarioConfig scenario;
    DaggerConfig dagger;
    std::size_t jobs = 1;
};

// ---------------------------------------------------------------------------
// Rollouts.
// ---------------------------------------------------------------------------

struct RolloutResult {
    Dataset samples;
    Trajectory trajectory;
};

/// Closed-loop rollout recording (features, MPC-optimal control) at every
/// step. When `driver` is null the MPC's own decision is applied (expert
/// rollout); otherwise the agent drives the plant and the MPC label is
/// recorded but never implemented.
inline RolloutResult rollout_scenario(const Scenario& scenario, const DataLibraries& libs,
                                      const MpcParams& params, int iteration,
                                      const GruAgent* driver) {
    params.validate();
    ScenarioTrace trace = materialize(scenario, libs, params.dt, params.horizon);
    StateSpace ss = discretize(scenario.building, params.dt);
    BnbOptions opts;
    opts.node_limit = params.node_limit;

    RolloutResult out;
    out.samples.horizon = params.horizon;
    out.samples.dt = params.dt;
    out.trajectory.scenario_id = scenario.id;
    out.trajectory.policy_id = driver ? "dagger-agent" : "mpc-rollout";
    out.trajectory.dt = params.dt;
    out.trajectory.warmup_steps = default_warmup_steps(params.dt);

    CycleConstraint cycle;
    cycle.min_on_steps = params.min_on_steps;
    cycle.min_off_steps = params.min_off_steps;
    cycle.history.assign(
        static_cast<std::size_t>(std::max(params.min_on_steps, params.min_off_steps)), 0);
    out.trajectory.initial_history = cycle.history;

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
        MpcInstance inst = ctx.instance();
        MpcSolution sol = solve_bnb(inst, opts);
        if (sol.status != MpcStatus::Optimal)
            throw SolverError("rollout: MPC infeasible at step " + std::to_string(k) +
                              " of scenario " + scenario.id);
        const int label = sol.u.front();

        ControlDecision applied;
        if (driver) {
            applied = predict_control(*driver, assemble(inst), cycle);
        } else {
            applied.probability = label;
            applied.raw = label;
            applied.applied = label;
        }

        Sample s;
        s.iteration = iteration;
        s.scenario_id = scenario.id;
        s.building_id = scenario.building_id;
        s.step = k;
        s.label = label;
        s.building = scenario.building;
        s.hp = scenario.hp;
        s.dt = params.dt;
        s.horizon = params.horizon;
        s.state = state;
        s.history = cycle.history;
        s.min_on = params.min_on_steps;
        s.min_off = params.min_off_steps;
        const auto ku = static_cast<std::size_t>(k);
        const auto n = static_cast<std::size_t>(params.horizon);
        s.t_inf.resize(n);
        s.g.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            s.t_inf[j] = trace.w[ku + j].t_inf;
            s.g[j] = trace.w[ku + j].g;
        }
        s.t_set.assign(trace.comfort.t_set.begin() + k, trace.comfort.t_set.begin() + k + params.horizon);
        s.t_delta.assign(trace.comfort.t_delta.begin() + k,
                         trace.comfort.t_delta.begin() + k + params.horizon);
        s.price.assign(trace.tariff.price.begin() + k,
                       trace.tariff.price.begin() + k + params.horizon);
        s.pi_min = trace.tariff.pi_min;
        s.pi_max = trace.tariff.pi_max;
        s.penalties = params.penalties;
        s.features = assemble(inst);
        out.samples.rows.push_back(std::move(s));

        StepRecord rec;
        rec.t_a = state.t_a;
        rec.t_m = state.t_m;
        rec.u_raw = applied.raw;
        rec.u_applied = applied.applied;
        rec.probability = applied.probability;
        rec.t_inf = trace.w[ku].t_inf;
        rec.g = trace.w[ku].g;
        rec.price = trace.tariff.price[ku];
        rec.t_set = trace.comfort.t_set[ku];
        rec.t_delta = trace.comfort.t_delta[ku];
        rec.power_kw = power(scenario.hp, applied.applied);
        out.trajectory.steps.push_back(rec);

        state = plant_step(state, applied.applied, trace.w[ku], scenario.building, scenario.hp,
                           params.dt);
        cycle = cycle.advanced(applied.applied);
    }
    out.trajectory.final_state = state;
    return out;
}

/// Expert data generation (Algorithm line 1): MPC both labels and drives.
inline RolloutResult mpc_rollout(const Scenario& scenario, const DataLibraries& libs,
                                 const MpcParams& params, int iteration = 0) {
    return rollout_scenario(scenario, libs, params, iteration, nullptr);
}

/// One DAgger pass over a set of scenarios: the agent drives, MPC labels.
inline Dataset dagger_iteration(const GruAgent& agent, const std::vector<Scenario>& scenarios,
                                const DataLibraries& libs, const MpcParams& params,
                                int iteration, std::size_t jobs = 1) {
    std::vector<Dataset> parts(scenarios.size());
    parallel_for(jobs, scenarios.size(), [&](std::size_t i) {
        parts[i] = rollout_scenario(scenarios[i], libs, params, iteration, &agent).samples;
    });
    Dataset merged;
    for (auto& p : parts) merged.append(p);
    return merged;
}

// ---------------------------------------------------------------------------
// Dataset-level training wrapper (fits or reuses the frozen scaler).
// ---------------------------------------------------------------------------

struct TrainedAgent {
    GruAgent agent;
    TrainMetrics metrics;
};

inline TrainedAgent train_agent(const Dataset& ds, FeatureKind kind, const TrainConfig& cfg,
                                const FeatureScaler* frozen_scaler = nullptr,
                                const GruSpec* custom_spec = nullptr) {
    if (ds.rows.empty()) throw std::invalid_argument("train_agent: empty dataset");
    GruSpec spec;
    if (custom_spec) spec = *custom_spec;
    spec.channels = kind == FeatureKind::Cipg ? kStepChannels : kRawStepChannels;
    spec.n_static = kind == FeatureKind::Cipg ? 4 : kRawStatic;

    std::vector<SampleTensors> raw;
    raw.reserve(ds.rows.size());
    for (const auto& r : ds.rows) raw.push_back(extract_tensors(r, kind));

    FeatureScaler scaler;
    if (frozen_scaler) {
        scaler = *frozen_scaler;
    } else {
        // conditioning constants come from the earliest iteration present
        // and stay frozen afterwards
        int min_iter = ds.rows.front().iteration;
        for (const auto& r : ds.rows) min_iter = std::min(min_iter, r.iteration);
        std::vector<SampleTensors> first;
        for (std::size_t i = 0; i < ds.rows.size(); ++i)
            if (ds.rows[i].iteration == min_iter) first.push_back(raw[i]);
        scaler = FeatureScaler::fit(first, scaled_channels(kind), /*scale_static=*/true);
    }

    std::vector<SampleTensors> train_x, val_x;
    std::vector<int> train_y, val_y;
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
        SampleTensors scaled = scaler.apply(raw[i]);
        if (ds.rows[i].split == "validation") {
            val_x.push_back(std::move(scaled));
            val_y.push_back(ds.rows[i].label);
        } else {
            train_x.push_back(std::move(scaled));
            train_y.push_back(ds.rows[i].label);
        }
    }

    TrainedAgent out{GruAgent(spec), {}};
    out.agent.scaler = scaler;
    out.agent.feature_schema = kind == FeatureKind::Cipg ? kFeatureSchema : kRawFeatureSchema;
    out.agent.trained_horizon = ds.horizon;
    out.agent.init_weights(derive_seed(cfg.seed, "init"));
    out.metrics = train_net(out.agent, train_x, train_y, val_x, val_y, cfg);
    return out;
}

// ---------------------------------------------------------------------------
// The full loop.
// ---------------------------------------------------------------------------

struct IterationReport {
    int iteration = 0;
    std::size_t dataset_rows = 0;
    double j_appr = 0, j_mpc = 0, gap = 0, epsilon = 0;
    double val_accuracy = 0, train_accuracy = 0, val_loss = 0;
    double label_on_fraction = 0;
    int best_epoch = -1;
};

struct DaggerResult {
    GruAgent agent;
    Dataset dataset;
    std::vector<IterationReport> iterations;
    bool converged = false;
    double j_mpc = 0;
    TrainMetrics last_metrics;
};

inline std::vector<Scenario> make_eval_scenarios(const PipelineConfig& cfg,
                                                 const DataLibraries& libs) {
    std::vector<Scenario> evals;
    for (int i = 0; i < cfg.dagger.eval_scenarios; ++i) {
        std::mt19937_64 rng(derive_seed(cfg.seed, "eval", static_cast<std::uint64_t>(i)));
        evals.push_back(random_scenario(rng, cfg.scenario, libs, cfg.dagger.eval_days,
                                        cfg.mpc.horizon * cfg.mpc.dt,
                                        1'000'000 + static_cast<long>(i),
                                        "eval-" + std::to_string(i)));
    }
    return evals;
}

inline std::vector<Scenario> make_training_scenarios(const PipelineConfig& cfg,
                                                     const DataLibraries& libs, int iteration,
                                                     long& building_counter) {
    const int days = iteration == 0 ? cfg.scenario.initial_days : cfg.scenario.days_per_iteration;
    std::vector<Scenario> out;
    for (int d = 0; d < days; ++d) {
        for (int b = 0; b < cfg.scenario.buildings_per_day; ++b) {
            const auto idx = static_cast<std::uint64_t>(d) * cfg.scenario.buildings_per_day + b;
            std::mt19937_64 rng(derive_seed(cfg.seed, "scenario",
                                            static_cast<std::uint64_t>(iteration), idx));
            const std::string id = "it" + std::to_string(iteration) + "-d" + std::to_string(d) +
                                   "-b" + std::to_string(b);
            out.push_back(random_scenario(rng, cfg.scenario, libs, 1, cfg.mpc.horizon * cfg.mpc.dt,
                                          building_counter++, id));
        }
    }
    return out;
}

namespace dagger_detail {

inline double eval_policy_objective(Policy& policy, const std::vector<Scenario>& evals,
                                    const DataLibraries& libs, const MpcParams& params,
                                    std::size_t jobs) {
    std::vector<double> obj(evals.size(), 0.0);
    parallel_for(jobs, evals.size(), [&](std::size_t i) {
        Trajectory traj = simulate(policy, evals[i], libs, params);
        obj[i] = evaluate(traj, evals[i].hp, params.penalties).objective;
    });
    double total = 0;
    for (double v : obj) total += v;
    return total;
}

inline std::uint64_t file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open for checksum: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(bytes);
}

inline nlohmann::ordered_json report_json(const IterationReport& r) {
    return nlohmann::ordered_json{{"iteration", r.iteration},
                                  {"dataset_rows", r.dataset_rows},
                                  {"j_appr", r.j_appr},
                                  {"j_mpc", r.j_mpc},
                                  {"gap", r.gap},
                                  {"epsilon", r.epsilon},
                                  {"val_accuracy", r.val_accuracy},
                                  {"train_accuracy", r.train_accuracy},
                                  {"val_loss", r.val_loss},
                                  {"label_on_fraction", r.label_on_fraction},
                                  {"best_epoch", r.best_epoch}};
}

inline IterationReport report_from_json(const nlohmann::ordered_json& j) {
    IterationReport r;
    r.iteration = j.at("iteration").get<int>();
    r.dataset_rows = j.at("dataset_rows").get<std::size_t>();
    r.j_appr = j.at("j_appr").get<double>();
    r.j_mpc = j.at("j_mpc").get<double>();
    r.gap = j.at("gap").get<double>();
    r.epsilon = j.at("epsilon").get<double>();
    r.val_accuracy = j.at("val_accuracy").get<double>();
    r.train_accuracy = j.at("train_accuracy").get<double>();
    r.val_loss = j.at("val_loss").get<double>();
    r.label_on_fraction = j.at("label_on_fraction").get<double>();
    r.best_epoch = j.at("best_epoch").get<int>();
    return r;
}

inline void write_checkpoint(const std::string& dir, const std::string& config_hash,
                             const DaggerResult& state, int iteration) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::string data_path = dir + "/dataset.csv";
    const std::string model_path = dir + "/model.json";
    write_dataset_csv(state.dataset, data_path, config_hash);
    save_model(state.agent, model_path);
    nlohmann::ordered_json j;
    j["schema"] = kCheckpointSchema;
    j["config"] = config_hash;
    j["iteration"] = iteration;
    j["j_mpc"] = state.j_mpc;
    j["checksums"] = {{"dataset.csv", hex16(file_checksum(data_path))},
                      {"model.json", hex16(file_checksum(model_path))}};
    nlohmann::ordered_json reports = nlohmann::ordered_json::array();
    for (const auto& r : state.iterations) reports.push_back(report_json(r));
    j["iterations"] = reports;
    std::ofstream out(dir + "/state.json", std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint state: " + dir);
    out << j.dump(2) << '\n';
}

inline std::optional<int> load_checkpoint(const std::string& dir, const std::string& config_hash,
                                          DaggerResult& state) {
    namespace fs = std::filesystem;
    const std::string state_path = dir + "/state.json";
    if (!fs::exists(state_path)) return std::nullopt;
    std::ifstream in(state_path, std::ios::binary);
    nlohmann::ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError("corrupt checkpoint state: " + std::string(e.what()));
    }
    if (j.value("schema", "") != kCheckpointSchema)
        throw DataError("checkpoint schema mismatch in " + state_path);
    if (j.value("config", "") != config_hash)
        throw ConfigError("checkpoint was produced by a different config (hash mismatch)");
    const std::string data_path = dir + "/dataset.csv";
    const std::string model_path = dir + "/model.json";
    const auto sums = j.at("checksums");
    if (hex16(file_checksum(data_path)) != sums.at("dataset.csv").get<std::string>() ||
        hex16(file_checksum(model_path)) != sums.at("model.json").get<std::string>())
        throw DataError("checkpoint corruption detected (checksum mismatch) in " + dir);
    state.dataset = read_dataset_csv(data_path);
    state.agent = load_gru(model_path);
    state.j_mpc = j.at("j_mpc").get<double>();
    state.iterations.clear();
    for (const auto& rj : j.at("iterations")) state.iterations.push_back(report_from_json(rj));
    return j.at("iteration").get<int>();
}

}  // namespace dagger_detail

/// Deterministic splits: a building lands in validation by seed-keyed hash,
/// so its assignment never changes as the dataset grows.
inline void assign_splits_stable(Dataset& ds, std::uint64_t seed, double val_fraction) {
    auto is_val = [&](long id) {
        const auto h = splitmix64(seed ^ (static_cast<std::uint64_t>(id) * 0x9e3779b97f4a7c15ULL));
        return static_cast<double>(h % 100000) < val_fraction * 100000.0;
    };
    std::set<long> ids = ds.buildings();
    if (ids.size() < 2) {
        for (auto& r : ds.rows) r.split = "train";
        return;
    }
    bool any_val = false, any_train = false;
    for (long id : ids) (is_val(id) ? any_val : any_train) = true;
    long forced = -1;
    bool forced_val = false;
    if (!any_val || !any_train) {
        // degenerate hash draw: force the smallest-hashed building over
        std::uint64_t best = ~0ULL;
        for (long id : ids) {
            const auto h = splitmix64(seed ^ (static_cast<std::uint64_t>(id) * 0x9e3779b97f4a7c15ULL));
            if (h < best) {
                best = h;
                forced = id;
            }
        }
        forced_val = !any_val;
    }
    for (auto& r : ds.rows) {
        bool val = is_val(r.building_id);
        if (r.building_id == forced) val = forced_val;
        r.split = val ? "validation" : "train";
    }
}

inline DaggerResult run_dagger(const PipelineConfig& cfg, const DataLibraries& libs,
                               const std::string& config_hash = "0",
                               const std::string& checkpoint_dir = "", bool resume = false,
                               const std::function<void(const IterationReport&)>& on_iteration = {}) {
    cfg.dagger.validate();
    cfg.scenario.validate();
    cfg.mpc.validate();

    const std::vector<Scenario> evals = make_eval_scenarios(cfg, libs);

    DaggerResult state;
    int start_iteration = 0;
    bool resumed = false;
    if (resume && !checkpoint_dir.empty()) {
        if (auto done = dagger_detail::load_checkpoint(checkpoint_dir, config_hash, state)) {
            start_iteration = *done + 1;
            resumed = true;
        }
    }

    MpcParams params = cfg.mpc;
    BnbOptions opts;
    opts.node_limit = params.node_limit;

    if (!resumed) {
        MpcPolicy mpc_policy_obj(opts);
        state.j_mpc =
            dagger_detail::eval_policy_objective(mpc_policy_obj, evals, libs, params, cfg.jobs);
    }
    const double epsilon = cfg.dagger.epsilon_abs > 0 ? cfg.dagger.epsilon_abs
                                                      : cfg.dagger.epsilon_rel * state.j_mpc;

    long building_counter = 0;
    FeatureScaler frozen;
    bool have_scaler = false;
    if (resumed) {
        frozen = state.agent.scaler;
        have_scaler = true;
    }

    for (int iteration = start_iteration; iteration <= cfg.dagger.max_iterations; ++iteration) {
        // stop check against the previous iteration's evaluation
        if (!state.iterations.empty() && state.iterations.back().gap <= epsilon) {
            state.converged = true;
            break;
        }
        building_counter = 1000L * iteration;
        const std::vector<Scenario> scen =
            make_training_scenarios(cfg, libs, iteration, building_counter);
        Dataset fresh;
        if (iteration == 0) {
            std::vector<Dataset> parts(scen.size());
            parallel_for(cfg.jobs, scen.size(), [&](std::size_t i) {
                parts[i] = mpc_rollout(scen[i], libs, params, 0).samples;
            });
            for (auto& p : parts) fresh.append(p);
        } else {
            fresh = dagger_iteration(state.agent, scen, libs, params, iteration, cfg.jobs);
        }
        state.dataset.append(fresh);
        assign_splits_stable(state.dataset, derive_seed(cfg.seed, "split"), cfg.dagger.val_fraction);

        TrainConfig tc = cfg.dagger.train;
        tc.seed = derive_seed(cfg.seed, "train", static_cast<std::uint64_t>(iteration));
        TrainedAgent trained =
            train_agent(state.dataset, FeatureKind::Cipg, tc, have_scaler ? &frozen : nullptr);
        state.agent = trained.agent;
        state.last_metrics = trained.metrics;
        if (!have_scaler) {
            frozen = state.agent.scaler;
            have_scaler = true;
        }

        GruPolicy agent_policy(state.agent);
        const double j_appr =
            dagger_detail::eval_policy_objective(agent_policy, evals, libs, params, cfg.jobs);

        IterationReport rep;
        rep.iteration = iteration;
        rep.dataset_rows = state.dataset.size();
        rep.j_appr = j_appr;
        rep.j_mpc = state.j_mpc;
        rep.gap = j_appr - state.j_mpc;
        rep.epsilon = epsilon;
        rep.val_accuracy = trained.metrics.val_accuracy;
        rep.train_accuracy = trained.metrics.train_accuracy;
        rep.val_loss = trained.metrics.val_loss;
        rep.label_on_fraction = trained.metrics.label_on_fraction;
        rep.best_epoch = trained.metrics.best_epoch;
        state.iterations.push_back(rep);
        if (on_iteration) on_iteration(rep);
        if (!checkpoint_dir.empty())
            dagger_detail::write_checkpoint(checkpoint_dir, config_hash, state, iteration);
    }
    if (!state.iterations.empty() && state.iterations.back().gap <= epsilon)
        state.converged = true;
    return state;
}

}  // namespace bcmpc
