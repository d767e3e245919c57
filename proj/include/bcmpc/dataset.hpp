#pragma once

#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "bcmpc/cipg.hpp"
#include "bcmpc/csv.hpp"
#include "bcmpc/milp.hpp"
#include "bcmpc/nn.hpp"
#include "bcmpc/version.hpp"

namespace bcmpc {

// ---------------------------------------------------------------------------
// One training row: the CIPG feature vector and its MPC-optimal label, plus
// the raw problem snapshot the features were derived from. The snapshot keeps
// labels re-verifiable (re-solve the instance) and feeds the per-variable
// normalization ablation.
// ---------------------------------------------------------------------------

inline constexpr int kRawStepChannels = 6;  ///< t_inf, g, t_set, t_delta, away, price
inline constexpr int kRawStatic = 11;       ///< R/C/alpha, beta, gamma, t_a

struct Sample {
    int iteration = 0;
    std::string scenario_id;
    long building_id = 0;
    int step = 0;
    int label = 0;
    std::string split = "train";

    BuildingModel building;
    HeatPumpModel hp;
    double dt = kDefaultDt;
    int horizon = 0;
    ThermalState state;
    std::vector<int> history;  ///< chronological
    int min_on = 3, min_off = 3;
    std::vector<double> t_inf, g, t_set, t_delta, price;
    double pi_min = 0, pi_max = 0;
    PenaltyWeights penalties;

    FeatureVector features;
};

/// Rebuild the exact MPC instance this sample was labeled from.
inline MpcInstance sample_instance(const Sample& s) {
    StateSpace ss = discretize(s.building, s.dt);
    std::vector<Disturbance> w(static_cast<std::size_t>(s.horizon));
    for (int j = 0; j < s.horizon; ++j)
        w[static_cast<std::size_t>(j)] = {s.t_inf[static_cast<std::size_t>(j)],
                                          s.g[static_cast<std::size_t>(j)]};
    ComfortSchedule comfort{s.t_set, s.t_delta};
    Tariff tariff;
    tariff.price = s.price;
    tariff.pi_min = s.pi_min;
    tariff.pi_max = s.pi_max;
    CycleConstraint cycle{s.min_on, s.min_off, s.history};
    return build_instance(s.building, s.hp, ss, s.state, w, comfort, tariff, s.penalties, cycle,
                          s.horizon);
}

enum class FeatureKind { Cipg, Raw };

inline SampleTensors cipg_tensors(const Sample& s) { return tensors_from_features(s.features); }

/// Per-variable representation: the same information as the groupings but as
/// raw variables (each later standardized independently). The mass
/// temperature is not included; like the groupings, the controller only
/// observes the air node.
inline SampleTensors raw_tensors(const Sample& s) {
    SampleTensors t;
    t.horizon = s.horizon;
    t.channels = kRawStepChannels;
    t.steps.resize(static_cast<std::size_t>(s.horizon) * kRawStepChannels);
    for (int j = 0; j < s.horizon; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        const bool away = std::isinf(s.t_delta[ju]);
        double* row = t.steps.data() + ju * kRawStepChannels;
        row[0] = s.t_inf[ju];
        row[1] = s.g[ju];
        row[2] = s.t_set[ju];
        row[3] = away ? 0.0 : s.t_delta[ju];
        row[4] = away ? 1.0 : 0.0;
        row[5] = s.price[ju];
    }
    t.stat = {s.building.r_a_inf, s.building.r_am, s.building.r_m_inf, s.building.c_a,
              s.building.c_m,     s.building.alpha_a, s.building.alpha_m, s.hp.beta1,
              s.hp.beta2,         s.hp.gamma,         s.state.t_a};
    const std::size_t n = s.history.size();
    t.hist = {static_cast<double>(s.history[n - 1]), static_cast<double>(s.history[n - 2]),
              static_cast<double>(s.history[n - 3])};
    return t;
}

inline SampleTensors extract_tensors(const Sample& s, FeatureKind kind) {
    return kind == FeatureKind::Cipg ? cipg_tensors(s) : raw_tensors(s);
}

/// Which step channels the frozen scaler standardizes for each kind.
inline std::vector<int> scaled_channels(FeatureKind kind) {
    if (kind == FeatureKind::Cipg) return cipg_scaled_channels();
    std::vector<int> all(kRawStepChannels);
    for (int c = 0; c < kRawStepChannels; ++c) all[static_cast<std::size_t>(c)] = c;
    return all;
}

// ---------------------------------------------------------------------------
// Dataset container.
// ---------------------------------------------------------------------------

struct Dataset {
    std::vector<Sample> rows;
    int horizon = 0;
    double dt = kDefaultDt;

    std::size_t size() const { return rows.size(); }

    std::set<long> buildings() const {
        std::set<long> b;
        for (const auto& r : rows) b.insert(r.building_id);
        return b;
    }

    void append(const Dataset& other) {
        if (rows.empty()) {
            horizon = other.horizon;
            dt = other.dt;
        } else if (other.horizon != horizon) {
            throw DataError("dataset aggregation: horizon mismatch");
        }
        rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    }
};

/// Hold out whole buildings for validation (about `val_fraction` of them,
/// at least one when there are two or more buildings). Deterministic in the
/// seed.
inline void assign_splits(Dataset& ds, std::uint64_t seed, double val_fraction = 0.1) {
    std::set<long> ids = ds.buildings();
    std::vector<long> order(ids.begin(), ids.end());
    std::sort(order.begin(), order.end(), [&](long a, long b) {
        const auto ha = splitmix64(seed ^ static_cast<std::uint64_t>(a) * 0x9e3779b97f4a7c15ULL);
        const auto hb = splitmix64(seed ^ static_cast<std::uint64_t>(b) * 0x9e3779b97f4a7c15ULL);
        return ha != hb ? ha < hb : a < b;
    });
    std::size_t n_val = order.size() >= 2
                            ? std::max<std::size_t>(1, static_cast<std::size_t>(
                                                           val_fraction * order.size() + 0.5))
                            : 0;
    if (n_val >= order.size() && n_val > 0) n_val = order.size() - 1;
    std::set<long> val(order.begin(), order.begin() + n_val);
    for (auto& r : ds.rows) r.split = val.count(r.building_id) ? "validation" : "train";
}

// ---------------------------------------------------------------------------
// CSV (+ JSON schema sidecar) serialization.
// ---------------------------------------------------------------------------

namespace dataset_detail {

inline std::vector<std::string> column_names(int horizon) {
    std::vector<std::string> cols = {"iteration", "scenario", "building", "step",
                                     "split",     "label",    "history"};
    const std::vector<std::string> stat = {"r_a_inf", "r_am",   "r_m_inf",  "c_a",
                                           "c_m",     "alpha_a", "alpha_m", "beta1",
                                           "beta2",   "gamma",  "dt",       "horizon",
                                           "t_a",     "t_m",    "pi_min",   "pi_max",
                                           "pen_under", "pen_over", "min_on", "min_off"};
    cols.insert(cols.end(), stat.begin(), stat.end());
    auto per_step = [&](const std::string& base) {
        for (int j = 0; j < horizon; ++j) cols.push_back(base + "_" + std::to_string(j));
    };
    per_step("t_inf");
    per_step("g");
    per_step("t_set");
    per_step("t_delta");
    per_step("price");
    cols.insert(cols.end(), {"a11", "a12", "a21", "a22"});
    per_step("pi2");
    per_step("pi3a");
    per_step("pi3b");
    per_step("pi3c");
    per_step("pi3d");
    per_step("pi4");
    per_step("pi5");
    per_step("away");
    return cols;
}

}  // namespace dataset_detail

inline void write_dataset_csv(const Dataset& ds, const std::string& path,
                              const std::string& config_hash) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << "# " << kDatasetSchema << " feature=" << kFeatureSchema << " config=" << config_hash
        << " horizon=" << ds.horizon << "\n";
    const auto cols = dataset_detail::column_names(ds.horizon);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& s : ds.rows) {
        std::string hist;
        for (int u : s.history) hist.push_back(u ? '1' : '0');
        out << s.iteration << ',' << s.scenario_id << ',' << s.building_id << ',' << s.step
            << ',' << s.split << ',' << s.label << ',' << hist;
        auto put = [&](double v) { out << ',' << format_double(v); };
        put(s.building.r_a_inf);
        put(s.building.r_am);
        put(s.building.r_m_inf);
        put(s.building.c_a);
        put(s.building.c_m);
        put(s.building.alpha_a);
        put(s.building.alpha_m);
        put(s.hp.beta1);
        put(s.hp.beta2);
        put(s.hp.gamma);
        put(s.dt);
        out << ',' << s.horizon;
        put(s.state.t_a);
        put(s.state.t_m);
        put(s.pi_min);
        put(s.pi_max);
        put(s.penalties.under);
        put(s.penalties.over);
        out << ',' << s.min_on << ',' << s.min_off;
        auto put_vec = [&](const std::vector<double>& v) {
            for (double x : v) put(x);
        };
        put_vec(s.t_inf);
        put_vec(s.g);
        put_vec(s.t_set);
        put_vec(s.t_delta);
        put_vec(s.price);
        for (double v : s.features.pi1) put(v);
        put_vec(s.features.pi2);
        for (int c = 0; c < 4; ++c)
            for (int j = 0; j < s.horizon; ++j)
                put(s.features.pi3[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)]);
        put_vec(s.features.pi4);
        put_vec(s.features.pi5);
        put_vec(s.features.away);
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

inline void write_dataset_schema(const Dataset& ds, const std::string& path,
                                 const std::string& config_hash) {
    nlohmann::ordered_json j;
    j["schema"] = kDatasetSchema;
    j["feature_schema"] = kFeatureSchema;
    j["config"] = config_hash;
    j["horizon"] = ds.horizon;
    j["dt_hours"] = ds.dt;
    j["rows"] = ds.rows.size();
    j["columns"] = dataset_detail::column_names(ds.horizon);
    j["notes"] = {
        "labels are the MPC-optimal first control for the recorded instance",
        "t_delta is 'inf' on away steps",
        "per-step cipg channels in model order: pi2, pi3a..pi3d, pi4, pi5, away",
        "history column is chronological; the newest control is the last character"};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

inline Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("# " + std::string(kDatasetSchema), 0) != 0)
        throw DataError("not a " + std::string(kDatasetSchema) + " file: " + path);
    int horizon = 0;
    {
        const auto pos = line.find("horizon=");
        if (pos == std::string::npos) throw DataError("missing horizon in header: " + path);
        horizon = static_cast<int>(parse_long(line.substr(pos + 8), path));
    }
    if (!std::getline(in, line)) throw DataError("missing column header: " + path);
    const auto expected = dataset_detail::column_names(horizon);
    Dataset ds;
    ds.horizon = horizon;
    long lineno = 2;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = csv_detail::split_fields(line);
        const std::string ctx = path + ":" + std::to_string(lineno);
        if (f.size() != expected.size())
            throw DataError("expected " + std::to_string(expected.size()) + " fields, got " +
                            std::to_string(f.size()) + " at " + ctx);
        Sample s;
        std::size_t i = 0;
        s.iteration = static_cast<int>(parse_long(f[i++], ctx));
        s.scenario_id = f[i++];
        s.building_id = parse_long(f[i++], ctx);
        s.step = static_cast<int>(parse_long(f[i++], ctx));
        s.split = f[i++];
        s.label = static_cast<int>(parse_long(f[i++], ctx));
        for (char ch : f[i++]) s.history.push_back(ch == '1' ? 1 : 0);
        auto num = [&]() { return parse_double(f[i++], ctx); };
        s.building.r_a_inf = num();
        s.building.r_am = num();
        s.building.r_m_inf = num();
        s.building.c_a = num();
        s.building.c_m = num();
        s.building.alpha_a = num();
        s.building.alpha_m = num();
        s.hp.beta1 = num();
        s.hp.beta2 = num();
        s.hp.gamma = num();
        s.dt = num();
        s.horizon = static_cast<int>(parse_long(f[i++], ctx));
        s.state.t_a = num();
        s.state.t_m = num();
        s.pi_min = num();
        s.pi_max = num();
        s.penalties.under = num();
        s.penalties.over = num();
        s.min_on = static_cast<int>(parse_long(f[i++], ctx));
        s.min_off = static_cast<int>(parse_long(f[i++], ctx));
        auto vec = [&](std::vector<double>& v) {
            v.resize(static_cast<std::size_t>(s.horizon));
            for (auto& x : v) x = num();
        };
        vec(s.t_inf);
        vec(s.g);
        vec(s.t_set);
        vec(s.t_delta);
        vec(s.price);
        FeatureVector& fv = s.features;
        fv.horizon = s.horizon;
        for (auto& v : fv.pi1) v = num();
        vec(fv.pi2);
        fv.pi3.resize(static_cast<std::size_t>(s.horizon));
        for (int c = 0; c < 4; ++c)
            for (int j = 0; j < s.horizon; ++j)
                fv.pi3[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)] = num();
        vec(fv.pi4);
        vec(fv.pi5);
        vec(fv.away);
        const std::size_t n = s.history.size();
        if (n < 3) throw DataError("history too short at " + ctx);
        fv.pi6 = {static_cast<double>(s.history[n - 1]), static_cast<double>(s.history[n - 2]),
                  static_cast<double>(s.history[n - 3])};
        ds.rows.push_back(std::move(s));
    }
    if (!ds.rows.empty()) ds.dt = ds.rows.front().dt;
    return ds;
}

}  // namespace bcmpc
