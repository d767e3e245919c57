#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "bcmpc/common.hpp"
#include "bcmpc/nn.hpp"
#include "bcmpc/version.hpp"

namespace bcmpc {

using ordered_json = nlohmann::ordered_json;

namespace model_io_detail {

inline ordered_json scaler_to_json(const FeatureScaler& s) {
    return ordered_json{{"step_mean", s.step_mean},
                        {"step_std", s.step_std},
                        {"stat_mean", s.stat_mean},
                        {"stat_std", s.stat_std}};
}

inline FeatureScaler scaler_from_json(const ordered_json& j) {
    FeatureScaler s;
    s.step_mean = j.at("step_mean").get<std::vector<double>>();
    s.step_std = j.at("step_std").get<std::vector<double>>();
    s.stat_mean = j.at("stat_mean").get<std::vector<double>>();
    s.stat_std = j.at("stat_std").get<std::vector<double>>();
    s.fitted = true;
    return s;
}

inline void write_file(const std::string& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open for writing: " + path);
    out << j.dump();
    out << '\n';
    if (!out) throw DataError("write failed: " + path);
}

inline ordered_json read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ModelError("malformed model file " + path + ": " + e.what());
    }
    return j;
}

}  // namespace model_io_detail

inline void save_model(const GruAgent& agent, const std::string& path) {
    ordered_json j;
    j["schema"] = kModelSchema;
    j["kind"] = "gru";
    j["feature_schema"] = agent.feature_schema;
    j["trained_horizon"] = agent.trained_horizon;
    j["spec"] = ordered_json{{"channels", agent.spec.channels},
                             {"hidden", agent.spec.hidden},
                             {"dense", agent.spec.dense},
                             {"n_static", agent.spec.n_static},
                             {"n_hist", agent.spec.n_hist}};
    j["scaler"] = model_io_detail::scaler_to_json(agent.scaler);
    j["theta"] = agent.theta;  // flat array; shapes derive from spec
    model_io_detail::write_file(path, j);
}

inline void save_model(const FfnnAgent& agent, const std::string& path) {
    ordered_json j;
    j["schema"] = kModelSchema;
    j["kind"] = "ffnn";
    j["feature_schema"] = agent.feature_schema;
    j["trained_horizon"] = agent.trained_horizon;
    j["spec"] = ordered_json{{"channels", agent.spec.channels},
                             {"n_static", agent.spec.n_static},
                             {"n_hist", agent.spec.n_hist},
                             {"horizon", agent.spec.horizon},
                             {"hidden", agent.spec.hidden}};
    j["scaler"] = model_io_detail::scaler_to_json(agent.scaler);
    j["theta"] = agent.theta;
    model_io_detail::write_file(path, j);
}

inline GruAgent load_gru(const std::string& path) {
    const ordered_json j = model_io_detail::read_file(path);
    if (j.value("schema", "") != kModelSchema)
        throw ModelError("model schema mismatch in " + path + " (expected " +
                         std::string(kModelSchema) + ")");
    if (j.value("kind", "") != "gru") throw ModelError("not a gru model: " + path);
    GruSpec spec;
    const auto& js = j.at("spec");
    spec.channels = js.at("channels").get<int>();
    spec.hidden = js.at("hidden").get<int>();
    spec.dense = js.at("dense").get<int>();
    spec.n_static = js.at("n_static").get<int>();
    spec.n_hist = js.at("n_hist").get<int>();
    GruAgent agent(spec);
    agent.feature_schema = j.value("feature_schema", "");
    agent.trained_horizon = j.value("trained_horizon", 0);
    agent.scaler = model_io_detail::scaler_from_json(j.at("scaler"));
    agent.theta = j.at("theta").get<std::vector<double>>();
    if (static_cast<int>(agent.theta.size()) != spec.total())
        throw ModelError("model parameter count does not match its architecture: " + path);
    for (double v : agent.theta)
        if (!std::isfinite(v)) throw ModelError("non-finite weight in " + path);
    return agent;
}

inline FfnnAgent load_ffnn(const std::string& path) {
    const ordered_json j = model_io_detail::read_file(path);
    if (j.value("schema", "") != kModelSchema)
        throw ModelError("model schema mismatch in " + path);
    if (j.value("kind", "") != "ffnn") throw ModelError("not a ffnn model: " + path);
    FfnnSpec spec;
    const auto& js = j.at("spec");
    spec.channels = js.at("channels").get<int>();
    spec.n_static = js.at("n_static").get<int>();
    spec.n_hist = js.at("n_hist").get<int>();
    spec.horizon = js.at("horizon").get<int>();
    spec.hidden = js.at("hidden").get<std::vector<int>>();
    FfnnAgent agent(spec);
    const auto theta = j.at("theta").get<std::vector<double>>();
    if (theta.size() != agent.theta.size())
        throw ModelError("model parameter count does not match its architecture: " + path);
    agent.theta = theta;
    agent.feature_schema = j.value("feature_schema", "");
    agent.trained_horizon = j.value("trained_horizon", 0);
    agent.scaler = model_io_detail::scaler_from_json(j.at("scaler"));
    for (double v : agent.theta)
        if (!std::isfinite(v)) throw ModelError("non-finite weight in " + path);
    return agent;
}

}  // namespace bcmpc
