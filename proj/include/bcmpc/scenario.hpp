#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "bcmpc/csv.hpp"
#include "bcmpc/schedule.hpp"
#include "bcmpc/thermal.hpp"

namespace bcmpc {

// Comfort half-bands by thermostat mode.
inline constexpr double kHomeBand = 0.5;
inline constexpr double kSleepBand = 1.0;

enum class Mode { Home, Sleep, Away };

inline double band_for(Mode m) {
    switch (m) {
        case Mode::Home: return kHomeBand;
        case Mode::Sleep: return kSleepBand;
        default: return kInf;
    }
}

// ---------------------------------------------------------------------------
// Weather library: (time, outdoor temperature, irradiation) samples on any
// regular-ish grid, linearly interpolated onto the simulation grid.
// ---------------------------------------------------------------------------

struct WeatherLibrary {
    std::vector<double> time_h, t_inf, g;

    double span_hours() const { return time_h.empty() ? 0.0 : time_h.back(); }
    int whole_days() const { return static_cast<int>(span_hours() / 24.0); }

    double t_inf_at(double t) const { return interp(t_inf, t); }
    double g_at(double t) const { return std::max(0.0, interp(g, t)); }

    static WeatherLibrary load(const std::string& path) {
        CsvTable csv = read_csv(path);
        WeatherLibrary lib;
        long epoch = -1;
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const auto& row = csv.rows[i];
            const std::string ctx = path + ":" + std::to_string(csv.line_numbers[i]);
            if (row.size() < 3) throw DataError("expected 3 columns (time,t_inf,g) at " + ctx);
            const double t = parse_time_hours(row[0], epoch, ctx);
            const double temp = parse_double(row[1], ctx);
            const double irr = parse_double(row[2], ctx);
            if (!lib.time_h.empty() && t <= lib.time_h.back())
                throw DataError("timestamps must increase at " + ctx);
            if (irr < 0) throw DataError("negative irradiation at " + ctx);
            lib.time_h.push_back(t);
            lib.t_inf.push_back(temp);
            lib.g.push_back(irr);
        }
        if (lib.time_h.size() < 2) throw DataError("weather file too short: " + path);
        return lib;
    }

  private:
    double interp(const std::vector<double>& y, double t) const {
        if (t < time_h.front() - 1e-9 || t > time_h.back() + 1e-9)
            throw DataError("weather lookup at t=" + format_double(t) +
                            "h outside the library span [" + format_double(time_h.front()) +
                            ", " + format_double(time_h.back()) + "]");
        const auto it = std::upper_bound(time_h.begin(), time_h.end(), t);
        if (it == time_h.begin()) return y.front();
        if (it == time_h.end()) return y.back();
        const std::size_t hi = static_cast<std::size_t>(it - time_h.begin());
        const std::size_t lo = hi - 1;
        const double f = (t - time_h[lo]) / (time_h[hi] - time_h[lo]);
        return y[lo] + f * (y[hi] - y[lo]);
    }
};

// ---------------------------------------------------------------------------
// Daily time-of-use tariff pattern.
// ---------------------------------------------------------------------------

struct TariffPattern {
    struct Segment {
        double start_h = 0, end_h = 0, price = 0;
    };
    std::vector<Segment> segments;  ///< covers [0,24) without gaps
    std::string name;

    double price_at(double hour_of_day) const {
        const double h = hour_of_day - 24.0 * std::floor(hour_of_day / 24.0);
        for (const auto& s : segments)
            if (h >= s.start_h - 1e-9 && h < s.end_h - 1e-9) return s.price;
        return segments.back().price;
    }

    double min_price() const {
        double v = segments.front().price;
        for (const auto& s : segments) v = std::min(v, s.price);
        return v;
    }
    double max_price() const {
        double v = segments.front().price;
        for (const auto& s : segments) v = std::max(v, s.price);
        return v;
    }

    static TariffPattern load(const std::string& path) {
        CsvTable csv = read_csv(path);
        TariffPattern p;
        p.name = path;
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const auto& row = csv.rows[i];
            const std::string ctx = path + ":" + std::to_string(csv.line_numbers[i]);
            if (row.size() < 3)
                throw DataError("expected 3 columns (start_hour,end_hour,price) at " + ctx);
            Segment s;
            s.start_h = parse_double(row[0], ctx);
            s.end_h = parse_double(row[1], ctx);
            s.price = parse_double(row[2], ctx);
            if (s.price < 0) throw DataError("negative price at " + ctx);
            if (!(s.end_h > s.start_h)) throw DataError("empty tariff segment at " + ctx);
            p.segments.push_back(s);
        }
        if (p.segments.empty()) throw DataError("tariff file has no segments: " + path);
        std::sort(p.segments.begin(), p.segments.end(),
                  [](const Segment& a, const Segment& b) { return a.start_h < b.start_h; });
        double cursor = 0.0;
        for (const auto& s : p.segments) {
            if (std::abs(s.start_h - cursor) > 1e-9)
                throw DataError("tariff segments must cover [0,24) without gaps: " + path);
            cursor = s.end_h;
        }
        if (std::abs(cursor - 24.0) > 1e-9)
            throw DataError("tariff segments must end at hour 24: " + path);
        return p;
    }
};

// ---------------------------------------------------------------------------
// Daily setpoint template: entries hold from start_h to the next entry.
// ---------------------------------------------------------------------------

struct SetpointPattern {
    struct Entry {
        double start_h = 0;
        double t_set = 20;
        Mode mode = Mode::Home;
    };
    std::vector<Entry> entries;  ///< sorted by start_h, first at 0.0
    std::string name;

    void at(double hour_of_day, double& t_set, double& t_delta) const {
        const double h = hour_of_day - 24.0 * std::floor(hour_of_day / 24.0);
        const Entry* cur = &entries.back();
        for (const auto& e : entries) {
            if (h >= e.start_h - 1e-9) cur = &e;
        }
        t_set = cur->t_set;
        t_delta = band_for(cur->mode);
    }

    static Mode parse_mode(const std::string& s, const std::string& ctx) {
        if (s == "home") return Mode::Home;
        if (s == "sleep") return Mode::Sleep;
        if (s == "away") return Mode::Away;
        throw DataError("unknown mode '" + s + "' (expected home|sleep|away) at " + ctx);
    }

    static SetpointPattern load(const std::string& path) {
        CsvTable csv = read_csv(path);
        SetpointPattern p;
        p.name = path;
        long epoch = -1;
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const auto& row = csv.rows[i];
            const std::string ctx = path + ":" + std::to_string(csv.line_numbers[i]);
            if (row.size() < 3)
                throw DataError("expected 3 columns (time,t_set,mode) at " + ctx);
            Entry e;
            e.start_h = parse_time_hours(row[0], epoch, ctx);
            e.t_set = parse_double(row[1], ctx);
            e.mode = parse_mode(row[2], ctx);
            if (e.start_h < 0 || e.start_h >= 24.0)
                throw DataError("setpoint entries must lie in [0,24) at " + ctx);
            p.entries.push_back(e);
        }
        if (p.entries.empty()) throw DataError("setpoint file has no entries: " + path);
        std::sort(p.entries.begin(), p.entries.end(),
                  [](const Entry& a, const Entry& b) { return a.start_h < b.start_h; });
        if (p.entries.front().start_h > 1e-9) {
            // wrap the final entry to cover the start of the day
            Entry wrap = p.entries.back();
            wrap.start_h = 0.0;
            p.entries.insert(p.entries.begin(), wrap);
        }
        return p;
    }
};

// ---------------------------------------------------------------------------
// Scenario randomization.
// ---------------------------------------------------------------------------

struct ScenarioConfig {
    double randomization_range = 0.25;  ///< +-fraction around nominal
    int buildings_per_day = 10;
    int initial_days = 1;      ///< closed-loop MPC days before the first training
    int days_per_iteration = 2;
    double setpoint_min = 19.0;
    double setpoint_max = 22.0;
    double time_jitter_h = 1.0;
    std::uint64_t seed = 1;

    void validate() const {
        if (!(randomization_range >= 0 && randomization_range < 1))
            throw ConfigError("scenario: randomization range must be in [0,1)");
        if (buildings_per_day < 1 || initial_days < 1 || days_per_iteration < 1)
            throw ConfigError("scenario: counts must be >= 1");
        if (!(setpoint_max >= setpoint_min))
            throw ConfigError("scenario: setpoint range inverted");
    }
};

struct DataLibraries {
    WeatherLibrary weather;
    std::vector<TariffPattern> tariffs;
    std::vector<SetpointPattern> setpoints;  ///< empty -> synthetic generator
};

struct Scenario {
    std::string id;
    long building_id = 0;
    BuildingModel building;
    HeatPumpModel hp;
    int weather_day = 0;  ///< starting day in the weather library
    int days = 1;
    TariffPattern tariff;
    SetpointPattern schedule;
};

/// Synthetic day template: sleep setback overnight, morning home block,
/// away during work hours, evening home block. Times jittered, setpoints
/// drawn from the configured range.
inline SetpointPattern generate_setpoint_pattern(std::mt19937_64& rng,
                                                 const ScenarioConfig& cfg) {
    auto u = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    const double j = cfg.time_jitter_h;
    const double wake = 6.5 + u(-j, j);
    const double leave = 8.5 + u(-j, j);
    const double back = 17.5 + u(-j, j);
    const double sleep = 22.0 + u(-j, j);
    const double t_home = u(cfg.setpoint_min, cfg.setpoint_max);
    const double t_sleep = t_home - u(1.0, 3.0);
    SetpointPattern p;
    p.name = "generated";
    p.entries = {{0.0, t_sleep, Mode::Sleep},
                 {wake, t_home, Mode::Home},
                 {leave, t_sleep, Mode::Away},
                 {back, t_home, Mode::Home},
                 {sleep, t_sleep, Mode::Sleep}};
    return p;
}

/// Draw one randomized scenario: building and heat-pump parameters uniform
/// in nominal*(1 +- range), a weather start day, a tariff and a schedule.
inline Scenario random_scenario(std::mt19937_64& rng, const ScenarioConfig& cfg,
                                const DataLibraries& libs, int days, double horizon_hours,
                                long building_id, const std::string& id) {
    cfg.validate();
    if (libs.tariffs.empty()) throw DataError("tariff library is empty");
    const int usable_days =
        static_cast<int>((libs.weather.span_hours() - horizon_hours) / 24.0) - days + 1;
    if (usable_days < 1)
        throw DataError("weather library too short for a " + std::to_string(days) +
                        "-day scenario plus lookahead");
    auto u = [&](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    Scenario s;
    s.id = id;
    s.building_id = building_id;
    const BuildingModel nb = nominal_building();
    const double r = cfg.randomization_range;
    s.building = BuildingModel{nb.r_a_inf * u(1 - r, 1 + r), nb.r_am * u(1 - r, 1 + r),
                               nb.r_m_inf * u(1 - r, 1 + r), nb.c_a * u(1 - r, 1 + r),
                               nb.c_m * u(1 - r, 1 + r),     nb.alpha_a * u(1 - r, 1 + r),
                               nb.alpha_m * u(1 - r, 1 + r)};
    const HeatPumpModel nh = nominal_heat_pump();
    s.hp = HeatPumpModel{nh.beta1 * u(1 - r, 1 + r), nh.beta2 * u(1 - r, 1 + r),
                         nh.gamma * u(1 - r, 1 + r)};
    s.building.validate();
    s.hp.validate();
    s.weather_day = static_cast<int>(std::uniform_int_distribution<int>(0, usable_days - 1)(rng));
    s.days = days;
    s.tariff = libs.tariffs[std::uniform_int_distribution<std::size_t>(
        0, libs.tariffs.size() - 1)(rng)];
    if (libs.setpoints.empty())
        s.schedule = generate_setpoint_pattern(rng, cfg);
    else
        s.schedule = libs.setpoints[std::uniform_int_distribution<std::size_t>(
            0, libs.setpoints.size() - 1)(rng)];
    return s;
}

// ---------------------------------------------------------------------------
// Materialized per-step arrays covering the scenario plus MPC lookahead.
// ---------------------------------------------------------------------------

struct ScenarioTrace {
    double dt = kDefaultDt;
    int sim_steps = 0;    ///< scored/controlled steps (days * steps per day)
    int total_steps = 0;  ///< sim_steps + horizon lookahead
    std::vector<Disturbance> w;
    ComfortSchedule comfort;
    Tariff tariff;  ///< per-step prices with pattern-wide extremes
};

inline ScenarioTrace materialize(const Scenario& s, const DataLibraries& libs, double dt,
                                 int horizon) {
    ScenarioTrace tr;
    tr.dt = dt;
    const int steps_per_day = static_cast<int>(std::lround(24.0 / dt));
    tr.sim_steps = steps_per_day * s.days;
    tr.total_steps = tr.sim_steps + horizon;
    tr.w.resize(static_cast<std::size_t>(tr.total_steps));
    tr.comfort.t_set.resize(static_cast<std::size_t>(tr.total_steps));
    tr.comfort.t_delta.resize(static_cast<std::size_t>(tr.total_steps));
    tr.tariff.price.resize(static_cast<std::size_t>(tr.total_steps));
    for (int k = 0; k < tr.total_steps; ++k) {
        const double local_h = k * dt;
        const double abs_h = 24.0 * s.weather_day + local_h;
        tr.w[static_cast<std::size_t>(k)] = {libs.weather.t_inf_at(abs_h),
                                             libs.weather.g_at(abs_h)};
        s.schedule.at(local_h, tr.comfort.t_set[static_cast<std::size_t>(k)],
                      tr.comfort.t_delta[static_cast<std::size_t>(k)]);
        tr.tariff.price[static_cast<std::size_t>(k)] = s.tariff.price_at(local_h);
    }
    tr.tariff.pi_min = s.tariff.min_price();
    tr.tariff.pi_max = s.tariff.max_price();
    tr.tariff.validate();
    return tr;
}

}  // namespace bcmpc
