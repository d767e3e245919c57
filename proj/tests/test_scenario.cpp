#include <catch_amalgamated.hpp>

#include <fstream>

#include "bcmpc/scenario.hpp"
#include "test_support.hpp"

using namespace bcmpc;
using Catch::Approx;

namespace {
const std::string kData = BCMPC_DATA_DIR;

DataLibraries load_libs() {
    DataLibraries libs;
    libs.weather = WeatherLibrary::load(kData + "/weather_winter.csv");
    libs.tariffs = {TariffPattern::load(kData + "/tariff_two_period_a.csv"),
                    TariffPattern::load(kData + "/tariff_two_period_b.csv"),
                    TariffPattern::load(kData + "/tariff_three_period.csv")};
    return libs;
}
}  // namespace

TEST_CASE("weather library loads and interpolates") {
    WeatherLibrary w = WeatherLibrary::load(kData + "/weather_winter.csv");
    CHECK(w.whole_days() >= 20);
    const double a = w.t_inf_at(10.0);
    const double b = w.t_inf_at(11.0);
    CHECK(w.t_inf_at(10.5) == Approx(0.5 * (a + b)).margin(1e-12));
    CHECK(w.g_at(2.0) == 0.0);  // night
    CHECK_THROWS_AS(w.t_inf_at(-5.0), DataError);
    CHECK_THROWS_AS(w.t_inf_at(1e6), DataError);
}

TEST_CASE("malformed weather rows name the line") {
    const std::string path = "bad_weather.csv";
    {
        std::ofstream out(path);
        out << "time,t_inf,g\n0,1.0,0\n1,oops,0\n";
    }
    try {
        WeatherLibrary::load(path);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
    std::remove(path.c_str());
}

TEST_CASE("tariff pattern covers the day and prices by hour") {
    TariffPattern t = TariffPattern::load(kData + "/tariff_two_period_a.csv");
    CHECK(t.price_at(0.0) == Approx(0.11));
    CHECK(t.price_at(15.99) == Approx(0.11));
    CHECK(t.price_at(16.0) == Approx(0.32));
    CHECK(t.price_at(20.99) == Approx(0.32));
    CHECK(t.price_at(21.0) == Approx(0.11));
    CHECK(t.price_at(25.0) == Approx(0.11));  // wraps
    CHECK(t.min_price() == Approx(0.11));
    CHECK(t.max_price() == Approx(0.32));

    const std::string path = "bad_tariff.csv";
    {
        std::ofstream out(path);
        out << "start_hour,end_hour,price\n0,10,0.1\n12,24,0.2\n";  // gap 10..12
    }
    CHECK_THROWS_AS(TariffPattern::load(path), DataError);
    std::remove(path.c_str());
}

TEST_CASE("setpoint pattern reads modes and wraps midnight") {
    SetpointPattern p = SetpointPattern::load(kData + "/setpoints_sample.csv");
    double t_set = 0, t_delta = 0;
    p.at(3.0, t_set, t_delta);
    CHECK(t_set == Approx(18.5));
    CHECK(t_delta == Approx(kSleepBand));
    p.at(7.0, t_set, t_delta);
    CHECK(t_set == Approx(21.0));
    CHECK(t_delta == Approx(kHomeBand));
    p.at(12.0, t_set, t_delta);
    CHECK(std::isinf(t_delta));  // away
    p.at(23.5, t_set, t_delta);
    CHECK(t_delta == Approx(kSleepBand));
}

TEST_CASE("generated setpoint template keeps block ordering and bands") {
    ScenarioConfig cfg;
    for (int i = 0; i < 50; ++i) {
        std::mt19937_64 rng(static_cast<std::uint64_t>(i));
        SetpointPattern p = generate_setpoint_pattern(rng, cfg);
        REQUIRE(p.entries.size() == 5);
        for (std::size_t e = 1; e < p.entries.size(); ++e)
            CHECK(p.entries[e].start_h > p.entries[e - 1].start_h);
        CHECK(p.entries[0].mode == Mode::Sleep);
        CHECK(p.entries[2].mode == Mode::Away);
        CHECK(p.entries[1].t_set >= cfg.setpoint_min);
        CHECK(p.entries[1].t_set <= cfg.setpoint_max);
        CHECK(p.entries[0].t_set < p.entries[1].t_set);
    }
}

TEST_CASE("random scenarios stay inside the randomization bounds") {
    DataLibraries libs = load_libs();
    ScenarioConfig cfg;
    const BuildingModel nb = nominal_building();
    const HeatPumpModel nh = nominal_heat_pump();
    int draws = 0;
    for (int i = 0; i < 1500; ++i) {
        std::mt19937_64 rng(derive_seed(5, "bounds", static_cast<std::uint64_t>(i)));
        Scenario s = random_scenario(rng, cfg, libs, 1, 6.0, i, "s" + std::to_string(i));
        auto in_range = [&](double v, double nom) {
            return v >= nom * 0.75 - 1e-12 && v <= nom * 1.25 + 1e-12;
        };
        CHECK(in_range(s.building.r_a_inf, nb.r_a_inf));
        CHECK(in_range(s.building.r_am, nb.r_am));
        CHECK(in_range(s.building.r_m_inf, nb.r_m_inf));
        CHECK(in_range(s.building.c_a, nb.c_a));
        CHECK(in_range(s.building.c_m, nb.c_m));
        CHECK(in_range(s.building.alpha_a, nb.alpha_a));
        CHECK(in_range(s.building.alpha_m, nb.alpha_m));
        CHECK(in_range(s.hp.beta1, nh.beta1));
        CHECK(in_range(s.hp.beta2, nh.beta2));
        CHECK(in_range(s.hp.gamma, nh.gamma));
        draws += 10;
    }
    CHECK(draws >= 10000);
}

TEST_CASE("zero randomization returns the nominal building") {
    DataLibraries libs = load_libs();
    ScenarioConfig cfg;
    cfg.randomization_range = 0.0;
    std::mt19937_64 rng(1);
    Scenario s = random_scenario(rng, cfg, libs, 1, 6.0, 0, "s0");
    CHECK(s.building.r_a_inf == nominal_building().r_a_inf);
    CHECK(s.hp.beta2 == nominal_heat_pump().beta2);
}

TEST_CASE("scenario draws are deterministic in the seed") {
    DataLibraries libs = load_libs();
    ScenarioConfig cfg;
    std::mt19937_64 r1(99), r2(99);
    Scenario a = random_scenario(r1, cfg, libs, 2, 6.0, 0, "a");
    Scenario b = random_scenario(r2, cfg, libs, 2, 6.0, 0, "a");
    CHECK(a.building.c_m == b.building.c_m);
    CHECK(a.weather_day == b.weather_day);
    CHECK(a.tariff.name == b.tariff.name);
}

TEST_CASE("empty tariff library is rejected") {
    DataLibraries libs = load_libs();
    libs.tariffs.clear();
    ScenarioConfig cfg;
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(random_scenario(rng, cfg, libs, 1, 6.0, 0, "x"), DataError);
}

TEST_CASE("materialize produces aligned per-step arrays with lookahead") {
    DataLibraries libs = load_libs();
    ScenarioConfig cfg;
    std::mt19937_64 rng(7);
    Scenario s = random_scenario(rng, cfg, libs, 1, 36.0 / 12.0, 3, "m");
    ScenarioTrace tr = materialize(s, libs, kDefaultDt, 36);
    CHECK(tr.sim_steps == 288);
    CHECK(tr.total_steps == 288 + 36);
    CHECK(tr.w.size() == static_cast<std::size_t>(tr.total_steps));
    CHECK(tr.comfort.size() == static_cast<std::size_t>(tr.total_steps));
    CHECK(tr.tariff.price.size() == static_cast<std::size_t>(tr.total_steps));
    CHECK(tr.tariff.pi_max > tr.tariff.pi_min);
    // prices follow the pattern by hour of day
    for (int k = 0; k < tr.total_steps; k += 17)
        CHECK(tr.tariff.price[static_cast<std::size_t>(k)] ==
              Approx(s.tariff.price_at(k * kDefaultDt)));
}
