#include <catch_amalgamated.hpp>

#include "bcmpc/cipg.hpp"
#include "test_support.hpp"

using namespace bcmpc;
using Catch::Approx;

TEST_CASE("pi1 copies the transition matrix") {
    StateSpace ss = discretize(nominal_building(), kDefaultDt);
    auto pi1 = group_building(ss);
    CHECK(pi1[0] == Approx(0.95).epsilon(1e-12));
    CHECK(pi1[1] == ss.a12);
    CHECK(pi1[2] == ss.a21);
    CHECK(pi1[3] == ss.a22);
    StateSpace tiny = discretize(nominal_building(), 1e-12);
    auto id = group_building(tiny);
    CHECK(id[0] == Approx(1.0).margin(1e-9));
    CHECK(id[1] == Approx(0.0).margin(1e-9));
    CHECK(id[2] == Approx(0.0).margin(1e-9));
    CHECK(id[3] == Approx(1.0).margin(1e-9));
}

TEST_CASE("co-scaled buildings produce identical groupings") {
    // R -> 2R, C -> C/2 leaves A and E unchanged; beta/2 and alpha/2 leave
    // b11 and the solar channels unchanged. Scaling by a power of two keeps
    // the arithmetic exact, so the features agree bitwise.
    BuildingModel b = nominal_building();
    BuildingModel b2{b.r_a_inf * 2, b.r_am * 2, b.r_m_inf * 2, b.c_a / 2, b.c_m / 2,
                     b.alpha_a / 2, b.alpha_m / 2};
    HeatPumpModel hp = nominal_heat_pump();
    HeatPumpModel hp2{hp.beta1 / 2, hp.beta2 / 2, hp.gamma};
    StateSpace ss = discretize(b, kDefaultDt);
    StateSpace ss2 = discretize(b2, kDefaultDt);
    CHECK(group_building(ss) == group_building(ss2));

    std::vector<Disturbance> w = {{-3.0, 0.1}, {-2.0, 0.2}, {0.0, 0.0}, {1.0, 0.4}};
    ComfortSchedule comfort;
    comfort.t_set = {20, 20, 21, 21};
    comfort.t_delta = {0.5, 0.5, kInf, 1.0};
    Tariff tariff = Tariff::from_prices({0.1, 0.2, 0.3, 0.1}, 0.1, 0.3);
    PenaltyWeights pen;
    CycleConstraint cycle{3, 3, {0, 0, 1}};
    ThermalState x0{19.5, 20.5};
    MpcInstance i1 = build_instance(b, hp, ss, x0, w, comfort, tariff, pen, cycle, 4);
    MpcInstance i2 = build_instance(b2, hp2, ss2, x0, w, comfort, tariff, pen, cycle, 4);
    CHECK(flatten(assemble(i1)) == flatten(assemble(i2)));
}

TEST_CASE("pi4 measures the position inside the comfort band") {
    ComfortSchedule c;
    c.t_set = {20.0, 21.0, 22.0};
    c.t_delta = {0.5, 0.5, kInf};
    auto at_lower = group_comfort(19.5, c);
    CHECK(at_lower[0] == Approx(0.0).margin(1e-12));
    auto at_upper = group_comfort(20.5, c);
    CHECK(at_upper[0] == Approx(1.0).margin(1e-12));
    auto below = group_comfort(20.0, c);
    CHECK(below[1] == Approx(-0.5).margin(1e-12));  // out of band goes negative
    CHECK(below[2] == 0.5);                          // away sentinel
    ComfortSchedule zero;
    zero.t_set = {20.0};
    zero.t_delta = {0.0};
    CHECK_THROWS_AS(group_comfort(20.0, zero), std::invalid_argument);
}

TEST_CASE("pi4 is inside [0,1] exactly when t_a is inside the band") {
    testutil::Rng rng(610);
    for (int it = 0; it < 200; ++it) {
        const double t_set = testutil::uniform(rng, 18, 23);
        const double t_delta = testutil::uniform(rng, 0.1, 2.0);
        const double t_a = testutil::uniform(rng, 15, 26);
        ComfortSchedule c;
        c.t_set = {t_set};
        c.t_delta = {t_delta};
        const double v = group_comfort(t_a, c)[0];
        const bool in_band = t_a >= t_set - t_delta && t_a <= t_set + t_delta;
        CHECK((v >= 0.0 && v <= 1.0) == in_band);
    }
}

TEST_CASE("pi5 normalizes prices against the schedule extremes") {
    Tariff t = Tariff::from_prices({0.1, 0.25, 0.4}, 0.1, 0.4);
    auto pi5 = group_price(t, 3.0);
    CHECK(pi5[0] == Approx(0.0).margin(1e-12));
    CHECK(pi5[1] == Approx(1.5).margin(1e-12));
    CHECK(pi5[2] == Approx(3.0).margin(1e-12));

    Tariff flat = Tariff::from_prices({0.2, 0.2}, 0.2, 0.2);
    auto deg = group_price(flat, 3.0);
    CHECK(deg[0] == Approx(1.5).margin(1e-12));
    CHECK(deg[1] == Approx(1.5).margin(1e-12));
}

TEST_CASE("pi5 is invariant under affine retariffing") {
    testutil::Rng rng(611);
    for (int it = 0; it < 50; ++it) {
        std::vector<double> p(6);
        for (auto& v : p) v = testutil::uniform(rng, 0.05, 0.5);
        const double lo = *std::min_element(p.begin(), p.end());
        const double hi = *std::max_element(p.begin(), p.end());
        if (hi - lo < 1e-6) continue;
        Tariff t = Tariff::from_prices(p, lo, hi);
        const double a = testutil::uniform(rng, 0.5, 3.0);
        const double bshift = testutil::uniform(rng, 0.0, 0.2);
        std::vector<double> q(p.size());
        for (std::size_t i = 0; i < p.size(); ++i) q[i] = a * p[i] + bshift;
        Tariff t2 = Tariff::from_prices(q, a * lo + bshift, a * hi + bshift);
        auto pi5 = group_price(t, 3.0);
        auto pi5b = group_price(t2, 3.0);
        for (std::size_t i = 0; i < p.size(); ++i)
            CHECK(pi5[i] == Approx(pi5b[i]).margin(1e-10));
    }
}

TEST_CASE("pi3 zeroes the right channels") {
    StateSpace ss = discretize(nominal_building(), kDefaultDt);
    auto night = group_weather(ss, {{-5.0, 0.0}});
    CHECK(night[0][2] == 0.0);
    CHECK(night[0][3] == 0.0);
    CHECK(night[0][0] == Approx(ss.e11 * -5.0));
    auto freezing = group_weather(ss, {{0.0, 0.3}});
    CHECK(freezing[0][0] == 0.0);
    CHECK(freezing[0][1] == 0.0);
    CHECK(freezing[0][3] == Approx(ss.e22 * 0.3));
}

TEST_CASE("pi6 lists the most recent controls first") {
    CycleConstraint c{3, 3, {1, 0, 0}};
    auto pi6 = group_history(c);
    CHECK(pi6 == std::array<double, 3>{0.0, 0.0, 1.0});
    CycleConstraint off{3, 3, {0, 0, 0}};
    CHECK(group_history(off) == std::array<double, 3>{0.0, 0.0, 0.0});
}

TEST_CASE("assemble is deterministic and flatten has the documented length") {
    testutil::Rng rng(612);
    MpcInstance inst = testutil::random_instance(rng, 9);
    FeatureVector fv = assemble(inst);
    CHECK(fv.horizon == 9);
    CHECK(flatten(fv).size() == 4 + 8 * 9 + 3);
    CHECK(flatten(fv) == flatten(assemble(inst)));
    // pi5 range invariant
    const double gamma = inst.step_energy / inst.ss.dt;
    for (double v : fv.pi5) {
        CHECK(v >= -1e-12);
        CHECK(v <= gamma + 1e-12);
    }
}

TEST_CASE("identical features with matched penalty ratios get identical controls") {
    // Pair construction: R,C co-scaling by 2 (bitwise-equal matrices) plus
    // tariff scaling by 3 with penalties scaled to keep the
    // penalty-to-price-range ratio.
    testutil::Rng rng(613);
    for (int it = 0; it < 20; ++it) {
        MpcInstance a = testutil::random_instance(rng, 8);
        MpcInstance b = a;
        for (auto& p : b.tariff.price) p *= 3.0;
        b.tariff.pi_min *= 3.0;
        b.tariff.pi_max *= 3.0;
        b.penalties.under *= 3.0;
        b.penalties.over *= 3.0;
        FeatureVector fa = assemble(a);
        FeatureVector fb = assemble(b);
        for (int j = 0; j < 8; ++j)
            CHECK(fa.pi5[static_cast<std::size_t>(j)] ==
                  Approx(fb.pi5[static_cast<std::size_t>(j)]).margin(1e-10));
        MpcSolution sa = solve_bnb(a);
        MpcSolution sb = solve_bnb(b);
        CHECK(sa.u == sb.u);
    }
}
