#include <catch_amalgamated.hpp>

#include "bcmpc/lp.hpp"
#include "bcmpc/milp.hpp"
#include "test_support.hpp"

using namespace bcmpc;
using Catch::Approx;

TEST_CASE("simplex solves a small inequality LP") {
    // min -2x - 3y  s.t. x + y <= 4, x in [0,3], y in [0,2]  ->  x=2, y=2
    LpProblem p;
    p.num_vars = 2;
    p.cost = {-2.0, -3.0};
    p.lower = {0.0, 0.0};
    p.upper = {3.0, 2.0};
    p.rows.push_back({{{0, 1.0}, {1, 1.0}}, 4.0, false});
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == Approx(-10.0).margin(1e-9));
    CHECK(s.x[0] == Approx(2.0).margin(1e-9));
    CHECK(s.x[1] == Approx(2.0).margin(1e-9));
}

TEST_CASE("simplex handles equality rows through phase one") {
    // min x + y  s.t. x - y = 1  ->  x=1, y=0
    LpProblem p;
    p.num_vars = 2;
    p.cost = {1.0, 1.0};
    p.lower = {0.0, 0.0};
    p.upper = {5.0, 5.0};
    p.rows.push_back({{{0, 1.0}, {1, -1.0}}, 1.0, true});
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective == Approx(1.0).margin(1e-9));
    CHECK(s.x[0] == Approx(1.0).margin(1e-9));
    CHECK(s.x[1] == Approx(0.0).margin(1e-9));
}

TEST_CASE("simplex reports infeasibility") {
    LpProblem p;
    p.num_vars = 2;
    p.cost = {0.0, 0.0};
    p.lower = {0.0, 0.0};
    p.upper = {kInf, kInf};
    p.rows.push_back({{{0, 1.0}, {1, 1.0}}, -1.0, false});
    CHECK(solve_lp(p).status == LpStatus::Infeasible);
}

TEST_CASE("simplex uses bound flips for unconstrained directions") {
    LpProblem p;
    p.num_vars = 1;
    p.cost = {-1.0};
    p.lower = {0.0};
    p.upper = {2.0};
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == Approx(2.0).margin(1e-12));
    CHECK(s.objective == Approx(-2.0).margin(1e-12));
}

TEST_CASE("simplex honors overridden (branching) bounds") {
    LpProblem p;
    p.num_vars = 2;
    p.cost = {1.0, 2.0};
    p.lower = {0.0, 0.0};
    p.upper = {1.0, 1.0};
    p.rows.push_back({{{0, 1.0}, {1, 1.0}}, 1.0, true});
    LpSolution s = solve_lp(p, {1.0, 0.0}, {1.0, 1.0});  // x fixed at 1
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == Approx(1.0).margin(1e-9));
    CHECK(s.x[1] == Approx(0.0).margin(1e-9));
}

TEST_CASE("relaxation of an all-away instance is zero with all-off controls") {
    using namespace testutil;
    Rng rng(411);
    MpcInstance inst = random_instance(rng, 8);
    for (auto& d : inst.comfort.t_delta) d = kInf;
    inst.cycle.history = {0, 0, 0};
    LpRelaxationResult rel = solve_lp_relaxation(inst);
    REQUIRE(rel.status == LpStatus::Optimal);
    CHECK(rel.bound == Approx(0.0).margin(1e-9));
    for (double u : rel.u) CHECK(u == Approx(0.0).margin(1e-7));
}

TEST_CASE("LP bound never exceeds the enumeration optimum") {
    using namespace testutil;
    Rng rng(412);
    for (int it = 0; it < 20; ++it) {
        MpcInstance inst = random_instance(rng, 6);
        LpRelaxationResult rel = solve_lp_relaxation(inst);
        REQUIRE(rel.status == LpStatus::Optimal);
        MpcSolution exact = brute_force(inst);
        CHECK(rel.bound <= exact.objective + 1e-7);
    }
}

TEST_CASE("relaxation respects history lockout") {
    using namespace testutil;
    Rng rng(413);
    MpcInstance inst = random_instance(rng, 6);
    inst.cycle.history = {0, 0, 1};  // turned on one step ago, on for 2 more
    for (auto& d : inst.comfort.t_delta) d = kInf;
    LpRelaxationResult rel = solve_lp_relaxation(inst);
    REQUIRE(rel.status == LpStatus::Optimal);
    CHECK(rel.u[0] == Approx(1.0).margin(1e-7));
    CHECK(rel.u[1] == Approx(1.0).margin(1e-7));
}
