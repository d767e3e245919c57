// Rough timing probe for receding-horizon solves; not registered with ctest.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "bcmpc/dagger.hpp"

using namespace bcmpc;

int main(int argc, char** argv) {
    const int horizon = argc > 1 ? std::atoi(argv[1]) : 36;
    const int steps = argc > 2 ? std::atoi(argv[2]) : 40;
    DataLibraries libs;
    libs.weather = WeatherLibrary::load(std::string(BCMPC_DATA_DIR) + "/weather_winter.csv");
    libs.tariffs = {TariffPattern::load(std::string(BCMPC_DATA_DIR) + "/tariff_two_period_a.csv")};
    ScenarioConfig cfg;
    std::mt19937_64 rng(41);
    Scenario s = random_scenario(rng, cfg, libs, 1, horizon / 12.0, 0, "bench");
    MpcParams params;
    params.horizon = horizon;
    ScenarioTrace trace = materialize(s, libs, params.dt, params.horizon);
    StateSpace ss = discretize(s.building, params.dt);
    CycleConstraint cycle{3, 3, {0, 0, 0}};
    ThermalState state{trace.comfort.t_set[0], trace.comfort.t_set[0]};
    SimContext ctx;
    ctx.scenario = &s;
    ctx.trace = &trace;
    ctx.ss = &ss;
    ctx.params = &params;
    double total = 0;
    long total_nodes = 0;
    for (int k = 0; k < steps; ++k) {
        ctx.k = k;
        ctx.state = state;
        ctx.cycle = &cycle;
        MpcInstance inst = ctx.instance();
        const auto t0 = std::chrono::steady_clock::now();
        BnbOptions bo; bo.lex_refine = 0; MpcSolution sol = solve_bnb(inst, bo);
        total += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        total_nodes += sol.nodes;
        state = plant_step(state, sol.u[0], trace.w[static_cast<std::size_t>(k)], s.building,
                           s.hp, params.dt);
        cycle = cycle.advanced(sol.u[0]);
    }
    std::printf("N=%d steps=%d total=%.2fs mean=%.1fms nodes/solve=%.1f\n", horizon, steps,
                total, 1000 * total / steps, static_cast<double>(total_nodes) / steps);
    return 0;
}
