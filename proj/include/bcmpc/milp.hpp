#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bcmpc/common.hpp"
#include "bcmpc/lp.hpp"
#include "bcmpc/schedule.hpp"
#include "bcmpc/thermal.hpp"

namespace bcmpc {

// ---------------------------------------------------------------------------
// One receding-horizon problem: minimize energy cost plus comfort penalties
// over N steps, subject to the discretized dynamics, soft comfort bounds and
// minimum on/off dwell times. Comfort is checked on the predicted air
// temperature at the END of each step j against that step's band.
// ---------------------------------------------------------------------------

struct MpcInstance {
    int horizon = 0;
    ThermalState state0;
    StateSpace ss;
    std::vector<double> b11;             ///< heat-pump input column per step
    std::vector<Disturbance> disturbances;
    ComfortSchedule comfort;
    Tariff tariff;
    PenaltyWeights penalties;
    CycleConstraint cycle;
    double step_energy = 0.0;  ///< gamma * dt, kWh per on-step

    void validate() const {
        if (horizon < 1) throw std::invalid_argument("MpcInstance: horizon must be >= 1");
        const auto n = static_cast<std::size_t>(horizon);
        if (b11.size() != n || disturbances.size() != n || comfort.size() != n ||
            tariff.price.size() != n)
            throw std::invalid_argument("MpcInstance: horizon-indexed array length mismatch");
        comfort.validate();
        tariff.validate();
        penalties.validate();
        cycle.validate();
        if (!(step_energy > 0)) throw std::invalid_argument("MpcInstance: step_energy must be > 0");
        if (!(ss.dt > 0)) throw std::invalid_argument("MpcInstance: state space not discretized");
    }
};

enum class MpcStatus { Optimal, InfeasibleModelError };

struct MpcSolution {
    std::vector<int> u;
    std::vector<int> v_up;
    std::vector<int> v_down;
    std::vector<double> t_pen_under;
    std::vector<double> t_pen_over;
    double objective = 0.0;
    double cost_energy = 0.0;
    double cost_comfort = 0.0;
    MpcStatus status = MpcStatus::Optimal;
    long nodes = 0;  ///< branch-and-bound nodes processed
};

inline MpcInstance build_instance(const BuildingModel& building, const HeatPumpModel& hp,
                                  const StateSpace& ss, const ThermalState& state0,
                                  std::span<const Disturbance> forecasts,
                                  const ComfortSchedule& comfort, const Tariff& tariff,
                                  const PenaltyWeights& penalties, const CycleConstraint& cycle,
                                  int horizon) {
    if (horizon < 1) throw std::invalid_argument("build_instance: horizon must be >= 1");
    const auto n = static_cast<std::size_t>(horizon);
    if (forecasts.size() < n || comfort.size() < n || tariff.price.size() < n)
        throw std::invalid_argument("build_instance: forecast/schedule arrays shorter than horizon");
    MpcInstance inst;
    inst.horizon = horizon;
    inst.state0 = state0;
    inst.ss = ss;
    inst.b11.reserve(n);
    inst.disturbances.assign(forecasts.begin(), forecasts.begin() + horizon);
    inst.comfort.t_set.assign(comfort.t_set.begin(), comfort.t_set.begin() + horizon);
    inst.comfort.t_delta.assign(comfort.t_delta.begin(), comfort.t_delta.begin() + horizon);
    inst.tariff.price.assign(tariff.price.begin(), tariff.price.begin() + horizon);
    inst.tariff.pi_min = tariff.pi_min;
    inst.tariff.pi_max = tariff.pi_max;
    inst.penalties = penalties;
    inst.cycle = cycle;
    inst.step_energy = hp.gamma * ss.dt;
    // linearize the heat-pump column at the setpoint, per step
    for (std::size_t j = 0; j < n; ++j)
        inst.b11.push_back(hp_input(hp, building, inst.comfort.t_set[j],
                                    inst.disturbances[j].t_inf, ss.dt));
    inst.validate();
    return inst;
}

// ---------------------------------------------------------------------------
// Exact scoring of a concrete control sequence via the instance's own
// dynamics. This is the single source of objective values: the oracle, the
// branch-and-bound incumbents and reported solutions all go through it.
// ---------------------------------------------------------------------------

struct ControlScore {
    double objective = 0.0;
    double cost_energy = 0.0;
    double cost_comfort = 0.0;
    std::vector<double> pen_under, pen_over;
    std::vector<double> t_a;  ///< predicted air temperature after each step
};

inline ControlScore score_controls(const MpcInstance& inst, const std::vector<int>& u) {
    const int n = inst.horizon;
    ControlScore s;
    s.pen_under.assign(n, 0.0);
    s.pen_over.assign(n, 0.0);
    s.t_a.assign(n, 0.0);
    double ta = inst.state0.t_a, tm = inst.state0.t_m;
    for (int j = 0; j < n; ++j) {
        const auto& w = inst.disturbances[j];
        const double na = inst.ss.a11 * ta + inst.ss.a12 * tm + inst.b11[j] * u[j] +
                          inst.ss.e11 * w.t_inf + inst.ss.e12 * w.g;
        const double nm = inst.ss.a21 * ta + inst.ss.a22 * tm + inst.ss.e21 * w.t_inf +
                          inst.ss.e22 * w.g;
        ta = na;
        tm = nm;
        s.t_a[j] = ta;
        s.cost_energy += inst.tariff.price[j] * inst.step_energy * u[j];
        if (!inst.comfort.away(j)) {
            s.pen_under[j] = std::max(0.0, inst.comfort.lower(j) - ta);
            s.pen_over[j] = std::max(0.0, ta - inst.comfort.upper(j));
            s.cost_comfort += inst.penalties.under * s.pen_under[j] +
                              inst.penalties.over * s.pen_over[j];
        }
    }
    s.objective = s.cost_energy + s.cost_comfort;
    return s;
}

/// Switch indicators implied by a binary control sequence and the history.
inline void canonical_switches(const MpcInstance& inst, const std::vector<int>& u,
                               std::vector<int>& v_up, std::vector<int>& v_down) {
    const int n = inst.horizon;
    v_up.assign(n, 0);
    v_down.assign(n, 0);
    int prev = inst.cycle.last_control();
    for (int j = 0; j < n; ++j) {
        v_up[j] = (u[j] == 1 && prev == 0) ? 1 : 0;
        v_down[j] = (u[j] == 0 && prev == 1) ? 1 : 0;
        prev = u[j];
    }
}

inline MpcSolution make_solution(const MpcInstance& inst, const std::vector<int>& u, long nodes) {
    MpcSolution sol;
    sol.u = u;
    canonical_switches(inst, u, sol.v_up, sol.v_down);
    ControlScore s = score_controls(inst, u);
    sol.t_pen_under = std::move(s.pen_under);
    sol.t_pen_over = std::move(s.pen_over);
    sol.cost_energy = s.cost_energy;
    sol.cost_comfort = s.cost_comfort;
    sol.objective = sol.cost_energy + sol.cost_comfort;
    sol.status = MpcStatus::Optimal;
    sol.nodes = nodes;
    return sol;
}

// Objective ties within this window are broken lexicographically (all-off
// smallest). Shared by the enumeration oracle and the branch-and-bound.
inline constexpr double kTieTol = 1e-9;

// ---------------------------------------------------------------------------
// Brute-force enumeration oracle, N <= 14.
// ---------------------------------------------------------------------------

namespace detail {

struct EnumContext {
    const MpcInstance* inst = nullptr;
    std::vector<int> u;
    std::vector<int> best_u;
    double best = kInf;
    bool lex_pass = false;  // second pass: first qualifying sequence in lex order
    bool found = false;

    void dfs(int j, double ta, double tm, double cost, int prev, int run) {
        const auto& inst_ = *inst;
        const int n = inst_.horizon;
        // step costs are nonnegative, so the partial cost is a valid bound
        if (lex_pass) {
            if (found || cost > best + kTieTol) return;
        } else {
            if (cost >= best) return;
        }
        if (j == n) {
            if (lex_pass) {
                if (cost <= best + kTieTol) {
                    best_u = u;
                    found = true;
                }
            } else if (cost < best) {
                best = cost;
            }
            return;
        }
        for (int val = 0; val <= 1; ++val) {
            if (val != prev) {
                const int need = prev == 1 ? inst_.cycle.min_on_steps : inst_.cycle.min_off_steps;
                if (run < need) continue;  // dwell time not yet met
            }
            const auto& w = inst_.disturbances[j];
            const double na = inst_.ss.a11 * ta + inst_.ss.a12 * tm + inst_.b11[j] * val +
                              inst_.ss.e11 * w.t_inf + inst_.ss.e12 * w.g;
            const double nm = inst_.ss.a21 * ta + inst_.ss.a22 * tm +
                              inst_.ss.e21 * w.t_inf + inst_.ss.e22 * w.g;
            double c = cost + inst_.tariff.price[j] * inst_.step_energy * val;
            if (!inst_.comfort.away(j)) {
                c += inst_.penalties.under * std::max(0.0, inst_.comfort.lower(j) - na) +
                     inst_.penalties.over * std::max(0.0, na - inst_.comfort.upper(j));
            }
            u[j] = val;
            dfs(j + 1, na, nm, c, val, val == prev ? run + 1 : 1);
        }
    }
};

}  // namespace detail

/// Enumerates every cycle-feasible control sequence, scores it exactly, and
/// returns the lexicographically smallest optimum (ties within kTieTol).
inline MpcSolution brute_force(const MpcInstance& inst) {
    inst.validate();
    if (inst.horizon > 14)
        throw std::invalid_argument("brute_force: horizon too large (max 14)");
    detail::EnumContext ctx;
    ctx.inst = &inst;
    ctx.u.assign(inst.horizon, 0);
    const int prev = inst.cycle.last_control();
    const int run = inst.cycle.current_run_length();
    ctx.lex_pass = false;
    ctx.dfs(0, inst.state0.t_a, inst.state0.t_m, 0.0, prev, run);
    ctx.lex_pass = true;
    ctx.found = false;
    ctx.dfs(0, inst.state0.t_a, inst.state0.t_m, 0.0, prev, run);
    if (!ctx.found) throw SolverError("brute_force: no feasible control sequence");
    MpcSolution sol = make_solution(inst, ctx.best_u, 0);
    return sol;
}

// ---------------------------------------------------------------------------
// LP relaxation of the instance (binaries relaxed to [0,1]).
// ---------------------------------------------------------------------------

namespace detail {

/// Condensed LP over [u | v_up | v_down | pen...]; comfort rows express the
/// predicted air temperature as an affine function of the controls.
struct MilpBuilder {
    const MpcInstance* inst = nullptr;
    LpProblem lp;
    std::vector<int> pen_lo_col, pen_hi_col;  ///< -1 on away steps
    std::vector<double> free_ta;              ///< zero-input response of T_a
    std::vector<std::vector<double>> coef;    ///< coef[j][i] = dT_a,j+1 / du_i

    explicit MilpBuilder(const MpcInstance& instance) : inst(&instance) {
        const int n = inst->horizon;
        const auto& ss = inst->ss;

        // first row of A^d
        std::vector<double> p11(n), p12(n);
        p11[0] = 1.0;
        p12[0] = 0.0;
        for (int d = 1; d < n; ++d) {
            p11[d] = p11[d - 1] * ss.a11 + p12[d - 1] * ss.a21;
            p12[d] = p11[d - 1] * ss.a12 + p12[d - 1] * ss.a22;
        }
        free_ta.resize(n);
        coef.assign(n, {});
        double fa = inst->state0.t_a, fm = inst->state0.t_m;
        for (int j = 0; j < n; ++j) {
            const auto& w = inst->disturbances[j];
            const double na = ss.a11 * fa + ss.a12 * fm + ss.e11 * w.t_inf + ss.e12 * w.g;
            const double nm = ss.a21 * fa + ss.a22 * fm + ss.e21 * w.t_inf + ss.e22 * w.g;
            fa = na;
            fm = nm;
            free_ta[j] = fa;
            coef[j].resize(j + 1);
            for (int i = 0; i <= j; ++i) coef[j][i] = p11[j - i] * inst->b11[i];
        }

        // columns
        const int u0 = 0, vup0 = n, vdn0 = 2 * n;
        int next = 3 * n;
        pen_lo_col.assign(n, -1);
        pen_hi_col.assign(n, -1);
        for (int j = 0; j < n; ++j) {
            if (inst->comfort.away(j)) continue;
            pen_lo_col[j] = next++;
            pen_hi_col[j] = next++;
        }
        lp.num_vars = next;
        lp.cost.assign(next, 0.0);
        lp.lower.assign(next, 0.0);
        lp.upper.assign(next, kInf);
        for (int j = 0; j < n; ++j) {
            lp.cost[u0 + j] = inst->tariff.price[j] * inst->step_energy;
            lp.upper[u0 + j] = 1.0;
            lp.upper[vup0 + j] = 1.0;
            lp.upper[vdn0 + j] = 1.0;
            if (pen_lo_col[j] >= 0) {
                lp.cost[pen_lo_col[j]] = inst->penalties.under;
                lp.cost[pen_hi_col[j]] = inst->penalties.over;
            }
        }

        // history switch indicators v_{-t}, t = 1 .. max(m_on, m_off) - 1
        const auto& hist = inst->cycle.history;
        const int h = static_cast<int>(hist.size());
        auto hist_u = [&](int t) { return hist[h - t]; };  // u_{k-t}
        const int m_on = inst->cycle.min_on_steps;
        const int m_off = inst->cycle.min_off_steps;
        auto hist_vup = [&](int t) { return hist_u(t) == 1 && hist_u(t + 1) == 0 ? 1 : 0; };
        auto hist_vdn = [&](int t) { return hist_u(t) == 0 && hist_u(t + 1) == 1 ? 1 : 0; };

        // switch equations: u_j - u_{j-1} - vup_j + vdn_j = 0
        for (int j = 0; j < n; ++j) {
            LpRow row;
            row.equality = true;
            row.terms.push_back({u0 + j, 1.0});
            row.terms.push_back({vup0 + j, -1.0});
            row.terms.push_back({vdn0 + j, 1.0});
            if (j >= 1)
                row.terms.push_back({u0 + j - 1, -1.0});
            else
                row.rhs = inst->cycle.last_control();
            lp.rows.push_back(std::move(row));
        }
        // minimum on time: sum of turn-ons in the trailing window forces u on
        for (int j = 0; j < n; ++j) {
            LpRow row;
            row.terms.push_back({u0 + j, -1.0});
            double rhs = 0.0;
            for (int i = j - m_on + 1; i <= j; ++i) {
                if (i >= 0)
                    row.terms.push_back({vup0 + i, 1.0});
                else
                    rhs -= hist_vup(-i);
            }
            row.rhs = rhs;
            lp.rows.push_back(std::move(row));
        }
        // minimum off time
        for (int j = 0; j < n; ++j) {
            LpRow row;
            row.terms.push_back({u0 + j, 1.0});
            double rhs = 1.0;
            for (int i = j - m_off + 1; i <= j; ++i) {
                if (i >= 0)
                    row.terms.push_back({vdn0 + i, 1.0});
                else
                    rhs -= hist_vdn(-i);
            }
            row.rhs = rhs;
            lp.rows.push_back(std::move(row));
        }
        // comfort bands on the predicted temperature, slack-relaxed
        for (int j = 0; j < n; ++j) {
            if (pen_lo_col[j] < 0) continue;
            LpRow lo;
            for (int i = 0; i <= j; ++i)
                if (coef[j][i] != 0.0) lo.terms.push_back({u0 + i, -coef[j][i]});
            lo.terms.push_back({pen_lo_col[j], -1.0});
            lo.rhs = free_ta[j] - inst->comfort.lower(j);
            lp.rows.push_back(std::move(lo));
            LpRow hi;
            for (int i = 0; i <= j; ++i)
                if (coef[j][i] != 0.0) hi.terms.push_back({u0 + i, coef[j][i]});
            hi.terms.push_back({pen_hi_col[j], -1.0});
            hi.rhs = inst->comfort.upper(j) - free_ta[j];
            lp.rows.push_back(std::move(hi));
        }
    }

    /// Bounds with branching decisions applied (-1 free, 0/1 fixed).
    void bounds_for(const std::vector<signed char>& fixed, std::vector<double>& lo,
                    std::vector<double>& hi) const {
        lo = lp.lower;
        hi = lp.upper;
        for (std::size_t j = 0; j < fixed.size(); ++j) {
            if (fixed[j] < 0) continue;
            lo[j] = fixed[j];
            hi[j] = fixed[j];
        }
    }
};

}  // namespace detail

struct LpRelaxationResult {
    LpStatus status = LpStatus::IterLimit;
    double bound = 0.0;
    std::vector<double> u;  ///< possibly fractional controls
};

/// Solve the LP relaxation of the instance (optionally with branching fixes).
inline LpRelaxationResult solve_lp_relaxation(const MpcInstance& inst,
                                              const std::vector<signed char>& fixed = {}) {
    inst.validate();
    detail::MilpBuilder builder(inst);
    std::vector<double> lo, hi;
    std::vector<signed char> fx = fixed;
    fx.resize(static_cast<std::size_t>(inst.horizon), -1);
    builder.bounds_for(fx, lo, hi);
    LpSolution sol = solve_lp(builder.lp, lo, hi);
    LpRelaxationResult out;
    out.status = sol.status;
    if (sol.status == LpStatus::IterLimit)
        throw SolverError("solve_lp_relaxation: simplex iteration limit reached");
    if (sol.status == LpStatus::Optimal) {
        out.bound = sol.objective;
        out.u.assign(sol.x.begin(), sol.x.begin() + inst.horizon);
    } else {
        out.bound = kInf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Branch and bound.
// ---------------------------------------------------------------------------

struct BnbOptions {
    long node_limit = 1'000'000;
    /// lexicographic tie refinement: -1 auto (always for N <= 14, otherwise
    /// only when ties were observed), 0 off, 1 forced
    int lex_refine = -1;
};

namespace detail {

struct BnbNode {
    std::vector<signed char> fixed;
    double bound = -kInf;  ///< parent LP bound (refined on expansion)
};

class BnbSolver {
  public:
    BnbSolver(const MpcInstance& inst, const BnbOptions& opts)
        : inst_(inst), builder_(inst), opts_(opts) {}

    MpcSolution solve() {
        const int n = inst_.horizon;
        std::vector<BnbNode> stack;
        stack.push_back({std::vector<signed char>(static_cast<std::size_t>(n), -1), -kInf});

        while (!stack.empty()) {
            if (++nodes_ > opts_.node_limit)
                throw NodeLimitError("solve_bnb: node limit exceeded (" +
                                     std::to_string(opts_.node_limit) + ")");
            if (nodes_ % 1000 == 0 && stack.size() > 1) {
                // best-bound reordering: cheapest bound moves to the top
                std::stable_sort(stack.begin(), stack.end(),
                                 [](const BnbNode& a, const BnbNode& b) {
                                     return a.bound > b.bound;
                                 });
            }
            BnbNode node = std::move(stack.back());
            stack.pop_back();
            if (have_incumbent_ && node.bound > best_obj_ + kPruneMargin) continue;

            std::vector<double> lo, hi;
            builder_.bounds_for(node.fixed, lo, hi);
            LpSolution rel = solve_lp(builder_.lp, lo, hi);
            if (rel.status == LpStatus::IterLimit)
                throw SolverError("solve_bnb: LP iteration limit in node " +
                                  std::to_string(nodes_));
            if (rel.status == LpStatus::Infeasible) continue;
            if (have_incumbent_ && rel.objective > best_obj_ + kPruneMargin) continue;

            // integrality check on u
            int branch_var = -1;
            double branch_frac = -1.0;
            for (int j = 0; j < n; ++j) {
                const double f = rel.x[j] - std::floor(rel.x[j]);
                const double dist = std::min(f, 1.0 - f);
                if (dist > 1e-6 && dist > branch_frac + 1e-12) {
                    branch_frac = dist;
                    branch_var = j;
                }
            }
            if (branch_var < 0) {
                std::vector<int> u(n);
                for (int j = 0; j < n; ++j) u[j] = static_cast<int>(std::lround(rel.x[j]));
                if (violates_min_cycle(inst_.cycle, u)) {
                    // numerically integral but infeasible after rounding;
                    // branch on the first free variable instead
                    for (int j = 0; j < n; ++j)
                        if (node.fixed[j] < 0) { branch_var = j; break; }
                    if (branch_var < 0) continue;
                } else {
                    offer_candidate(u);
                    continue;
                }
            }
            BnbNode on = node, off = node;
            on.fixed[branch_var] = 1;
            off.fixed[branch_var] = 0;
            on.bound = rel.objective;
            off.bound = rel.objective;
            stack.push_back(std::move(on));
            stack.push_back(std::move(off));  // off branch explored first
        }

        MpcSolution sol;
        if (!have_incumbent_) {
            sol.status = MpcStatus::InfeasibleModelError;
            sol.nodes = nodes_;
            return sol;
        }
        const bool refine = opts_.lex_refine == 1 ||
                            (opts_.lex_refine < 0 && (inst_.horizon <= 14 || ties_seen_ >= 2));
        if (refine) lex_refine();
        sol = make_solution(inst_, best_u_, nodes_);
        return sol;
    }

  private:
    static constexpr double kPruneMargin = 1e-7;

    void offer_candidate(const std::vector<int>& u) {
        const double obj = score_controls(inst_, u).objective;
        if (!have_incumbent_ || obj < best_obj_ - kTieTol) {
            best_obj_ = obj;
            best_u_ = u;
            have_incumbent_ = true;
            ties_seen_ = 1;
        } else if (obj <= best_obj_ + kTieTol) {
            ++ties_seen_;
            if (std::lexicographical_compare(u.begin(), u.end(), best_u_.begin(),
                                             best_u_.end())) {
                best_u_ = u;
                best_obj_ = std::min(best_obj_, obj);
            }
        }
    }

    /// Sequentially fix each u_j to 0 when an optimal completion allows it,
    /// yielding the lexicographically smallest optimum.
    void lex_refine() {
        const int n = inst_.horizon;
        std::vector<signed char> fixed(static_cast<std::size_t>(n), -1);
        for (int j = 0; j < n; ++j) {
            fixed[j] = 0;
            std::vector<int> completion;
            if (!completion_exists(fixed, completion)) {
                fixed[j] = 1;
            } else {
                // adopt the found completion so a full solution is always at hand
                best_u_ = completion;
            }
        }
        best_obj_ = score_controls(inst_, best_u_).objective;
    }

    bool completion_exists(const std::vector<signed char>& base,
                           std::vector<int>& found_u) {
        const int n = inst_.horizon;
        std::vector<BnbNode> stack;
        stack.push_back({base, -kInf});
        while (!stack.empty()) {
            if (++nodes_ > opts_.node_limit)
                throw NodeLimitError("solve_bnb: node limit exceeded during tie refinement");
            BnbNode node = std::move(stack.back());
            stack.pop_back();
            std::vector<double> lo, hi;
            builder_.bounds_for(node.fixed, lo, hi);
            LpSolution rel = solve_lp(builder_.lp, lo, hi);
            if (rel.status != LpStatus::Optimal) continue;
            if (rel.objective > best_obj_ + kTieTol + kPruneMargin) continue;
            int branch_var = -1;
            double branch_frac = -1.0;
            for (int j = 0; j < n; ++j) {
                const double f = rel.x[j] - std::floor(rel.x[j]);
                const double dist = std::min(f, 1.0 - f);
                if (dist > 1e-6 && dist > branch_frac + 1e-12) {
                    branch_frac = dist;
                    branch_var = j;
                }
            }
            if (branch_var < 0) {
                std::vector<int> u(n);
                for (int j = 0; j < n; ++j) u[j] = static_cast<int>(std::lround(rel.x[j]));
                if (!violates_min_cycle(inst_.cycle, u) &&
                    score_controls(inst_, u).objective <= best_obj_ + kTieTol) {
                    found_u = u;
                    return true;
                }
                for (int j = 0; j < n; ++j)
                    if (node.fixed[j] < 0) { branch_var = j; break; }
                if (branch_var < 0) continue;
            }
            BnbNode on = node, off = node;
            on.fixed[branch_var] = 1;
            off.fixed[branch_var] = 0;
            stack.push_back(std::move(on));
            stack.push_back(std::move(off));
        }
        return false;
    }

    const MpcInstance& inst_;
    MilpBuilder builder_;
    BnbOptions opts_;
    long nodes_ = 0;
    bool have_incumbent_ = false;
    double best_obj_ = kInf;
    std::vector<int> best_u_;
    int ties_seen_ = 0;
};

}  // namespace detail

/// Exact integer optimum of the instance with deterministic tie-breaking
/// (lexicographically smallest optimal sequence; all-off preferred).
inline MpcSolution solve_bnb(const MpcInstance& inst, const BnbOptions& opts = {}) {
    inst.validate();
    detail::BnbSolver solver(inst, opts);
    return solver.solve();
}

/// Receding-horizon policy: solve the instance and return the first control.
inline int mpc_policy(const BuildingModel& building, const HeatPumpModel& hp,
                      const StateSpace& ss, const ThermalState& state,
                      std::span<const Disturbance> forecasts, const ComfortSchedule& comfort,
                      const Tariff& tariff, const PenaltyWeights& penalties,
                      const CycleConstraint& cycle, int horizon, const BnbOptions& opts = {}) {
    MpcInstance inst =
        build_instance(building, hp, ss, state, forecasts, comfort, tariff, penalties, cycle, horizon);
    MpcSolution sol = solve_bnb(inst, opts);
    if (sol.status != MpcStatus::Optimal)
        throw SolverError("mpc_policy: MILP reported infeasible model");
    return sol.u.front();
}

}  // namespace bcmpc
