#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "bcmpc/common.hpp"
#include "bcmpc/schedule.hpp"

namespace bcmpc {

// Dense bounded-variable primal simplex, two phases. Sized for the MPC
// relaxations this project produces (a few hundred rows/columns), where a
// dense tableau beats sparse bookkeeping.

struct LpRow {
    std::vector<std::pair<int, double>> terms;  ///< (column, coefficient)
    double rhs = 0.0;
    bool equality = false;  ///< true: a.x == rhs, false: a.x <= rhs
    /// Crash-basis hint: a column with +-1 coefficient that appears in no
    /// other row (slack-like). Used as the row's starting basic variable
    /// when its implied value is feasible, avoiding a phase-1 artificial.
    int basic_hint = -1;
};

struct LpProblem {
    int num_vars = 0;
    std::vector<double> cost;
    std::vector<double> lower;
    std::vector<double> upper;  ///< kInf allowed
    std::vector<LpRow> rows;
    /// Nonbasic start value: default at the lower bound; entries listed here
    /// start at their upper bound instead (both are valid crash choices).
    std::vector<int> start_at_upper;
};

enum class LpStatus { Optimal, Infeasible, IterLimit };

struct LpSolution {
    LpStatus status = LpStatus::IterLimit;
    double objective = 0.0;
    std::vector<double> x;  ///< structural variables only
};

namespace detail {

class SimplexTableau {
  public:
    SimplexTableau(const LpProblem& p, const std::vector<double>& lo,
                   const std::vector<double>& hi) {
        const int m = static_cast<int>(p.rows.size());
        n_struct_ = p.num_vars;
        int n_slack = 0;
        for (const auto& r : p.rows)
            if (!r.equality) ++n_slack;
        // layout: [structural | slack | artificial(one reserved per row)]
        art_start_ = n_struct_ + n_slack;
        total_ = art_start_ + m;
        rows_ = m;

        mat_.assign(static_cast<std::size_t>(m) * total_, 0.0);
        lower_ = lo;
        upper_ = hi;
        lower_.resize(total_, 0.0);
        upper_.resize(total_, kInf);
        xval_.assign(total_, 0.0);
        state_.assign(total_, AtLower);
        basis_.assign(m, -1);
        cost_.assign(total_, 0.0);
        for (int j = 0; j < n_struct_; ++j) cost_[j] = p.cost[j];

        for (int j = 0; j < n_struct_; ++j) xval_[j] = lower_[j];

        int slack = n_struct_;
        for (int i = 0; i < m; ++i) {
            double* row = row_ptr(i);
            double residual = p.rows[i].rhs;
            for (auto [j, a] : p.rows[i].terms) {
                row[j] += a;
                residual -= a * xval_[j];
            }
            if (!p.rows[i].equality) {
                row[slack] = 1.0;
                if (residual >= 0.0) {
                    basis_[i] = slack;
                    state_[slack] = Basic;
                    xval_[slack] = residual;
                }
                ++slack;
            }
            if (basis_[i] < 0) {
                // negate the row if needed so the artificial column is +1
                // and the starting basis matrix stays the identity
                if (residual < 0.0) {
                    for (int j = 0; j < total_; ++j) row[j] = -row[j];
                    residual = -residual;
                }
                const int art = art_start_ + i;
                row[art] = 1.0;
                basis_[i] = art;
                state_[art] = Basic;
                xval_[art] = residual;
                has_art_ = true;
            }
        }
    }

    LpStatus run() {
        if (has_art_) {
            std::vector<double> phase1(total_, 0.0);
            for (int j = art_start_; j < total_; ++j) phase1[j] = 1.0;
            if (!iterate(phase1, /*allow_artificials=*/true)) return LpStatus::IterLimit;
            double infeas = 0.0;
            for (int i = 0; i < rows_; ++i)
                if (basis_[i] >= art_start_) infeas += xval_[basis_[i]];
            if (infeas > 1e-7) return LpStatus::Infeasible;
            expel_artificials();
        }
        if (!iterate(cost_, /*allow_artificials=*/false)) return LpStatus::IterLimit;
        return LpStatus::Optimal;
    }

    std::vector<double> structural_values() const {
        return std::vector<double>(xval_.begin(), xval_.begin() + n_struct_);
    }

    double objective() const {
        double v = 0.0;
        for (int j = 0; j < n_struct_; ++j) v += cost_[j] * xval_[j];
        return v;
    }

  private:
    enum VarState : unsigned char { AtLower, AtUpper, Basic };

    double* row_ptr(int i) { return mat_.data() + static_cast<std::size_t>(i) * total_; }
    const double* row_ptr(int i) const {
        return mat_.data() + static_cast<std::size_t>(i) * total_;
    }

    // Reduced costs for the given objective: z = c - c_B^T B^{-1} A.
    void reduced_costs(const std::vector<double>& c, std::vector<double>& z) const {
        z = c;
        for (int i = 0; i < rows_; ++i) {
            const double cb = c[basis_[i]];
            if (cb == 0.0) continue;
            const double* row = row_ptr(i);
            for (int j = 0; j < total_; ++j) z[j] -= cb * row[j];
        }
    }

    bool iterate(const std::vector<double>& c, bool allow_artificials) {
        std::vector<double> z;
        reduced_costs(c, z);
        const double dtol = 1e-9;
        long iter_limit = 2000 + 40L * (rows_ + total_);
        int degenerate_streak = 0;
        bool bland = false;

        for (long iter = 0; iter < iter_limit; ++iter) {
            // pricing
            int enter = -1, dir = 0;
            double best = dtol;
            for (int j = 0; j < total_; ++j) {
                if (state_[j] == Basic) continue;
                if (!allow_artificials && j >= art_start_) continue;
                if (upper_[j] - lower_[j] < 1e-15) continue;  // fixed
                const double d = z[j];
                if (state_[j] == AtLower && d < -dtol) {
                    if (bland) { enter = j; dir = +1; break; }
                    if (-d > best) { best = -d; enter = j; dir = +1; }
                } else if (state_[j] == AtUpper && d > dtol) {
                    if (bland) { enter = j; dir = -1; break; }
                    if (d > best) { best = d; enter = j; dir = -1; }
                }
            }
            if (enter < 0) return true;  // optimal

            // ratio test
            const double gap = upper_[enter] - lower_[enter];
            double theta = kInf;
            int leave_row = -1;
            double leave_pivot = 0.0;
            int leave_to = AtLower;
            for (int i = 0; i < rows_; ++i) {
                const double y = row_ptr(i)[enter] * dir;
                if (std::abs(y) < 1e-9) continue;
                const int bi = basis_[i];
                double limit;
                int hits;
                if (y > 0) {  // basic value decreases
                    limit = (xval_[bi] - lower_[bi]) / y;
                    hits = AtLower;
                } else {  // basic value increases
                    if (upper_[bi] == kInf) continue;
                    limit = (upper_[bi] - xval_[bi]) / (-y);
                    hits = AtUpper;
                }
                if (limit < 0) limit = 0;
                if (limit < theta - 1e-12) {
                    theta = limit;
                    leave_row = i;
                    leave_pivot = y;
                    leave_to = hits;
                } else if (leave_row >= 0 && limit <= theta + 1e-12) {
                    const bool prefer = bland ? basis_[i] < basis_[leave_row]
                                              : std::abs(y) > std::abs(leave_pivot);
                    if (prefer) {
                        theta = std::min(theta, limit);
                        leave_row = i;
                        leave_pivot = y;
                        leave_to = hits;
                    }
                }
            }

            if (theta == kInf && gap == kInf) return false;  // unbounded

            if (theta > 1e-11) degenerate_streak = 0;
            else if (++degenerate_streak > 200) bland = true;

            if (leave_row < 0 || theta >= gap - 1e-12) {
                // bound flip: entering variable crosses to its other bound
                apply_value_change(enter, dir * gap);
                state_[enter] = state_[enter] == AtLower ? AtUpper : AtLower;
                xval_[enter] = state_[enter] == AtLower ? lower_[enter] : upper_[enter];
                continue;
            }

            // basis change
            const int leave = basis_[leave_row];
            apply_value_change(enter, dir * theta);
            xval_[enter] = (state_[enter] == AtLower ? lower_[enter] : upper_[enter]) + dir * theta;
            state_[enter] = Basic;
            state_[leave] = static_cast<VarState>(leave_to);
            xval_[leave] = leave_to == AtLower ? lower_[leave] : upper_[leave];
            basis_[leave_row] = enter;
            pivot(leave_row, enter, z);
        }
        return false;
    }

    // Move entering variable by delta, updating basic values only.
    void apply_value_change(int enter, double delta) {
        if (delta == 0.0) return;
        for (int i = 0; i < rows_; ++i) {
            const double y = row_ptr(i)[enter];
            if (y != 0.0) xval_[basis_[i]] -= y * delta;
        }
    }

    void pivot(int prow, int pcol, std::vector<double>& z) {
        double* prow_ptr = row_ptr(prow);
        const double inv = 1.0 / prow_ptr[pcol];
        for (int j = 0; j < total_; ++j) prow_ptr[j] *= inv;
        prow_ptr[pcol] = 1.0;
        for (int i = 0; i < rows_; ++i) {
            if (i == prow) continue;
            double* row = row_ptr(i);
            const double f = row[pcol];
            if (std::abs(f) < 1e-14) { row[pcol] = 0.0; continue; }
            for (int j = 0; j < total_; ++j) row[j] -= f * prow_ptr[j];
            row[pcol] = 0.0;
        }
        const double fz = z[pcol];
        if (std::abs(fz) > 1e-14) {
            for (int j = 0; j < total_; ++j) z[j] -= fz * prow_ptr[j];
        }
        z[pcol] = 0.0;
    }

    // After phase 1: pivot zero-valued artificials out of the basis where
    // possible; rows that admit no pivot are redundant and keep a pinned
    // artificial.
    void expel_artificials() {
        std::vector<double> dummy(total_, 0.0);
        for (int i = 0; i < rows_; ++i) {
            if (basis_[i] < art_start_) continue;
            double* row = row_ptr(i);
            int pcol = -1;
            double best = 1e-7;
            for (int j = 0; j < art_start_; ++j) {
                if (state_[j] == Basic) continue;
                if (std::abs(row[j]) > best) { best = std::abs(row[j]); pcol = j; }
            }
            if (pcol < 0) {
                upper_[basis_[i]] = 0.0;  // redundant row, artificial stays pinned
                continue;
            }
            const int art = basis_[i];
            // swap: drive the (near-zero) artificial to 0 by moving pcol
            const double new_value = xval_[pcol] + xval_[art] / row[pcol];
            state_[pcol] = Basic;
            basis_[i] = pcol;
            pivot(i, pcol, dummy);
            xval_[pcol] = new_value;
            state_[art] = AtLower;
            xval_[art] = 0.0;
            upper_[art] = 0.0;
        }
        // artificials can never re-enter
        for (int j = art_start_; j < total_; ++j)
            if (state_[j] != Basic) upper_[j] = 0.0;
    }

    int n_struct_ = 0, art_start_ = 0, total_ = 0, rows_ = 0;
    bool has_art_ = false;
    std::vector<double> mat_, lower_, upper_, xval_, cost_;
    std::vector<VarState> state_;
    std::vector<int> basis_;
};

}  // namespace detail

inline LpSolution solve_lp(const LpProblem& p, const std::vector<double>& lower,
                           const std::vector<double>& upper) {
    detail::SimplexTableau tab(p, lower, upper);
    LpSolution out;
    out.status = tab.run();
    if (out.status == LpStatus::Optimal) {
        out.x = tab.structural_values();
        out.objective = tab.objective();
    }
    return out;
}

inline LpSolution solve_lp(const LpProblem& p) { return solve_lp(p, p.lower, p.upper); }

}  // namespace bcmpc
