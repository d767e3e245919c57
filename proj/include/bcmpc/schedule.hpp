#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcmpc/common.hpp"

namespace bcmpc {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Per-step comfort band: setpoint +/- half-band. An infinite half-band
/// marks an "away" step whose comfort is unconstrained.
struct ComfortSchedule {
    std::vector<double> t_set;
    std::vector<double> t_delta;

    std::size_t size() const { return t_set.size(); }
    bool away(std::size_t j) const { return std::isinf(t_delta[j]); }
    double lower(std::size_t j) const { return t_set[j] - t_delta[j]; }
    double upper(std::size_t j) const { return t_set[j] + t_delta[j]; }

    void validate() const {
        if (t_set.size() != t_delta.size())
            throw std::invalid_argument("ComfortSchedule: t_set/t_delta length mismatch");
        for (double d : t_delta)
            if (!(d >= 0)) throw std::invalid_argument("ComfortSchedule: t_delta must be >= 0");
    }
};

/// Per-step electricity price plus the schedule-wide extremes the price
/// grouping normalizes against.
struct Tariff {
    std::vector<double> price;
    double pi_min = 0.0;
    double pi_max = 0.0;

    static Tariff from_prices(std::vector<double> p, double sched_min, double sched_max) {
        Tariff t;
        t.price = std::move(p);
        t.pi_min = sched_min;
        t.pi_max = sched_max;
        t.validate();
        return t;
    }

    void validate() const {
        if (!(pi_max >= pi_min)) throw std::invalid_argument("Tariff: pi_max < pi_min");
        for (double p : price) {
            if (!(p >= 0)) throw std::invalid_argument("Tariff: prices must be >= 0");
            if (p < pi_min - 1e-12 || p > pi_max + 1e-12)
                throw std::invalid_argument("Tariff: price outside [pi_min, pi_max]");
        }
    }
};

struct PenaltyWeights {
    double under = 1.0;  ///< $ per degC*step below the band
    double over = 1.0;   ///< $ per degC*step above the band

    void validate() const {
        if (!(under > 0) || !(over > 0))
            throw std::invalid_argument("PenaltyWeights: weights must be > 0");
    }
};

/// Minimum on/off dwell times plus the recently implemented controls that
/// carry lockout state across receding-horizon solves.
///
/// Semantics: every maximal run of equal controls in history+future must be
/// at least min_on_steps (for on) or min_off_steps (for off) long, except
/// runs truncated by the window edges.
struct CycleConstraint {
    int min_on_steps = 3;
    int min_off_steps = 3;
    std::vector<int> history;  ///< chronological, history.back() == u_{k-1}

    void validate() const {
        if (min_on_steps < 1 || min_off_steps < 1)
            throw std::invalid_argument("CycleConstraint: dwell times must be >= 1");
        const int need = std::max(min_on_steps, min_off_steps);
        if (static_cast<int>(history.size()) < need)
            throw std::invalid_argument("CycleConstraint: history shorter than max dwell time");
        for (int u : history)
            if (u != 0 && u != 1)
                throw std::invalid_argument("CycleConstraint: history entries must be binary");
        // Completed interior runs must already satisfy the dwell times;
        // the oldest run may be truncated by the window start and the
        // newest run may still be ongoing.
        std::size_t i = 0;
        bool first_run = true;
        while (i < history.size()) {
            std::size_t j = i;
            while (j < history.size() && history[j] == history[i]) ++j;
            const bool last_run = (j == history.size());
            if (!first_run && !last_run) {
                const int len = static_cast<int>(j - i);
                const int need_run = history[i] == 1 ? min_on_steps : min_off_steps;
                if (len < need_run)
                    throw std::invalid_argument(
                        "CycleConstraint: history contains a completed run of length " +
                        std::to_string(len) + " shorter than the dwell minimum");
            }
            first_run = false;
            i = j;
        }
    }

    int last_control() const { return history.back(); }

    /// Length of the most recent run, capped at the history window.
    int current_run_length() const {
        int n = 0;
        for (auto it = history.rbegin(); it != history.rend() && *it == history.back(); ++it) ++n;
        return n;
    }

    /// -1 if the next control is free, otherwise the forced value.
    int forced_control() const {
        const int run = current_run_length();
        if (last_control() == 1 && run < min_on_steps) return 1;
        if (last_control() == 0 && run < min_off_steps) return 0;
        return -1;
    }

    /// History advanced by one implemented control, window length preserved.
    CycleConstraint advanced(int u) const {
        CycleConstraint next = *this;
        next.history.erase(next.history.begin());
        next.history.push_back(u);
        return next;
    }
};

/// True when history+u contains an on-run shorter than min_on or an off-run
/// shorter than min_off, not counting the run truncated at the sequence end.
inline bool violates_min_cycle(const CycleConstraint& cycle, const std::vector<int>& u) {
    std::vector<int> seq = cycle.history;
    seq.insert(seq.end(), u.begin(), u.end());
    std::size_t i = 0;
    bool first_run = true;
    while (i < seq.size()) {
        std::size_t j = i;
        while (j < seq.size() && seq[j] == seq[i]) ++j;
        const bool last_run = (j == seq.size());
        if (!first_run && !last_run) {
            const int len = static_cast<int>(j - i);
            const int need = seq[i] == 1 ? cycle.min_on_steps : cycle.min_off_steps;
            if (len < need) return true;
        }
        first_run = false;
        i = j;
    }
    return false;
}

}  // namespace bcmpc
