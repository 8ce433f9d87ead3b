#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "streampca/linalg.hpp"
#include "streampca/streams.hpp"

namespace streampca {

// Iterate of the stochastic power update w <- (I + eta * sample) w.
//
// The unnormalized iterate grows like (1+eta)^t and overflows double long
// before the iteration counts used here, so the magnitude is carried in log
// space: `direction` is renormalized every step while `log_magnitude`
// accumulates ln of the divided-out norms. Scaling commutes with the linear
// recursion, so (direction, log_magnitude) reproduces the unnormalized
// product form exactly.
struct OjaState {
    Vec direction;               // unit to 1e-12 at all times
    double log_magnitude = 0.0;  // ln ||w_t|| of the unnormalized recursion
    long iteration = 0;

    static OjaState start(Vec w0) {
        const double n = norm(w0);
        if (!(std::abs(n - 1.0) <= 1e-9))
            throw std::invalid_argument("OjaState: w0 must be a unit vector");
        scale(1.0 / n, w0);
        return {std::move(w0), 0.0, 0};
    }
};

enum class ScheduleKind { gap_free, gap, constant };

struct StepSchedule {
    ScheduleKind kind = ScheduleKind::constant;
    double eta = 0.0;  // in (0, 1]
    // provenance
    double b = 0.0;
    double p = 0.0;
    double lambda = 0.0;
    long horizon = 0;
    double multiplier = 1.0;
};

/// A step-size assumption failed (eta outside (0, 1]); distinct from plain
/// precondition errors so callers can exit with the dedicated code.
struct AssumptionViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace detail {
inline void require_eta_in_unit(double eta, const std::string& rule) {
    if (!(eta > 0.0) || !(eta <= 1.0))
        throw AssumptionViolation(rule + ": step size " + std::to_string(eta) +
                                  " violates the assumption eta in (0, 1]");
}
} // namespace detail

/// eta = multiplier / (b sqrt(p T)); rejected if outside (0, 1].
inline StepSchedule eta_gap_free(double b, double p, long T, double multiplier = 1.0) {
    if (!(b >= 1.0)) throw std::invalid_argument("eta_gap_free: b must be >= 1");
    if (!(p >= 8.0)) throw std::invalid_argument("eta_gap_free: p must be >= 8");
    if (T < 1) throw std::invalid_argument("eta_gap_free: T must be >= 1");
    if (!(multiplier > 0.0)) throw std::invalid_argument("eta_gap_free: multiplier must be > 0");
    const double eta = multiplier / (b * std::sqrt(p * static_cast<double>(T)));
    detail::require_eta_in_unit(eta, "eta_gap_free");
    return {ScheduleKind::gap_free, eta, b, p, 0.0, T, multiplier};
}

/// eta = multiplier * ln(T) / (lambda T); rejected if outside (0, 1].
inline StepSchedule eta_gap(double lambda, long T, double multiplier = 1.0) {
    if (!(lambda > 0.0) || lambda > 1.0) throw std::invalid_argument("eta_gap: lambda must be in (0, 1]");
    if (T < 2) throw std::invalid_argument("eta_gap: T must be > 1");
    if (!(multiplier > 0.0)) throw std::invalid_argument("eta_gap: multiplier must be > 0");
    const double eta = multiplier * std::log(static_cast<double>(T)) / (lambda * static_cast<double>(T));
    detail::require_eta_in_unit(eta, "eta_gap");
    return {ScheduleKind::gap, eta, 0.0, 0.0, lambda, T, multiplier};
}

inline StepSchedule constant_schedule(double eta) {
    detail::require_eta_in_unit(eta, "constant_schedule");
    return {ScheduleKind::constant, eta, 0.0, 0.0, 0.0, 0, 1.0};
}

namespace detail {

// u = (I + eta * update) w, renormalized; returns ln of the divided-out norm.
// For a PSD update <w, u> = 1 + eta w'Aw >= 1, so ||u|| >= 1 and the
// projection is always well defined; a norm below 1 means the update was not
// PSD and is reported as such.
inline double apply_update(Vec& direction, Vec& scratch, const SampleUpdate& update, double eta) {
    if (update.kind == SampleUpdate::Kind::rank_one) {
        const double a = dot(update.factor, direction);
        axpy(eta * a, update.factor, direction);
    } else {
        update.dense->apply_into(direction, scratch);
        axpy(eta, scratch, direction);
    }
    const double n = norm(direction);
    if (!(n >= 1.0 - 1e-12))
        throw std::logic_error("oja step: ||(I + eta A~) w|| < 1, update is not PSD");
    scale(1.0 / n, direction);
    return std::log(n);
}

} // namespace detail

/// One step of the deferred-normalization form: magnitude accrues in log space.
inline void step_deferred_inplace(OjaState& state, const SampleUpdate& update, double eta,
                                  Vec& scratch) {
    state.log_magnitude += detail::apply_update(state.direction, scratch, update, eta);
    ++state.iteration;
}

inline OjaState step_deferred(OjaState state, const SampleUpdate& update, double eta) {
    Vec scratch;
    step_deferred_inplace(state, update, eta, scratch);
    return state;
}

/// One step of the per-step-projected form: same direction, magnitude stays 1.
inline void step_projected_inplace(OjaState& state, const SampleUpdate& update, double eta,
                                   Vec& scratch) {
    detail::apply_update(state.direction, scratch, update, eta);
    ++state.iteration;
}

inline OjaState step_projected(OjaState state, const SampleUpdate& update, double eta) {
    Vec scratch;
    step_projected_inplace(state, update, eta, scratch);
    return state;
}

struct RunResult {
    Vec direction;
    OjaState state;
};

/// Folds the deferred step over exactly T stream samples.
template <SampleStream S>
RunResult run(S& stream, Vec w0, const StepSchedule& schedule, long T) {
    if (T < 1) throw std::invalid_argument("run: T must be >= 1");
    OjaState state = OjaState::start(std::move(w0));
    SampleUpdate update;
    Vec scratch;
    for (long t = 0; t < T; ++t) {
        try {
            stream.next_into(update);
        } catch (const StreamExhausted& e) {
            throw StreamExhausted(e.samples_consumed,
                                  "run: stream exhausted after " + std::to_string(t) + " of " +
                                      std::to_string(T) + " samples (" + e.what() + ")");
        }
        step_deferred_inplace(state, update, schedule.eta, scratch);
    }
    return {state.direction, std::move(state)};
}

} // namespace streampca
