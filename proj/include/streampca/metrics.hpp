#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "streampca/covariance_model.hpp"
#include "streampca/linalg.hpp"
#include "streampca/oja.hpp"

namespace streampca {

/// Normalized objective gap 1 - w'Aw / ||A||, in [0, 1]; computed in the
/// eigenbasis so it is exact for spectral models.
inline double suboptimality(std::span<const double> w, const CovarianceModel& a) {
    if (static_cast<int>(w.size()) != a.dim())
        throw std::invalid_argument("suboptimality: vector dimension does not match the model");
    const Vec c = a.to_eigenbasis(w);
    double quad = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        quad += a.spectrum()[i] * c[i] * c[i];
        total += c[i] * c[i];
    }
    const double value = 1.0 - quad / (a.spectral_norm() * total);
    return std::clamp(value, 0.0, 1.0);
}

// Success indicator of a run at accuracy eps: the quadratic form
// w_T' ((1-eps) I - A) w_T of the *unnormalized* iterate. Its sign is what
// matters (non-positive exactly when the direction is eps-suboptimal), so
// when exp(2 log_magnitude) overflows, the sign and log scale are still
// reported and `value` saturates to +-inf.
struct VDiagnostic {
    int sign = 0;        // -1, 0, +1
    double value = 0.0;  // exp(2 log_magnitude) * q, +-inf on overflow
    double log_abs = 0.0;
    bool overflowed = false;
};

inline VDiagnostic v_diagnostic(const OjaState& state, const CovarianceModel& a, double epsilon) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("v_diagnostic: epsilon must be in (0, 1)");
    const Vec c = a.to_eigenbasis(state.direction);
    double q = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        q += (1.0 - epsilon - a.spectrum()[i] / a.spectral_norm()) * c[i] * c[i];

    VDiagnostic out;
    out.sign = q > 0.0 ? 1 : (q < 0.0 ? -1 : 0);
    if (q == 0.0) {
        out.log_abs = -std::numeric_limits<double>::infinity();
        out.value = 0.0;
        return out;
    }
    out.log_abs = 2.0 * state.log_magnitude + std::log(std::abs(q));
    if (out.log_abs > 700.0) {
        out.overflowed = true;
        out.value = out.sign * std::numeric_limits<double>::infinity();
    } else {
        out.value = out.sign * std::exp(out.log_abs);
    }
    return out;
}

// Accuracy level the step-size rules aim for, with the unspecified numerical
// constant exposed as a multiplier c (default 1). `valid` is false when the
// level exceeds 1, i.e. the parameter regime gives no non-trivial target.
struct TargetRate {
    enum class Regime { gap_free, gap };
    Regime regime = Regime::gap_free;
    double epsilon = 0.0;
    double multiplier = 1.0;
    double b = 0.0;
    double p = 0.0;
    double lambda = 0.0;
    long horizon = 0;
    bool valid = false;
    bool side_condition_ok = true;  // gap regime: gap target <= gap-free target
};

/// c * ln(T) b sqrt(p) / sqrt(T)
inline TargetRate epsilon_target_gap_free(double b, double p, long T, double c = 1.0) {
    if (!(b >= 1.0) || !(p >= 1.0) || T < 1 || !(c > 0.0))
        throw std::invalid_argument("epsilon_target_gap_free: bad parameters");
    TargetRate out;
    out.regime = TargetRate::Regime::gap_free;
    out.multiplier = c;
    out.b = b;
    out.p = p;
    out.horizon = T;
    const double t = static_cast<double>(T);
    out.epsilon = c * std::log(t) * b * std::sqrt(p) / std::sqrt(t);
    out.valid = out.epsilon > 0.0 && out.epsilon <= 1.0;
    return out;
}

/// c * ln(T)^2 b^2 p / (lambda T); also records whether this target actually
/// undercuts the gap-free one (the regime where the gap rule is worth using).
inline TargetRate epsilon_target_gap(double b, double p, long T, double lambda, double c = 1.0) {
    if (!(b >= 1.0) || !(p >= 1.0) || T < 2 || !(lambda > 0.0) || lambda > 1.0 || !(c > 0.0))
        throw std::invalid_argument("epsilon_target_gap: bad parameters");
    TargetRate out;
    out.regime = TargetRate::Regime::gap;
    out.multiplier = c;
    out.b = b;
    out.p = p;
    out.lambda = lambda;
    out.horizon = T;
    const double t = static_cast<double>(T);
    const double logt = std::log(t);
    out.epsilon = c * logt * logt * b * b * p / (lambda * t);
    const double gap_free_level = logt * b * std::sqrt(p) / std::sqrt(t);
    out.side_condition_ok = logt * logt * b * b * p / (lambda * t) <= gap_free_level;
    out.valid = out.epsilon > 0.0 && out.epsilon <= 1.0;
    return out;
}

inline TargetRate epsilon_target(TargetRate::Regime regime, double b, double p, long T,
                                 double lambda, double c = 1.0) {
    return regime == TargetRate::Regime::gap_free ? epsilon_target_gap_free(b, p, T, c)
                                                  : epsilon_target_gap(b, p, T, lambda, c);
}

// Deterministic envelope inequality behind the expected-decrease analysis:
//
//   max_{s in [0,1]} (1 + eta s)^k (1 - eps - s)
//     <= 1 + 2 (1 + eta (1 - eps))^k / (eta (k + 1)).
//
// f has at most one interior critical point, s_c = (k(1-eps) - 1/eta)/(k+1),
// so the exact max is attained at s_c or an endpoint; the uniform grid is
// swept as well so the reported max is a genuine search result. Everything is
// evaluated in log space -- for k = 10^4 both sides overflow double.
struct GrowthEnvelopeCheck {
    double lhs_max = 0.0;   // may be +inf when only the log is representable
    double rhs_bound = 0.0; // likewise
    double lhs_log = 0.0;   // ln of the max (only positive values can win)
    double rhs_log = 0.0;
    double arg_max = 0.0;
    bool holds = false;
};

/// The standard sweep values for eta and epsilon: 0.01, then 0.05 .. 0.95 in
/// steps of 0.05, then 0.99.
inline std::vector<double> envelope_unit_grid() {
    std::vector<double> g{0.01};
    for (int i = 1; i <= 19; ++i) g.push_back(0.05 * i);
    g.push_back(0.99);
    return g;
}

inline std::vector<long> envelope_k_grid() { return {0, 1, 10, 100, 1000, 10000}; }

inline GrowthEnvelopeCheck check_growth_envelope(double eta, double epsilon, long k, int grid_n) {
    if (!(eta > 0.0) || !(eta < 1.0) || !(epsilon > 0.0) || !(epsilon < 1.0))
        throw std::invalid_argument("check_growth_envelope: eta, epsilon must be in (0, 1)");
    if (k < 0) throw std::invalid_argument("check_growth_envelope: k must be >= 0");
    if (grid_n < 1000) throw std::invalid_argument("check_growth_envelope: grid_n must be >= 1000");

    const double kd = static_cast<double>(k);
    // ln f(s) for the positive part; f(s) <= 0 whenever s >= 1 - eps.
    const auto log_f = [&](double s) {
        const double lin = 1.0 - epsilon - s;
        if (lin <= 0.0) return -std::numeric_limits<double>::infinity();
        return kd * std::log1p(eta * s) + std::log(lin);
    };

    GrowthEnvelopeCheck out;
    out.lhs_log = -std::numeric_limits<double>::infinity();
    const auto consider = [&](double s) {
        const double lf = log_f(s);
        if (lf > out.lhs_log) {
            out.lhs_log = lf;
            out.arg_max = s;
        }
    };
    for (int i = 0; i < grid_n; ++i) consider(static_cast<double>(i) / (grid_n - 1));
    const double critical = (kd * (1.0 - epsilon) - 1.0 / eta) / (kd + 1.0);
    if (critical >= 0.0 && critical <= 1.0) consider(critical);

    // rhs = 1 + exp(x_log), x_log = ln 2 + k ln(1 + eta(1-eps)) - ln(eta (k+1)).
    const double x_log =
        std::log(2.0) + kd * std::log1p(eta * (1.0 - epsilon)) - std::log(eta * (kd + 1.0));
    out.rhs_log = x_log > 700.0 ? x_log : std::log1p(std::exp(x_log));

    out.lhs_max = out.lhs_log > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(out.lhs_log);
    out.rhs_bound = out.rhs_log > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(out.rhs_log);
    out.holds = out.lhs_log <= out.rhs_log;
    return out;
}

} // namespace streampca
