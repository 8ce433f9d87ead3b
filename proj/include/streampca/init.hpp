#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "streampca/covariance_model.hpp"
#include "streampca/linalg.hpp"
#include "streampca/rng.hpp"
#include "streampca/streams.hpp"

namespace streampca {

// Quality of an initial point: p = 1 / <v, w0>^2 against the oracle's leading
// eigenvector v. When the top eigenvalue is degenerate (multiplicity m), v is
// taken to be any unit vector of the top eigenspace, so p is measured against
// the projection onto that whole eigenspace.
inline double p_of(std::span<const double> w0, const CovarianceModel& a) {
    if (static_cast<int>(w0.size()) != a.dim())
        throw std::invalid_argument("p_of: vector dimension does not match the model");
    const Vec c = a.to_eigenbasis(w0);
    const double s1 = a.eigenvalue(0);
    double mass = c[0] * c[0];
    for (int i = 1; i < a.dim() && s1 - a.eigenvalue(i) <= kDegenerateGapTol; ++i)
        mass += c[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
    if (mass == 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / mass;
}

enum class InitMethod { warm, uniform, approx_power };

struct InitReport {
    Vec w0;  // unit
    InitMethod method = InitMethod::uniform;
    long samples_consumed = 0;
    double p = std::numeric_limits<double>::quiet_NaN();  // vs oracle; inf allowed
    bool fell_back_to_uniform = false;
};

namespace detail {
inline void measure_p(InitReport& report, const CovarianceModel* oracle) {
    if (oracle) report.p = p_of(report.w0, *oracle);
}
} // namespace detail

// Uniform on the unit sphere, realized as a normalized standard Gaussian.
inline InitReport init_uniform_sphere(int d, Philox& rng, const CovarianceModel* oracle = nullptr) {
    if (d < 2) throw std::invalid_argument("init_uniform_sphere: d must be >= 2");
    InitReport report;
    report.method = InitMethod::uniform;
    report.w0.resize(static_cast<std::size_t>(d));
    rng.fill_gaussian(report.w0);
    normalize(report.w0);
    detail::measure_p(report, oracle);
    return report;
}

/// Normalizes and wraps a caller-provided starting point.
inline InitReport init_warm(const Vec& w0, const CovarianceModel* oracle = nullptr) {
    if (norm(w0) == 0.0) throw std::invalid_argument("init_warm: zero vector");
    InitReport report;
    report.method = InitMethod::warm;
    report.w0 = w0;
    normalize(report.w0);
    detail::measure_p(report, oracle);
    return report;
}

// One approximate power iteration from a given probe vector: accumulates
// w0 = (1/T0) * sum_t sample_t * probe over T0 fresh stream samples, then
// normalizes. If every sample annihilates the probe, falls back to a uniform
// draw (flagged in the report).
template <SampleStream S>
InitReport init_approx_power_from(const Vec& probe, S& stream, long t0, Philox& rng,
                                  const CovarianceModel* oracle = nullptr) {
    if (t0 < 1) throw std::invalid_argument("init_approx_power: T0 must be >= 1");
    InitReport report;
    report.method = InitMethod::approx_power;
    report.samples_consumed = t0;

    Vec acc(probe.size(), 0.0);
    Vec applied;
    SampleUpdate update;
    const double inv_t0 = 1.0 / static_cast<double>(t0);
    for (long t = 0; t < t0; ++t) {
        stream.next_into(update);
        update.apply_into(probe, applied);
        axpy(inv_t0, applied, acc);
    }

    if (norm(acc) == 0.0) {
        report.w0.resize(probe.size());
        rng.fill_gaussian(report.w0);
        normalize(report.w0);
        report.fell_back_to_uniform = true;
    } else {
        normalize(acc);
        report.w0 = std::move(acc);
    }
    detail::measure_p(report, oracle);
    return report;
}

template <SampleStream S>
InitReport init_approx_power(S& stream, long t0, Philox& rng,
                             const CovarianceModel* oracle = nullptr) {
    Vec probe(static_cast<std::size_t>(stream.dim()));
    rng.fill_gaussian(probe);
    return init_approx_power_from(probe, stream, t0, rng, oracle);
}

} // namespace streampca
