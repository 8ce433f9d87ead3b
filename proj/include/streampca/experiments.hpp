#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "streampca/covariance_model.hpp"
#include "streampca/init.hpp"
#include "streampca/io.hpp"
#include "streampca/metrics.hpp"
#include "streampca/oja.hpp"
#include "streampca/parallel.hpp"
#include "streampca/rng.hpp"
#include "streampca/streams.hpp"

namespace streampca {

// Everything needed to reproduce a batch bitwise: per-trial randomness is
// derived from (master_seed, trial_index, role), so trials can run in any
// order and on any number of workers.
struct RunConfig {
    CovarianceModel model;
    StreamSpec stream;

    InitMethod init_method = InitMethod::uniform;
    long t0 = 0;      // approx-power sample budget
    Vec warm_vector;  // init_method == warm

    ScheduleKind schedule_kind = ScheduleKind::gap_free;
    double schedule_multiplier = 1.0;
    double constant_eta = 0.0;  // schedule_kind == constant

    long T = 1;
    std::uint64_t master_seed = 0;
    long repetitions = 1;
    long validation_samples = 0;
};

struct TrialRecord {
    long trial_index = 0;
    std::uint64_t sub_seed = 0;  // the trial's stream seed
    double init_p = std::numeric_limits<double>::quiet_NaN();
    double suboptimality = 0.0;
    int v_sign = 0;  // sign of the success diagnostic at the schedule regime's target (c = 1)
    long samples_consumed = 0;
    long long wall_clock_ns = 0;  // diagnostic only; excluded from identity
};

/// Fixed field order; wall clock is diagnostic and can be left out so byte
/// comparison of two runs is meaningful.
inline std::string to_json_line(const TrialRecord& r, bool with_timing = true) {
    std::string s = "{\"trial_index\":" + std::to_string(r.trial_index) +
                    ",\"sub_seed\":" + std::to_string(r.sub_seed) +
                    ",\"init_p\":" + format_double(r.init_p) +
                    ",\"suboptimality\":" + format_double(r.suboptimality) +
                    ",\"v_sign\":" + std::to_string(r.v_sign) +
                    ",\"samples_consumed\":" + std::to_string(r.samples_consumed);
    if (with_timing) s += ",\"wall_clock_ns\":" + std::to_string(r.wall_clock_ns);
    return s + "}";
}

namespace seed_role {
inline constexpr std::uint64_t stream = 1;
inline constexpr std::uint64_t init = 2;
inline constexpr std::uint64_t validation = 3;
} // namespace seed_role

using AnyStream = std::variant<RademacherStream, EigenbasisStream, ExactStream, FileStream>;

inline AnyStream make_stream(const StreamSpec& spec, const CovarianceModel& model,
                             std::uint64_t seed) {
    switch (spec.kind) {
        case StreamKind::rademacher: return RademacherStream(model, seed);
        case StreamKind::eigenbasis: return EigenbasisStream(model, seed);
        case StreamKind::exact:      return ExactStream(model);
        case StreamKind::file:       return FileStream(spec.path, model.dim());
    }
    throw std::logic_error("make_stream: unknown stream kind");
}

// The alignment parameter p the step-size rules are computed from. The config
// carries no explicit p; it follows from how the run is initialized:
// a warm start is measured against the oracle, uniform initialization scales
// with the dimension, and the approximate power iteration with log(d) times
// the numerical rank. The rules assume p >= 8, so that is the floor.
inline double schedule_alignment_p(const RunConfig& config) {
    double p = 0.0;
    switch (config.init_method) {
        case InitMethod::warm:
            if (config.warm_vector.empty())
                throw std::invalid_argument("schedule_alignment_p: warm vector missing");
            p = p_of(init_warm(config.warm_vector).w0, config.model);
            break;
        case InitMethod::uniform:
            p = static_cast<double>(config.model.dim());
            break;
        case InitMethod::approx_power:
            p = std::log(static_cast<double>(config.model.dim())) * numerical_rank(config.model);
            break;
    }
    return std::max(8.0, p);
}

inline StepSchedule make_schedule(const RunConfig& config, long T) {
    switch (config.schedule_kind) {
        case ScheduleKind::gap_free:
            return eta_gap_free(bound_b(config.stream, config.model), schedule_alignment_p(config),
                                T, config.schedule_multiplier);
        case ScheduleKind::gap:
            return eta_gap(eigengap(config.model), T, config.schedule_multiplier);
        case ScheduleKind::constant:
            return constant_schedule(config.constant_eta);
    }
    throw std::logic_error("make_schedule: unknown schedule kind");
}

/// Target the trial's v_sign is evaluated at (multiplier 1). A constant
/// schedule is reported against the gap-free form.
inline TargetRate trial_target(const RunConfig& config, long T) {
    const double b = bound_b(config.stream, config.model);
    const double p = schedule_alignment_p(config);
    if (config.schedule_kind == ScheduleKind::gap)
        return epsilon_target_gap(b, p, T, eigengap(config.model));
    return epsilon_target_gap_free(b, p, T);
}

struct TrialOutput {
    TrialRecord record;
    Vec direction;
    OjaState state;
};

inline TrialOutput run_trial_full(const RunConfig& config, long trial_index) {
    const auto t_begin = std::chrono::steady_clock::now();
    const std::uint64_t stream_seed = derive_seed(config.master_seed, static_cast<std::uint64_t>(trial_index),
                                                  seed_role::stream);
    AnyStream stream = make_stream(config.stream, config.model, stream_seed);
    Philox init_rng(derive_seed(config.master_seed, static_cast<std::uint64_t>(trial_index), seed_role::init));

    TrialOutput out;
    std::visit(
        [&](auto& s) {
            InitReport init;
            switch (config.init_method) {
                case InitMethod::warm:
                    init = init_warm(config.warm_vector, &config.model);
                    break;
                case InitMethod::uniform:
                    init = init_uniform_sphere(config.model.dim(), init_rng, &config.model);
                    break;
                case InitMethod::approx_power:
                    init = init_approx_power(s, config.t0, init_rng, &config.model);
                    break;
            }
            const StepSchedule schedule = make_schedule(config, config.T);
            RunResult rr = run(s, init.w0, schedule, config.T);

            out.record.trial_index = trial_index;
            out.record.sub_seed = stream_seed;
            out.record.init_p = init.p;
            out.record.suboptimality = suboptimality(rr.direction, config.model);
            out.record.samples_consumed = init.samples_consumed + config.T;
            const TargetRate target = trial_target(config, config.T);
            // V_T = ||w_T||^2 (suboptimality - eps) up to a positive factor,
            // so the sign needs no overflow bookkeeping.
            const double delta = out.record.suboptimality - target.epsilon;
            out.record.v_sign = delta > 0.0 ? 1 : (delta < 0.0 ? -1 : 0);
            out.direction = std::move(rr.direction);
            out.state = std::move(rr.state);
        },
        stream);

    out.record.wall_clock_ns =
        std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t_begin)
            .count();
    return out;
}

inline TrialRecord run_trial(const RunConfig& config, long trial_index) {
    return run_trial_full(config, trial_index).record;
}

inline std::vector<TrialOutput> run_trials(const RunConfig& config, long count, unsigned workers = 0) {
    std::vector<TrialOutput> outputs(static_cast<std::size_t>(count));
    parallel_for(count, [&](long i) { outputs[static_cast<std::size_t>(i)] = run_trial_full(config, i); },
                 workers);
    return outputs;
}

struct SelectionResult {
    Vec chosen;
    long chosen_index = 0;
    double chosen_suboptimality = 0.0;
    std::vector<TrialRecord> records;
    Vec validation_quotients;  // empty when validation was skipped (R = 1)
};

// Runs R independent trials and picks the output with the largest empirical
// quadratic form over V fresh validation samples; ties go to the lowest trial
// index. The validation draw is shared by all candidates and accounted
// separately from the trials' sample budgets.
inline SelectionResult repeat_and_select(const RunConfig& config, unsigned workers = 0) {
    const long R = config.repetitions;
    const long V = config.validation_samples;
    if (R < 1) throw std::invalid_argument("repeat_and_select: repetitions must be >= 1");
    if (R > 1 && V < 1)
        throw std::invalid_argument("repeat_and_select: selection undefined with V = 0 and R > 1");

    std::vector<TrialOutput> outputs = run_trials(config, R, workers);
    SelectionResult result;
    result.records.reserve(static_cast<std::size_t>(R));
    for (auto& o : outputs) result.records.push_back(o.record);

    if (R == 1) {
        result.chosen = outputs[0].direction;
        result.chosen_index = 0;
        result.chosen_suboptimality = outputs[0].record.suboptimality;
        return result;
    }

    AnyStream validation = make_stream(
        config.stream, config.model,
        derive_seed(config.master_seed, 0, seed_role::validation));
    // File data has no independent generator to reseed, so validation rows are
    // the ones right after every trial's shared prefix.
    if (config.stream.kind == StreamKind::file)
        std::get<FileStream>(validation).skip(config.t0 + config.T);

    std::vector<SampleUpdate> samples(static_cast<std::size_t>(V));
    std::visit(
        [&](auto& s) {
            for (auto& u : samples) s.next_into(u);
        },
        validation);

    result.validation_quotients.assign(static_cast<std::size_t>(R), 0.0);
    parallel_for(R,
                 [&](long r) {
                     double acc = 0.0;
                     for (const auto& u : samples) acc += u.quad_form(outputs[static_cast<std::size_t>(r)].direction);
                     result.validation_quotients[static_cast<std::size_t>(r)] =
                         acc / static_cast<double>(V);
                 },
                 workers);

    long best = 0;
    for (long r = 1; r < R; ++r)
        if (result.validation_quotients[static_cast<std::size_t>(r)] >
            result.validation_quotients[static_cast<std::size_t>(best)])
            best = r;
    for (long r = 0; r < R; ++r)
        if (result.validation_quotients[static_cast<std::size_t>(r)] >
            result.validation_quotients[static_cast<std::size_t>(best)])
            throw std::logic_error("repeat_and_select: selection is not the validation argmax");

    result.chosen = outputs[static_cast<std::size_t>(best)].direction;
    result.chosen_index = best;
    result.chosen_suboptimality = outputs[static_cast<std::size_t>(best)].record.suboptimality;
    return result;
}

/// Linear-interpolation quantile of a copy of `values`.
inline double quantile(Vec values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= values.size()) return values.back();
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

struct SweepRow {
    long T = 0;
    bool schedule_valid = false;
    std::string flag;  // non-empty when the grid point was skipped
    double eta = std::numeric_limits<double>::quiet_NaN();
    TargetRate target;
    double min_suboptimality = std::numeric_limits<double>::quiet_NaN();
    double q25 = std::numeric_limits<double>::quiet_NaN();
    double median = std::numeric_limits<double>::quiet_NaN();
    double q75 = std::numeric_limits<double>::quiet_NaN();
    double max_suboptimality = std::numeric_limits<double>::quiet_NaN();
    double selected_suboptimality = std::numeric_limits<double>::quiet_NaN();
    long selected_index = -1;
    std::vector<TrialRecord> records;
};

// T-sweep: the schedule is recomputed at every grid point; points whose
// schedule violates the eta <= 1 assumption are flagged rather than fatal.
inline std::vector<SweepRow> sweep_T(const RunConfig& config, const std::vector<long>& grid,
                                     unsigned workers = 0) {
    if (grid.size() < 3) throw std::invalid_argument("sweep_T: need at least 3 grid points");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (grid[i] <= grid[i - 1]) throw std::invalid_argument("sweep_T: grid must be sorted ascending");

    std::vector<SweepRow> rows;
    rows.reserve(grid.size());
    for (long T : grid) {
        SweepRow row;
        row.T = T;
        RunConfig point = config;
        point.T = T;
        try {
            row.eta = make_schedule(point, T).eta;
            row.schedule_valid = true;
        } catch (const std::invalid_argument& e) {
            row.flag = e.what();
            rows.push_back(std::move(row));
            continue;
        }
        row.target = trial_target(point, T);

        if (point.repetitions > 1 && point.validation_samples >= 1) {
            SelectionResult sel = repeat_and_select(point, workers);
            row.records = std::move(sel.records);
            row.selected_suboptimality = sel.chosen_suboptimality;
            row.selected_index = sel.chosen_index;
        } else {
            auto outputs = run_trials(point, point.repetitions, workers);
            row.records.reserve(outputs.size());
            for (auto& o : outputs) row.records.push_back(o.record);
            if (point.repetitions == 1) {
                row.selected_suboptimality = row.records[0].suboptimality;
                row.selected_index = 0;
            }
        }

        Vec errs;
        errs.reserve(row.records.size());
        for (const auto& r : row.records) errs.push_back(r.suboptimality);
        row.min_suboptimality = quantile(errs, 0.0);
        row.q25 = quantile(errs, 0.25);
        row.median = quantile(errs, 0.5);
        row.q75 = quantile(errs, 0.75);
        row.max_suboptimality = quantile(errs, 1.0);
        rows.push_back(std::move(row));
    }
    return rows;
}

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_rms = 0.0;
    std::vector<std::size_t> excluded;  // zero/non-finite errors, flagged out
};

/// Ordinary least squares of ln(error) on ln(T).
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& table) {
    RateFit fit;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < table.size(); ++i) {
        const auto& [t, err] = table[i];
        if (!(err > 0.0) || !std::isfinite(err) || !(t > 0.0)) {
            fit.excluded.push_back(i);
            continue;
        }
        pts.emplace_back(std::log(t), std::log(err));
    }
    if (pts.size() < 2) throw std::invalid_argument("fit_rate: need at least 2 positive errors");

    double mx = 0.0, my = 0.0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: degenerate grid");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (const auto& [x, y] : pts) {
        const double r = y - (fit.intercept + fit.slope * x);
        ss += r * r;
    }
    fit.residual_rms = std::sqrt(ss / static_cast<double>(pts.size()));
    return fit;
}

struct SuccessEstimate {
    double fraction = 0.0;
    double lower95 = 0.0;
    double upper95 = 0.0;
    long successes = 0;
    long total = 0;
};

/// Fraction of trials with suboptimality <= epsilon plus a two-sided Wilson
/// 95% interval.
inline SuccessEstimate success_probability(const std::vector<TrialRecord>& records, double epsilon) {
    if (records.empty()) throw std::invalid_argument("success_probability: no records");
    SuccessEstimate est;
    est.total = static_cast<long>(records.size());
    for (const auto& r : records)
        if (r.suboptimality <= epsilon) ++est.successes;
    const double n = static_cast<double>(est.total);
    const double phat = static_cast<double>(est.successes) / n;
    est.fraction = phat;
    const double z = 1.959963984540054;  // Phi^-1(0.975)
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = phat + z2 / (2.0 * n);
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    est.lower95 = std::max(0.0, (center - half) / denom);
    est.upper95 = std::min(1.0, (center + half) / denom);
    return est;
}

/// p threshold the init benchmark scores against: 30 ln(d) n_A. The constant
/// was fixed once from the calibration sweep in docs/init_calibration.md.
inline double init_quality_threshold(const CovarianceModel& model) {
    return 30.0 * std::log(static_cast<double>(model.dim())) * numerical_rank(model);
}

/// Sample budget at which the approximate power iteration reliably clears the
/// threshold above: ceil(20 d b^2 ln d), same calibration sweep.
inline long recommended_power_init_budget(const CovarianceModel& model, double b) {
    const double d = static_cast<double>(model.dim());
    return static_cast<long>(std::ceil(20.0 * d * b * b * std::log(d)));
}

struct InitBenchRow {
    long t0 = 0;
    double p_q10 = 0.0;
    double p_q25 = 0.0;
    double p_median = 0.0;
    double p_q75 = 0.0;
    double p_q90 = 0.0;
    double fraction_below_threshold = 0.0;
    double threshold = 0.0;
};

// Measures init quality p across seeded trials for each T0 in the grid.
// A T0 = 0 row (uniform baseline) is always included.
inline std::vector<InitBenchRow> init_bench(const CovarianceModel& model, const StreamSpec& stream,
                                            const std::vector<long>& t0_grid, long trials,
                                            std::uint64_t master_seed, unsigned workers = 0) {
    if (trials < 20) throw std::invalid_argument("init_bench: need at least 20 trials");
    std::vector<long> grid = t0_grid;
    if (std::find(grid.begin(), grid.end(), 0L) == grid.end()) grid.insert(grid.begin(), 0L);
    const double threshold = init_quality_threshold(model);

    std::vector<InitBenchRow> rows;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const long t0 = grid[g];
        if (t0 < 0) throw std::invalid_argument("init_bench: T0 must be >= 0");
        Vec ps(static_cast<std::size_t>(trials));
        parallel_for(
            trials,
            [&](long trial) {
                // Row index rides along in the role so grid points do not share draws.
                const std::uint64_t index = static_cast<std::uint64_t>(trial);
                const std::uint64_t row_tag = static_cast<std::uint64_t>(g) << 8;
                Philox rng(derive_seed(master_seed, index, seed_role::init | row_tag));
                InitReport report;
                if (t0 == 0) {
                    report = init_uniform_sphere(model.dim(), rng, &model);
                } else {
                    AnyStream s = make_stream(stream, model,
                                              derive_seed(master_seed, index, seed_role::stream | row_tag));
                    std::visit([&](auto& st) { report = init_approx_power(st, t0, rng, &model); }, s);
                }
                ps[static_cast<std::size_t>(trial)] = report.p;
            },
            workers);

        InitBenchRow row;
        row.t0 = t0;
        row.threshold = threshold;
        row.p_q10 = quantile(ps, 0.10);
        row.p_q25 = quantile(ps, 0.25);
        row.p_median = quantile(ps, 0.5);
        row.p_q75 = quantile(ps, 0.75);
        row.p_q90 = quantile(ps, 0.90);
        long below = 0;
        for (double p : ps)
            if (p <= threshold) ++below;
        row.fraction_below_threshold = static_cast<double>(below) / static_cast<double>(trials);
        rows.push_back(row);
    }
    return rows;
}

} // namespace streampca
