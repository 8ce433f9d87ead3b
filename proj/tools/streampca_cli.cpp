// Command-line front end for the streaming PCA toolkit: single trials,
// T-sweeps with rate fits, repeat-and-select batches, init benchmarks, the
// envelope-inequality sweep, and runs over CSV data files.
//
// Exit codes: 0 success, 2 configuration/input error, 3 when a run hits a
// step-size or target assumption violation (eta > 1 and friends).

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "streampca/streampca.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAssumption = 3;

std::string sanitize_csv_field(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n') c = ';';
    return s;
}

std::vector<long> parse_grid(const std::string& csv, const std::string& what) {
    std::vector<long> grid;
    for (auto field : streampca::split_fields(csv))
        grid.push_back(static_cast<long>(streampca::parse_integer(field, what)));
    return grid;
}

int cmd_run(const std::string& config_path, long trial, bool with_timing) {
    const streampca::RunConfig config = streampca::load_run_config(config_path);
    const streampca::TrialRecord record = streampca::run_trial(config, trial);
    std::cout << streampca::to_json_line(record, with_timing) << "\n";
    return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_csv, const std::string& out,
              unsigned threads) {
    const streampca::RunConfig config = streampca::load_run_config(config_path);
    const std::vector<long> grid = parse_grid(grid_csv, "--grid");
    const auto rows = streampca::sweep_T(config, grid, threads);

    streampca::CsvWriter csv;
    csv.header({"T", "schedule_valid", "eta", "epsilon_target", "target_valid", "min_suboptimality",
                "q25", "median", "q75", "max_suboptimality", "selected_suboptimality",
                "selected_index", "flag"});
    bool any_flagged = false;
    std::vector<std::pair<double, double>> fit_points;
    for (const auto& row : rows) {
        csv.row()
            .add(row.T)
            .add(row.schedule_valid)
            .add(row.eta)
            .add(row.target.epsilon)
            .add(row.target.valid)
            .add(row.min_suboptimality)
            .add(row.q25)
            .add(row.median)
            .add(row.q75)
            .add(row.max_suboptimality)
            .add(row.selected_suboptimality)
            .add(row.selected_index)
            .add(sanitize_csv_field(row.flag));
        if (!row.schedule_valid) any_flagged = true;
        if (row.schedule_valid) fit_points.emplace_back(static_cast<double>(row.T), row.selected_suboptimality);
    }
    csv.write_file(out);

    try {
        const auto fit = streampca::fit_rate(fit_points);
        std::cout << "fit: slope=" << streampca::format_double(fit.slope)
                  << " intercept=" << streampca::format_double(fit.intercept)
                  << " residual_rms=" << streampca::format_double(fit.residual_rms) << "\n";
    } catch (const std::invalid_argument&) {
        std::cout << "fit: skipped (not enough usable grid points)\n";
    }
    return any_flagged ? kExitAssumption : kExitOk;
}

int cmd_select(const std::string& config_path, const std::string& out, unsigned threads) {
    const streampca::RunConfig config = streampca::load_run_config(config_path);
    const auto result = streampca::repeat_and_select(config, threads);

    streampca::CsvWriter csv;
    csv.header({"trial_index", "sub_seed", "init_p", "suboptimality", "v_sign", "samples_consumed",
                "validation_quotient", "selected"});
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const auto& r = result.records[i];
        csv.row()
            .add(r.trial_index)
            .add(static_cast<unsigned long long>(r.sub_seed))
            .add(r.init_p)
            .add(r.suboptimality)
            .add(r.v_sign)
            .add(r.samples_consumed)
            .add(result.validation_quotients.empty() ? std::numeric_limits<double>::quiet_NaN()
                                                     : result.validation_quotients[i])
            .add(static_cast<long>(i) == result.chosen_index);
    }
    csv.write_file(out);
    std::cout << "selected trial " << result.chosen_index << " suboptimality "
              << streampca::format_double(result.chosen_suboptimality) << "\n";
    return kExitOk;
}

int cmd_init_bench(const std::string& config_path, const std::string& t0_grid_csv,
                   const std::string& out, unsigned threads) {
    const streampca::RunConfig config = streampca::load_run_config(config_path);
    const std::vector<long> grid = parse_grid(t0_grid_csv, "--t0-grid");
    const auto rows = streampca::init_bench(config.model, config.stream, grid, config.repetitions,
                                            config.master_seed, threads);

    streampca::CsvWriter csv;
    csv.header({"t0", "p_q10", "p_q25", "p_median", "p_q75", "p_q90", "fraction_below_threshold",
                "threshold"});
    for (const auto& row : rows)
        csv.row()
            .add(row.t0)
            .add(row.p_q10)
            .add(row.p_q25)
            .add(row.p_median)
            .add(row.p_q75)
            .add(row.p_q90)
            .add(row.fraction_below_threshold)
            .add(row.threshold);
    csv.write_file(out);
    return kExitOk;
}

int cmd_lemma_check(int grid_n, const std::string& out) {
    streampca::CsvWriter csv;
    csv.header({"eta", "epsilon", "k", "lhs_max", "rhs_bound", "lhs_log", "rhs_log", "arg_max",
                "holds"});
    long violations = 0;
    for (double eta : streampca::envelope_unit_grid())
        for (double eps : streampca::envelope_unit_grid())
            for (long k : streampca::envelope_k_grid()) {
                const auto check = streampca::check_growth_envelope(eta, eps, k, grid_n);
                csv.row()
                    .add(eta)
                    .add(eps)
                    .add(k)
                    .add(check.lhs_max)
                    .add(check.rhs_bound)
                    .add(check.lhs_log)
                    .add(check.rhs_log)
                    .add(check.arg_max)
                    .add(check.holds);
                if (!check.holds) ++violations;
            }
    csv.write_file(out);
    std::cout << "violations: " << violations << "\n";
    return violations == 0 ? kExitOk : kExitAssumption;
}

int cmd_ingest(const std::string& data_path, int dim, double declared_b, long t0,
               std::uint64_t seed, const std::string& schedule, double constant_eta,
               double multiplier, const std::string& warm_path) {
    using namespace streampca;

    // Pass 1: empirical covariance and the a-posteriori norm bound.
    IngestResult data = ingest_stream(data_path, dim);
    const long n = static_cast<long>(data.samples.size());
    if (n == 0) throw ConfigError(data_path + ": no data rows");

    Matrix mean(static_cast<std::size_t>(dim), static_cast<std::size_t>(dim));
    for (const auto& u : data.samples)
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                mean(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +=
                    u.factor[static_cast<std::size_t>(i)] * u.factor[static_cast<std::size_t>(j)];
    for (std::size_t i = 0; i < mean.rows(); ++i)
        for (std::size_t j = 0; j < mean.cols(); ++j) mean(i, j) /= static_cast<double>(n);

    // The empirical covariance doubles as the correctness oracle.
    EigenDecomposition eig = jacobi_eigen(mean);
    Vec spectrum = eig.values;
    for (double& s : spectrum) s = std::max(s, 0.0);
    const CovarianceModel oracle(spectrum, eig.vectors);

    const double b = declared_b > 0.0 ? declared_b
                                      : data.max_sq_norm / oracle.spectral_norm() + 1.0;
    if (t0 >= n) throw ConfigError("--t0 consumes the whole stream (" + std::to_string(n) + " rows)");
    const long T = n - t0;

    Philox init_rng(derive_seed(seed, 0, seed_role::init));
    FileStream stream(data_path, dim);
    InitReport init;
    if (!warm_path.empty()) {
        init = init_warm(load_row_vector(warm_path), &oracle);
    } else if (t0 > 0) {
        init = init_approx_power(stream, t0, init_rng, &oracle);
    } else {
        init = init_uniform_sphere(dim, init_rng, &oracle);
    }

    double p_for_schedule = 8.0;
    if (!warm_path.empty()) p_for_schedule = std::max(8.0, init.p);
    else if (t0 > 0)
        p_for_schedule = std::max(8.0, std::log(static_cast<double>(dim)) * numerical_rank(oracle));
    else p_for_schedule = std::max(8.0, static_cast<double>(dim));

    StepSchedule sched;
    if (schedule == "gap_free") sched = eta_gap_free(b, p_for_schedule, T, multiplier);
    else if (schedule == "gap") sched = eta_gap(eigengap(oracle), T, multiplier);
    else if (schedule == "constant") sched = constant_schedule(constant_eta);
    else throw ConfigError("unknown schedule '" + schedule + "'");

    RunResult rr = run(stream, init.w0, sched, T);
    const double subopt = suboptimality(rr.direction, oracle);

    std::cout << "{\"rows\":" << n << ",\"dim\":" << dim << ",\"t0\":" << init.samples_consumed
              << ",\"T\":" << T << ",\"eta\":" << format_double(sched.eta)
              << ",\"b\":" << format_double(b)
              << ",\"b_declared\":" << (declared_b > 0.0 ? "true" : "false")
              << ",\"max_sq_norm\":" << format_double(data.max_sq_norm)
              << ",\"leading_eigenvalue\":" << format_double(oracle.spectral_norm())
              << ",\"init_p\":" << format_double(init.p)
              << ",\"suboptimality\":" << format_double(subopt) << "}\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming PCA experiment harness"};
    app.require_subcommand(1);

    unsigned threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    std::string config_path;
    std::string out;
    std::string grid_csv;

    auto* run_cmd = app.add_subcommand("run", "run one trial, print a JSON record");
    long trial = 0;
    bool no_timing = false;
    run_cmd->add_option("--config", config_path)->required();
    run_cmd->add_option("--trial", trial, "trial index (default 0)");
    run_cmd->add_flag("--no-timing", no_timing,
                      "omit wall_clock_ns so repeated runs are byte-identical");

    auto* sweep_cmd = app.add_subcommand("sweep", "suboptimality across a T grid");
    sweep_cmd->add_option("--config", config_path)->required();
    sweep_cmd->add_option("--grid", grid_csv, "comma-separated T values")->required();
    sweep_cmd->add_option("--out", out)->required();

    auto* select_cmd = app.add_subcommand("select", "repeat R trials, pick by validation");
    select_cmd->add_option("--config", config_path)->required();
    select_cmd->add_option("--out", out)->required();

    auto* bench_cmd = app.add_subcommand("init-bench", "init quality across a T0 grid");
    std::string t0_grid_csv;
    bench_cmd->add_option("--config", config_path)->required();
    bench_cmd->add_option("--t0-grid", t0_grid_csv, "comma-separated T0 values")->required();
    bench_cmd->add_option("--out", out)->required();

    auto* lemma_cmd = app.add_subcommand("lemma-check", "sweep the growth-envelope inequality");
    int grid_n = 4096;
    lemma_cmd->add_option("--grid-n", grid_n, "search grid resolution (default 4096)");
    lemma_cmd->add_option("--out", out)->required();

    auto* ingest_cmd = app.add_subcommand("ingest", "run on a CSV stream of data points");
    std::string data_path, warm_path, schedule = "gap_free";
    int dim = 0;
    double declared_b = 0.0, constant_eta = 0.0, multiplier = 1.0;
    long t0 = 0;
    std::uint64_t seed = 0;
    ingest_cmd->add_option("--data", data_path)->required();
    ingest_cmd->add_option("--dim", dim)->required();
    ingest_cmd->add_option("--b", declared_b, "declared noise bound (default: estimate from data)");
    ingest_cmd->add_option("--t0", t0, "approx-power init samples (default 0 = uniform init)");
    ingest_cmd->add_option("--seed", seed);
    ingest_cmd->add_option("--schedule", schedule, "gap_free | gap | constant");
    ingest_cmd->add_option("--eta", constant_eta, "step size for --schedule constant");
    ingest_cmd->add_option("--c", multiplier, "step-size multiplier");
    ingest_cmd->add_option("--warm", warm_path, "warm-start vector (one-row CSV)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(config_path, trial, !no_timing);
        if (*sweep_cmd) return cmd_sweep(config_path, grid_csv, out, threads);
        if (*select_cmd) return cmd_select(config_path, out, threads);
        if (*bench_cmd) return cmd_init_bench(config_path, t0_grid_csv, out, threads);
        if (*lemma_cmd) return cmd_lemma_check(grid_n, out);
        if (*ingest_cmd)
            return cmd_ingest(data_path, dim, declared_b, t0, seed, schedule, constant_eta,
                              multiplier, warm_path);
    } catch (const streampca::AssumptionViolation& e) {
        std::cerr << "assumption violation: " << e.what() << "\n";
        return kExitAssumption;
    } catch (const streampca::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
