// End-to-end checks of the installed CLI: exit codes and output files.
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace {

namespace fs = std::filesystem;

int run_cli(const std::string& args) {
    const std::string cmd = std::string(STREAMPCA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run_cli_capture(const std::string& args, const std::string& stdout_path) {
    const std::string cmd =
        std::string(STREAMPCA_CLI_PATH) + " " + args + " > " + stdout_path + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

std::string first_line(const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    return line;
}

const char* kQuickConfig = R"([model]
dim = 6
spectrum = spiked(0.4)

[stream]
kind = rademacher

[init]
method = uniform

[schedule]
kind = gap_free

[run]
T = 500
seed = 7
repetitions = 4
validation = 20
)";

} // namespace

TEST(Cli, RunProducesRecordAndExitZero) {
    const auto config = write_temp("streampca_cli_run.ini", kQuickConfig);
    EXPECT_EQ(run_cli("run --config " + config), 0);
}

TEST(Cli, MissingConfigIsExitTwo) {
    EXPECT_EQ(run_cli("run --config /nonexistent/nope.ini"), 2);
}

TEST(Cli, BadConfigIsExitTwo) {
    const auto config = write_temp("streampca_cli_bad.ini", "[model]\ndim = 2\nunknown = 1\n");
    EXPECT_EQ(run_cli("run --config " + config), 2);
}

TEST(Cli, AssumptionViolationIsExitThree) {
    // gap schedule with a tiny eigengap: eta = ln(T)/(lambda T) > 1 at T = 10.
    const std::string cfg = R"([model]
dim = 4
spectrum = spiked(0.01)

[stream]
kind = rademacher

[init]
method = uniform

[schedule]
kind = gap

[run]
T = 10
seed = 1
)";
    const auto config = write_temp("streampca_cli_eta.ini", cfg);
    EXPECT_EQ(run_cli("run --config " + config), 3);
}

TEST(Cli, SweepWritesCsv) {
    const auto config = write_temp("streampca_cli_sweep.ini", kQuickConfig);
    const auto out = (fs::temp_directory_path() / "streampca_cli_sweep.csv").string();
    EXPECT_EQ(run_cli("sweep --config " + config + " --grid 200,400,800 --out " + out), 0);
    EXPECT_EQ(first_line(out),
              "T,schedule_valid,eta,epsilon_target,target_valid,min_suboptimality,q25,median,q75,"
              "max_suboptimality,selected_suboptimality,selected_index,flag");
}

TEST(Cli, SelectWritesCsv) {
    const auto config = write_temp("streampca_cli_select.ini", kQuickConfig);
    const auto out = (fs::temp_directory_path() / "streampca_cli_select.csv").string();
    EXPECT_EQ(run_cli("select --config " + config + " --out " + out), 0);
    EXPECT_EQ(first_line(out),
              "trial_index,sub_seed,init_p,suboptimality,v_sign,samples_consumed,"
              "validation_quotient,selected");
}

TEST(Cli, InitBenchWritesCsv) {
    // init-bench draws its trial count from `repetitions`, minimum 20.
    std::string cfg = kQuickConfig;
    cfg.replace(cfg.find("repetitions = 4"), 15, "repetitions = 25");
    const auto config = write_temp("streampca_cli_bench.ini", cfg);
    const auto out = (fs::temp_directory_path() / "streampca_cli_bench.csv").string();
    EXPECT_EQ(run_cli("init-bench --config " + config + " --t0-grid 0,50 --out " + out), 0);
    EXPECT_EQ(first_line(out),
              "t0,p_q10,p_q25,p_median,p_q75,p_q90,fraction_below_threshold,threshold");
}

TEST(Cli, LemmaCheckFindsNoViolations) {
    const auto out = (fs::temp_directory_path() / "streampca_cli_lemma.csv").string();
    EXPECT_EQ(run_cli("lemma-check --grid-n 1000 --out " + out), 0);
    EXPECT_EQ(first_line(out), "eta,epsilon,k,lhs_max,rhs_bound,lhs_log,rhs_log,arg_max,holds");
}

TEST(Cli, OutputsAreByteIdenticalAcrossReruns) {
    const auto config = write_temp("streampca_cli_det.ini", kQuickConfig);
    const auto out1 = (fs::temp_directory_path() / "streampca_det_1.json").string();
    const auto out2 = (fs::temp_directory_path() / "streampca_det_2.json").string();
    ASSERT_EQ(run_cli_capture("run --config " + config + " --no-timing", out1), 0);
    ASSERT_EQ(run_cli_capture("run --config " + config + " --no-timing", out2), 0);
    const std::string record = read_file(out1);
    EXPECT_EQ(record, read_file(out2));
    EXPECT_NE(record.find("\"suboptimality\""), std::string::npos);
    EXPECT_EQ(record.find("wall_clock_ns"), std::string::npos);

    const auto csv1 = (fs::temp_directory_path() / "streampca_det_1.csv").string();
    const auto csv2 = (fs::temp_directory_path() / "streampca_det_2.csv").string();
    ASSERT_EQ(run_cli("sweep --config " + config + " --grid 200,400,800 --out " + csv1), 0);
    ASSERT_EQ(run_cli("sweep --config " + config + " --grid 200,400,800 --out " + csv2), 0);
    EXPECT_EQ(read_file(csv1), read_file(csv2));
}

TEST(Cli, FlaggedSweepPointsGiveExitThreeButStillWrite) {
    const std::string cfg = R"([model]
dim = 4
spectrum = spiked(0.01)

[stream]
kind = rademacher

[init]
method = uniform

[schedule]
kind = gap

[run]
T = 10000
seed = 1
repetitions = 2
validation = 10
)";
    const auto config = write_temp("streampca_cli_flagged.ini", cfg);
    const auto out = (fs::temp_directory_path() / "streampca_cli_flagged.csv").string();
    // eta = ln(T)/(0.01 T) > 1 at T = 10: that grid point is flagged.
    EXPECT_EQ(run_cli("sweep --config " + config + " --grid 10,1000,10000 --out " + out), 3);
    const std::string csv = read_file(out);
    EXPECT_NE(csv.find("\n10,0,"), std::string::npos);     // flagged row
    EXPECT_NE(csv.find("\n1000,1,"), std::string::npos);   // valid row
}

TEST(Cli, IngestRunsOnCsvData) {
    std::string rows;
    // simple anisotropic 2-d cloud
    for (int i = 0; i < 60; ++i) {
        const double a = (i % 7 - 3) * 0.5;
        const double b = (i % 3 - 1) * 0.1;
        rows += std::to_string(a + b) + "," + std::to_string(b) + "\n";
    }
    const auto data = write_temp("streampca_cli_data.csv", rows);
    EXPECT_EQ(run_cli("ingest --data " + data + " --dim 2 --seed 3"), 0);
    EXPECT_EQ(run_cli("ingest --data " + data + " --dim 3"), 2);  // wrong width
}
