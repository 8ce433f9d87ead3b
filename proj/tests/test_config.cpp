#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "streampca/config.hpp"

using namespace streampca;

namespace {

const char* kFullConfig = R"(# gap-free benchmark
[model]
dim = 4
spectrum = 1, 0.5, 0.25, 0.125

[stream]
kind = rademacher

[init]
method = uniform

[schedule]
kind = gap_free
c = 2.0

[run]
T = 1000
seed = 42
repetitions = 5
validation = 20
)";

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

} // namespace

TEST(Config, ParsesAllSections) {
    const RunConfig c = parse_run_config(kFullConfig);
    EXPECT_EQ(c.model.dim(), 4);
    EXPECT_DOUBLE_EQ(c.model.eigenvalue(3), 0.125);
    EXPECT_EQ(c.stream.kind, StreamKind::rademacher);
    EXPECT_EQ(c.init_method, InitMethod::uniform);
    EXPECT_EQ(c.schedule_kind, ScheduleKind::gap_free);
    EXPECT_DOUBLE_EQ(c.schedule_multiplier, 2.0);
    EXPECT_EQ(c.T, 1000);
    EXPECT_EQ(c.master_seed, 42u);
    EXPECT_EQ(c.repetitions, 5);
    EXPECT_EQ(c.validation_samples, 20);
}

TEST(Config, SpectrumFamilies) {
    for (const auto& [family, check] :
         std::vector<std::pair<std::string, double>>{{"flat(2)", 1.0},
                                                     {"geometric(0.5)", 1.0},
                                                     {"power(2)", 1.0},
                                                     {"spiked(0.25)", 1.0}}) {
        const std::string text = "[model]\ndim = 4\nspectrum = " + family + "\n";
        const CovarianceModel m = parse_model(text);
        EXPECT_EQ(m.dim(), 4);
        EXPECT_DOUBLE_EQ(m.spectral_norm(), check);
    }
    const CovarianceModel spiked = parse_model("[model]\ndim = 3\nspectrum = spiked(0.25)\n");
    EXPECT_DOUBLE_EQ(spiked.eigenvalue(1), 0.75);
}

TEST(Config, RotationSeedBuildsNonStandardBasis) {
    const CovarianceModel m =
        parse_model("[model]\ndim = 5\nspectrum = geometric(0.5)\nrotation_seed = 7\n");
    EXPECT_FALSE(m.standard_basis());
    EXPECT_LT(orthonormality_defect(m.basis()), 1e-12);
    const CovarianceModel again =
        parse_model("[model]\ndim = 5\nspectrum = geometric(0.5)\nrotation_seed = 7\n");
    EXPECT_LT(max_abs_diff(m.eigenvector(0), again.eigenvector(0)), 0.0 + 1e-18);
}

TEST(Config, RejectsUnknownKeysAndSections) {
    EXPECT_THROW(parse_model("[model]\ndim = 2\nspectrum = flat(1)\ncolor = blue\n"), ConfigError);
    EXPECT_THROW(parse_run_config("[model]\ndim = 2\nspectrum = flat(1)\n[extras]\nx = 1\n"),
                 ConfigError);
}

TEST(Config, RejectsDuplicateKeys) {
    EXPECT_THROW(parse_model("[model]\ndim = 2\ndim = 3\nspectrum = flat(1)\n"), ConfigError);
}

TEST(Config, RejectsMissingRequiredKeys) {
    EXPECT_THROW(parse_run_config("[model]\ndim = 2\nspectrum = flat(1)\n"), ConfigError);
    EXPECT_THROW(parse_model("[model]\ndim = 2\n"), ConfigError);
}

TEST(Config, RejectsMalformedValuesWithLineInfo) {
    try {
        parse_model("[model]\ndim = two\nspectrum = flat(1)\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("dim"), std::string::npos);
    }
    EXPECT_THROW(parse_model("[model]\ndim = 3\nspectrum = 1, 0.5\n"), ConfigError);  // length
    EXPECT_THROW(parse_model("[model]\ndim = 2\nspectrum = banana(3)\n"), ConfigError);
    EXPECT_THROW(parse_run_config("no sections here\n"), ConfigError);
}

TEST(Config, FileStreamNeedsPathAndBound) {
    const std::string base = "[model]\ndim = 2\nspectrum = flat(1)\n[init]\nmethod = uniform\n"
                             "[schedule]\nkind = gap_free\n[run]\nT = 10\nseed = 1\n";
    EXPECT_THROW(parse_run_config(base + "[stream]\nkind = file\n"), ConfigError);
    EXPECT_THROW(parse_run_config(base + "[stream]\nkind = file\npath = x.csv\n"), ConfigError);
    const RunConfig ok = parse_run_config(base + "[stream]\nkind = file\npath = x.csv\nb = 3\n");
    EXPECT_EQ(ok.stream.kind, StreamKind::file);
    EXPECT_DOUBLE_EQ(ok.stream.declared_b, 3.0);

    EXPECT_THROW(parse_run_config(base + "[stream]\nkind = rademacher\nb = 3\n"), ConfigError);
}

TEST(Config, WarmInitLoadsVectorRelativeToConfig) {
    const auto dir = std::filesystem::temp_directory_path();
    write_temp("streampca_w0.csv", "1,0,0\n");
    const std::string text = "[model]\ndim = 3\nspectrum = flat(1)\n"
                             "[stream]\nkind = rademacher\n"
                             "[init]\nmethod = warm\nwarm_path = streampca_w0.csv\n"
                             "[schedule]\nkind = constant\neta = 0.1\n"
                             "[run]\nT = 10\nseed = 1\n";
    const auto config_path = write_temp("streampca_warm.ini", text);
    const RunConfig c = load_run_config(config_path);
    EXPECT_EQ(c.init_method, InitMethod::warm);
    ASSERT_EQ(c.warm_vector.size(), 3u);
    EXPECT_DOUBLE_EQ(c.warm_vector[0], 1.0);
}

TEST(Config, WarmVectorDimensionChecked) {
    write_temp("streampca_w0_bad.csv", "1,0\n");
    const std::string text = "[model]\ndim = 3\nspectrum = flat(1)\n"
                             "[stream]\nkind = rademacher\n"
                             "[init]\nmethod = warm\nwarm_path = streampca_w0_bad.csv\n"
                             "[schedule]\nkind = constant\neta = 0.1\n"
                             "[run]\nT = 10\nseed = 1\n";
    const auto config_path = write_temp("streampca_warm_bad.ini", text);
    EXPECT_THROW(load_run_config(config_path), ConfigError);
}

TEST(Config, MethodSpecificKeysAreScoped) {
    const std::string base = "[model]\ndim = 2\nspectrum = flat(1)\n[stream]\nkind = rademacher\n"
                             "[schedule]\nkind = gap_free\n[run]\nT = 10\nseed = 1\n";
    EXPECT_THROW(parse_run_config(base + "[init]\nmethod = uniform\nt0 = 5\n"), ConfigError);
    EXPECT_THROW(parse_run_config(base + "[init]\nmethod = approx_power\n"), ConfigError);
    const RunConfig ok = parse_run_config(base + "[init]\nmethod = approx_power\nt0 = 5\n");
    EXPECT_EQ(ok.t0, 5);
}

TEST(Config, ConstantScheduleTakesExplicitEta) {
    const std::string base = "[model]\ndim = 2\nspectrum = flat(1)\n[stream]\nkind = rademacher\n"
                             "[init]\nmethod = uniform\n[run]\nT = 10\nseed = 1\n";
    const RunConfig ok = parse_run_config(base + "[schedule]\nkind = constant\neta = 0.25\n");
    EXPECT_DOUBLE_EQ(ok.constant_eta, 0.25);
    EXPECT_THROW(parse_run_config(base + "[schedule]\nkind = gap_free\neta = 0.25\n"), ConfigError);
}

TEST(Config, ExactStreamAcceptedForDebugRuns) {
    const std::string text = "[model]\ndim = 2\nspectrum = 1, 0.5\n[stream]\nkind = exact\n"
                             "[init]\nmethod = uniform\n[schedule]\nkind = constant\neta = 0.5\n"
                             "[run]\nT = 10\nseed = 1\n";
    const RunConfig c = parse_run_config(text);
    EXPECT_EQ(c.stream.kind, StreamKind::exact);
}
