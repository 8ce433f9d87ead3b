#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "stat_oracles.hpp"
#include "streampca/covariance_model.hpp"
#include "streampca/init.hpp"
#include "streampca/streams.hpp"

using namespace streampca;

TEST(POf, BasicValues) {
    const CovarianceModel m2(Vec{1.0, 0.5});
    EXPECT_DOUBLE_EQ(p_of(Vec{1.0, 0.0}, m2), 1.0);

    const CovarianceModel degenerate(Vec{1.0, 1.0, 0.5});
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    EXPECT_NEAR(p_of(Vec{inv_sqrt2, inv_sqrt2, 0.0}, degenerate), 1.0, 1e-14);

    const CovarianceModel m3(Vec{1.0, 0.5, 0.2});
    EXPECT_NEAR(p_of(Vec{inv_sqrt2, 0.0, inv_sqrt2}, m3), 2.0, 1e-14);
}

TEST(POf, OrthogonalStartIsInfinity) {
    const CovarianceModel m(Vec{1.0, 0.5});
    EXPECT_TRUE(std::isinf(p_of(Vec{0.0, 1.0}, m)));
}

TEST(POf, SignFlipAndRotationInvariance) {
    const CovarianceModel model(geometric_spectrum(7, 0.6));
    const Matrix q = random_rotation(7, 44);
    const auto rotated = rotate_model(model, q);
    Philox rng(8);
    for (int rep = 0; rep < 30; ++rep) {
        Vec w(7);
        rng.fill_gaussian(w);
        normalize(w);
        const double p = p_of(w, model);
        Vec flipped = w;
        scale(-1.0, flipped);
        EXPECT_DOUBLE_EQ(p_of(flipped, model), p);
        EXPECT_NEAR(p_of(q.apply(w), rotated), p, 1e-9 * p);
    }
}

TEST(InitWarm, NormalizesAndMeasures) {
    const CovarianceModel m(Vec{1.0, 0.5});
    const auto r1 = init_warm(Vec{2.0, 0.0}, &m);
    EXPECT_DOUBLE_EQ(r1.p, 1.0);
    EXPECT_DOUBLE_EQ(r1.w0[0], 1.0);
    EXPECT_EQ(r1.samples_consumed, 0);

    const auto r2 = init_warm(Vec{1.0, 1.0}, &m);
    EXPECT_NEAR(r2.p, 2.0, 1e-14);

    const auto r3 = init_warm(Vec{0.0, 1.0}, &m);
    EXPECT_TRUE(std::isinf(r3.p));

    EXPECT_THROW(init_warm(Vec{0.0, 0.0}), std::invalid_argument);
}

TEST(InitUniform, UnitNormAndDeterminism) {
    Philox rng1(101), rng2(101);
    const auto a = init_uniform_sphere(50, rng1);
    const auto b = init_uniform_sphere(50, rng2);
    EXPECT_EQ(a.w0, b.w0);
    EXPECT_NEAR(norm(a.w0), 1.0, 1e-12);
    EXPECT_EQ(a.samples_consumed, 0);
    EXPECT_THROW(init_uniform_sphere(1, rng1), std::invalid_argument);
}

TEST(InitUniform, AlignmentScalesInverselyWithDimension) {
    // d <v, w0>^2 concentrates around the median of a squared standard
    // normal (~0.455); the acceptance window is [0.2, 5].
    const int d = 100;
    const CovarianceModel model(spiked_spectrum(d, 0.5));
    Philox rng(500);
    std::vector<double> scaled;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto r = init_uniform_sphere(d, rng, &model);
        scaled.push_back(static_cast<double>(d) / r.p);  // = d <v,w0>^2
    }
    std::nth_element(scaled.begin(), scaled.begin() + 500, scaled.end());
    const double median = scaled[500];
    EXPECT_GE(median, 0.2);
    EXPECT_LE(median, 5.0);
}

TEST(InitUniform, AlignmentFollowsBetaLaw) {
    // <v, w0>^2 ~ Beta(1/2, (d-1)/2) under uniform initialization.
    const int d = 25;
    const CovarianceModel model(spiked_spectrum(d, 0.5));
    Philox rng(321);
    std::vector<double> sample;
    const int n = 4000;
    for (int trial = 0; trial < n; ++trial) {
        const auto r = init_uniform_sphere(d, rng, &model);
        sample.push_back(1.0 / r.p);
    }
    const double ks = testutil::ks_statistic(
        sample, [&](double x) { return testutil::beta_cdf(0.5, (d - 1) / 2.0, x); });
    EXPECT_LT(ks, testutil::ks_critical_1pct(n));
}

TEST(InitApproxPower, ExactPowerStepOnNoiselessStream) {
    const CovarianceModel model(Vec{1.0, 0.5});
    Philox rng(1);
    for (long t0 : {1L, 3L, 17L}) {
        ExactStream s(model);
        const auto r = init_approx_power_from(Vec{1.0, 1.0}, s, t0, rng, &model);
        // A (1,1) = (1, 0.5), normalized (2,1)/sqrt(5)
        EXPECT_NEAR(r.w0[0], 2.0 / std::sqrt(5.0), 1e-14);
        EXPECT_NEAR(r.w0[1], 1.0 / std::sqrt(5.0), 1e-14);
        EXPECT_NEAR(r.p, 1.25, 1e-13);
        EXPECT_EQ(r.samples_consumed, t0);
        EXPECT_FALSE(r.fell_back_to_uniform);
    }
}

TEST(InitApproxPower, MatchesNormalizedPowerStepForGaussianProbe) {
    const auto model = rotate_model(CovarianceModel(geometric_spectrum(9, 0.5)),
                                    random_rotation(9, 14));
    Philox rng(10);
    Vec probe(9);
    rng.fill_gaussian(probe);
    ExactStream s(model);
    const auto r = init_approx_power_from(probe, s, 7, rng, &model);
    Vec expected = model.apply(probe);
    normalize(expected);
    EXPECT_LT(max_abs_diff(r.w0, expected), 1e-14);
}

TEST(InitApproxPower, RankOneModelGivesPerfectAlignment) {
    const CovarianceModel model(flat_spectrum(50, 1));
    RademacherStream s(model, 3);
    Philox rng(4);
    const auto r = init_approx_power(s, 1, rng, &model);
    EXPECT_NEAR(r.p, 1.0, 1e-12);
}

TEST(InitApproxPower, FallsBackWhenStreamAnnihilatesProbe) {
    const CovarianceModel model(Vec{1.0, 0.0});
    RademacherStream s(model, 6);
    Philox rng(7);
    const auto r = init_approx_power_from(Vec{0.0, 1.0}, s, 5, rng, &model);
    EXPECT_TRUE(r.fell_back_to_uniform);
    EXPECT_NEAR(norm(r.w0), 1.0, 1e-12);
    EXPECT_EQ(r.samples_consumed, 5);
}

TEST(InitApproxPower, RejectsZeroBudget) {
    const CovarianceModel model(Vec{1.0, 0.5});
    ExactStream s(model);
    Philox rng(9);
    EXPECT_THROW(init_approx_power(s, 0, rng), std::invalid_argument);
}

TEST(Init, AllMethodsReturnUnitVectors) {
    const auto model = rotate_model(CovarianceModel(power_spectrum(12, 1.0)),
                                    random_rotation(12, 77));
    Philox rng(11);
    RademacherStream s(model, 12);
    const auto uni = init_uniform_sphere(12, rng, &model);
    const auto pow = init_approx_power(s, 25, rng, &model);
    Vec warm_src(12, 0.3);
    const auto warm = init_warm(warm_src, &model);
    for (const auto* r : {&uni, &pow, &warm}) EXPECT_NEAR(norm(r->w0), 1.0, 1e-12);
}
