#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rehab/repetition.hpp"
#include "rehab/savgol.hpp"
#include "rehab/synthetic.hpp"
#include "rehab/wavelet.hpp"

using namespace rehab;

TEST(SavitzkyGolay, FiveTwoCoefficients) {
    const auto c = sg_coefficients(5, 2);
    const double expected[] = {-3, 12, 17, 12, -3};
    ASSERT_EQ(c.size(), 5u);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(c[i], expected[i] / 35.0, 1e-12);
}

TEST(SavitzkyGolay, CoefficientsMatchNormalEquations) {
    for (auto [w, p] : {std::pair{5, 2}, {7, 2}, {7, 3}, {9, 4}, {11, 3}, {11, 5}, {15, 0}}) {
        const auto got = sg_coefficients(w, p);
        const auto want = oracle::savgol_weights(w, p);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-9) << w << "/" << p;
    }
}

TEST(SavitzkyGolay, FullOrderInterpolates) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> x(40);
    for (auto& v : x) v = g(rng);
    const auto y = savitzky_golay(x, {7, 6});
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(y[i], x[i], 1e-8);
}

TEST(SavitzkyGolay, ReproducesPolynomials) {
    std::vector<double> constant(30, 4.5), ramp(30), cubic(30);
    for (std::size_t i = 0; i < 30; ++i) {
        const double t = static_cast<double>(i);
        ramp[i] = 3.0 * t - 2.0;
        cubic[i] = 0.01 * t * t * t - 0.2 * t * t + t;
    }
    const auto c = savitzky_golay(constant);
    const auto r = savitzky_golay(ramp);
    const auto q = savitzky_golay(cubic, {11, 3});
    for (std::size_t i = 0; i < 30; ++i) {
        EXPECT_NEAR(c[i], 4.5, 1e-9);
        EXPECT_NEAR(r[i], ramp[i], 1e-9);
        EXPECT_NEAR(q[i], cubic[i], 1e-9);
    }
}

TEST(SavitzkyGolay, ReducesNoiseOnSinusoid) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g(0.0, 0.1);
    std::vector<double> clean(200), noisy(200);
    for (std::size_t i = 0; i < 200; ++i) {
        clean[i] = std::sin(2 * std::numbers::pi * static_cast<double>(i) / 40.0);
        noisy[i] = clean[i] + g(rng);
    }
    const auto smooth = savitzky_golay(noisy);
    double before = 0, after = 0;
    for (std::size_t i = 0; i < 200; ++i) {
        before += (noisy[i] - clean[i]) * (noisy[i] - clean[i]);
        after += (smooth[i] - clean[i]) * (smooth[i] - clean[i]);
    }
    EXPECT_LT(after, before);
}

TEST(SavitzkyGolay, Validation) {
    std::vector<double> x(20, 1.0);
    EXPECT_THROW(savitzky_golay(x, {4, 2}), Error);
    EXPECT_THROW(savitzky_golay(x, {5, 5}), Error);
    EXPECT_THROW(savitzky_golay(std::vector<double>(5, 1.0), {11, 3}), Error);
}

TEST(Wavelet, MonotoneSeriesHasNoPeaks) {
    std::vector<double> x(100);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
    EXPECT_TRUE(cwt_peaks(x).empty());
}

TEST(Wavelet, CleanCyclesGivePeaksAtMaxima) {
    const auto x = oracle::cosine_cycles(5, 20);
    const auto peaks = cwt_peaks(x);
    const auto want = oracle::zero_crossing_peaks(x);
    ASSERT_EQ(want.size(), 5u);
    EXPECT_EQ(peaks, want);
}

TEST(Wavelet, NoisyCyclesAfterSmoothing) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto x = oracle::cosine_cycles(5, 24);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 0.05 * 100.0);
        for (auto& v : x) v += g(rng);
        EXPECT_EQ(cwt_peaks(savitzky_golay(x)).size(), 5u) << "seed " << seed;
    }
}

TEST(Wavelet, CycleCountsAcrossPeriods) {
    for (int k = 1; k <= 12; ++k)
        for (int period : {16, 22, 30}) {
            const auto x = oracle::cosine_cycles(k, period);
            EXPECT_EQ(cwt_peaks(x).size(), oracle::zero_crossing_peaks(x).size()) << k << "x" << period;
        }
}

TEST(Wavelet, ShortSeriesHasNoPeaks) { EXPECT_TRUE(cwt_peaks(std::vector<double>{0, 1, 0}).empty()); }

TEST(Repetition, ModeSet) {
    std::vector<int> a;
    a.insert(a.end(), 9, 10);
    a.insert(a.end(), 4, 20);
    a.insert(a.end(), 4, 1);
    EXPECT_EQ(mode_set(a), std::vector<int>{10});
    std::vector<int> b;
    b.insert(b.end(), 6, 10);
    b.insert(b.end(), 6, 20);
    b.insert(b.end(), 5, 5);
    EXPECT_EQ(mode_set(b), (std::vector<int>{10, 20}));
}

TEST(Repetition, ReferenceDisplacement) {
    std::vector<Frame> frames(3);
    for (std::size_t f = 0; f < 3; ++f) frames[f].index = f;
    frames[2][KeypointId::left_wrist].set_position({6, 8});
    const auto d = reference_displacements(PoseSequence(frames));
    EXPECT_DOUBLE_EQ(d[index_of(KeypointId::left_wrist)][2], 10.0);
    for (double v : d[index_of(KeypointId::nose)]) EXPECT_EQ(v, 0.0);
}

TEST(Repetition, NoiseFreeGeneratorExact) {
    for (auto a : kAllArchetypes)
        for (int reps = 1; reps <= 15; ++reps) {
            const auto v = generate_synthetic(MotionArchetype::make(a, reps, 20, 0.0), kDefaultFps, 1);
            EXPECT_EQ(count_repetitions(v.sequence).repetitions, reps) << archetype_name(a) << " " << reps;
        }
}

TEST(Repetition, NoisySquatWithinTolerance) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto v = generate_synthetic(MotionArchetype::make(Archetype::squat, 10, 20, 2.0), kDefaultFps, seed);
        const int r = count_repetitions(v.sequence).repetitions;
        EXPECT_TRUE(r == 10 || r == 11) << "seed " << seed << " counted " << r;
    }
}

TEST(Repetition, TooShortIsIndeterminate) {
    std::vector<Frame> frames(2);
    frames[1].index = 1;
    try {
        count_repetitions(PoseSequence(frames));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::indeterminate);
    }
}

TEST(Repetition, AllStillIsIndeterminate) {
    std::vector<Frame> frames(30);
    for (std::size_t f = 0; f < frames.size(); ++f) frames[f].index = f;
    try {
        count_repetitions(PoseSequence(frames));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::indeterminate);
    }
    CountParams p;
    p.include_stationary = true;
    EXPECT_EQ(count_repetitions(PoseSequence(frames), p).repetitions, 0);
}

TEST(Repetition, StationaryKeypointsExcludedByDefault) {
    const auto v = generate_synthetic(MotionArchetype::make(Archetype::rotate_neck, 5, 20, 0.0), kDefaultFps, 2);
    const auto r = count_repetitions(v.sequence);
    EXPECT_EQ(r.repetitions, 5);
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
        const bool moving = std::find(v.truth.moving_keypoints.begin(), v.truth.moving_keypoints.end(),
                                      static_cast<KeypointId>(k)) != v.truth.moving_keypoints.end();
        EXPECT_EQ(r.included[k], moving) << k;
    }
    CountParams p;
    p.include_stationary = true;
    const auto all = count_repetitions(v.sequence, p);
    for (bool in : all.included) EXPECT_TRUE(in);
    // Ten still keypoints count zero cycles and outvote the seven moving ones.
    EXPECT_EQ(all.repetitions, 0);
}
