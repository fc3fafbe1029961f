#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "rehab/kinematics.hpp"
#include "rehab/preprocess.hpp"
#include "rehab/similarity.hpp"
#include "rehab/synthetic.hpp"

using namespace rehab;
using std::numbers::pi;

namespace {

Frame arm(Vec2 shoulder, Vec2 elbow, Vec2 wrist) {
    Frame f;
    for (std::size_t k = 0; k < kNumKeypoints; ++k) f.keypoints[k].set_position({static_cast<double>(k), 100.0});
    f[KeypointId::left_shoulder].set_position(shoulder);
    f[KeypointId::left_elbow].set_position(elbow);
    f[KeypointId::left_wrist].set_position(wrist);
    return f;
}

PoseSequence video(Archetype a, std::uint64_t seed, PoseFault fault = PoseFault::none) {
    return generate_synthetic(MotionArchetype::make(a, 6, 20, 1.0), kDefaultFps, seed, fault).sequence;
}

}  // namespace

TEST(Angles, BetweenVectors) {
    EXPECT_NEAR(*angle_between({0, -1}, {1, 0}), pi / 2, 1e-12);
    EXPECT_NEAR(*angle_between({3, 4}, {3, 4}), 0.0, 1e-7);
    EXPECT_NEAR(*angle_between({1, 0}, {-1, 0}), pi, 1e-12);
    EXPECT_FALSE(angle_between({0, 0}, {1, 0}).has_value());
}

TEST(Angles, DefaultCatalogue) {
    const auto defs = default_angle_defs();
    ASSERT_EQ(defs.size(), 11u);
    EXPECT_EQ(defs[0].name, "left_elbow");
    EXPECT_EQ(defs[8].name, "neck");
    EXPECT_EQ(defs[10].name, "trunk_twist");
    EXPECT_NEAR(*defs[0].evaluate(arm({0, 0}, {0, -1}, {0, -2})), pi, 1e-12);
    EXPECT_NEAR(*defs[0].evaluate(arm({0, 0}, {0, 1}, {1, 1})), pi / 2, 1e-12);
}

TEST(Angles, CoincidentKeypointsAreMissing) {
    const auto defs = default_angle_defs();
    const PoseSequence seq({arm({0, 0}, {0, 0}, {1, 1})});
    const auto s = extract_angles(seq, defs);
    EXPECT_TRUE(AngleSeries::missing(s.values[0][0]));
    EXPECT_FALSE(AngleSeries::missing(s.values[1][0]));
}

TEST(Angles, StaticPoseGivesConstantSeries) {
    std::vector<Frame> frames(5, arm({0, 0}, {0, 1}, {1, 1}));
    for (std::size_t f = 0; f < frames.size(); ++f) frames[f].index = f;
    const auto s = extract_angles(PoseSequence(frames), default_angle_defs());
    for (const auto& v : s.values)
        for (double x : v) EXPECT_TRUE((std::isnan(x) && std::isnan(v[0])) || x == v[0]);
}

TEST(Angles, SquatKneePeriod) {
    const auto v = generate_synthetic(MotionArchetype::make(Archetype::squat, 4, 20, 0.0), kDefaultFps, 1).sequence;
    const auto s = extract_angles(v, default_angle_defs());
    const auto& knee = s.values[6];
    const int cycle = MotionArchetype::make(Archetype::squat, 4, 20, 0.0).cycle_frames();
    for (std::size_t t = 0; t + static_cast<std::size_t>(cycle) < knee.size(); ++t)
        EXPECT_NEAR(knee[t], knee[t + static_cast<std::size_t>(cycle)], 1e-9);
    EXPECT_GT(*std::max_element(knee.begin(), knee.end()) - *std::min_element(knee.begin(), knee.end()), 0.1);
}

TEST(Angles, CatalogueJsonRoundTrip) {
    const auto defs = default_angle_defs();
    EXPECT_EQ(angle_defs_from_json(angle_defs_to_json(defs)), defs);
    const auto named = angle_defs_from_json(nlohmann::json::parse(
        R"([{"name":"x","a":["left_hip","left_knee"],"b":[{"mid":[5,6]},0]}])"));
    ASSERT_EQ(named.size(), 1u);
    EXPECT_EQ(named[0].a.origin, PointSpec(KeypointId::left_hip));
    EXPECT_EQ(named[0].b.origin, PointSpec(Midpoint{KeypointId::left_shoulder, KeypointId::right_shoulder}));
    EXPECT_THROW(angle_defs_from_json(nlohmann::json::parse(R"([{"name":"x","a":[0,17],"b":[0,1]}])")), Error);
    EXPECT_THROW(angle_defs_from_json(nlohmann::json::array()), Error);
}

TEST(Histogram, PointMass) {
    const std::vector<double> x(50, pi / 2);
    const auto h = histogram(x);
    ASSERT_TRUE(h);
    EXPECT_GT(h->mass[9], 0.9999);
    EXPECT_EQ(std::max_element(h->mass.begin(), h->mass.end()) - h->mass.begin(), 9);
}

TEST(Histogram, BinCentresUniform) {
    std::vector<double> x;
    for (int i = 0; i < 18; ++i) x.push_back((i + 0.5) * pi / 18);
    const auto h = histogram(x);
    for (double m : h->mass) EXPECT_NEAR(m, 1.0 / 18, 1e-12);
}

TEST(Histogram, MatchesCountingOracle) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, pi);
    std::vector<double> x(500);
    for (auto& v : x) v = u(rng);
    x.push_back(0.0);
    x.push_back(pi);
    x.push_back(std::nan(""));
    for (std::size_t bins : {1u, 7u, 18u, 36u}) {
        const auto h = histogram(x, bins, 1e-6);
        const auto want = oracle::histogram(x, bins, 1e-6);
        for (std::size_t i = 0; i < bins; ++i) EXPECT_NEAR(h->mass[i], want[i], 1e-15);
    }
}

TEST(Histogram, AllMissing) {
    const std::vector<double> x(4, std::nan(""));
    EXPECT_FALSE(histogram(x).has_value());
}

TEST(Divergence, Values) {
    const AngleDistribution p{{0.5, 0.5}}, q{{0.9, 0.1}};
    EXPECT_EQ(kl_divergence(p, p), 0.0);
    EXPECT_NEAR(kl_divergence(p, q), 0.5108, 5e-5);
    EXPECT_NEAR(kl_divergence(p, q), oracle::kl(p.mass, q.mass), 1e-15);
    EXPECT_NEAR(kl_divergence(q, p), oracle::kl(q.mass, p.mass), 1e-15);
    EXPECT_GT(std::abs(kl_divergence(p, q) - kl_divergence(q, p)), 0.1);
    EXPECT_THROW(kl_divergence(p, AngleDistribution{{1.0}}), Error);
}

TEST(Scoring, AngleScore) {
    EXPECT_EQ(*angle_score(0.0, 2.0), 100.0);
    EXPECT_EQ(*angle_score(2.0, 2.0), 0.0);
    EXPECT_EQ(*angle_score(4.0, 2.0), 0.0);
    EXPECT_DOUBLE_EQ(*angle_score(1.0, 2.0), 50.0);
    EXPECT_FALSE(angle_score(0.0, 0.0).has_value());
}

TEST(Scoring, HarmonicMean) {
    EXPECT_DOUBLE_EQ(harmonic_mean(std::vector<double>{100, 25}), 40.0);
    EXPECT_EQ(harmonic_mean(std::vector<double>{100, 100, 0}), 0.0);
    for (double x : {0.3, 17.0, 99.99}) EXPECT_EQ(harmonic_mean(std::vector<double>(11, x)), x);
    EXPECT_THROW(harmonic_mean(std::vector<double>{}), Error);
}

TEST(Calibration, SelfGivesZeroBounds) {
    const auto s = preprocess(video(Archetype::squat, 1)).sequence;
    const std::vector<PoseSequence> set{s};
    const auto p = calibrate(s, set, default_angle_defs());
    EXPECT_EQ(p.calibration_set_size, 1u);
    EXPECT_EQ(p.upper_bounds.size(), 11u);
    for (const auto& [name, u] : p.upper_bounds) EXPECT_EQ(u, 0.0) << name;
    // No angle can discriminate anything.
    try {
        score_similarity(s, s, p, default_angle_defs());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::indeterminate);
    }
}

TEST(Calibration, SingletonAndScanMaximum) {
    const auto defs = default_angle_defs();
    SimilarityParams params;
    const auto sample = video(Archetype::raise_hands, 1);
    std::vector<PoseSequence> wrong;
    for (std::size_t i = 0; i < 50; ++i)
        wrong.push_back(video(Archetype::raise_hands, 100 + i, kPostureFaults[i % kPostureFaults.size()]));

    const auto single = calibrate(sample, std::span(wrong).first(1), defs);
    const auto ref = extract_angles(sample, defs);
    const auto w0 = extract_angles(wrong[0], defs);
    for (std::size_t a = 0; a < defs.size(); ++a) {
        const auto p = oracle::histogram(w0.values[a], params.bins, params.epsilon);
        const auto q = oracle::histogram(ref.values[a], params.bins, params.epsilon);
        EXPECT_NEAR(single.upper_bounds.at(defs[a].name), oracle::kl(p, q), 1e-12);
    }

    const auto full = calibrate(sample, wrong, defs);
    for (std::size_t a = 0; a < defs.size(); ++a) {
        const auto q = oracle::histogram(ref.values[a], params.bins, params.epsilon);
        double best = 0.0;
        for (const auto& w : wrong)
            best = std::max(best, oracle::kl(oracle::histogram(extract_angles(w, defs).values[a], params.bins,
                                                               params.epsilon),
                                             q));
        EXPECT_NEAR(full.upper_bounds.at(defs[a].name), best, 1e-12);
    }

    auto shuffled = wrong;
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_EQ(calibrate(sample, shuffled, defs).upper_bounds, full.upper_bounds);
    EXPECT_THROW(calibrate(sample, std::span<const PoseSequence>{}, defs), Error);
}

TEST(Similarity, SelfComparisonScoresHundred) {
    const auto defs = default_angle_defs();
    const auto sample = video(Archetype::lift_foot, 2);
    std::vector<PoseSequence> wrong;
    for (auto f : kPostureFaults) wrong.push_back(video(Archetype::lift_foot, 40, f));
    const auto profile = calibrate(sample, wrong, defs);
    const auto r = score_similarity(sample, sample, profile, defs);
    EXPECT_EQ(r.overall, 100.0);
    EXPECT_TRUE(r.similar);
    for (const auto& a : r.angles) {
        if (a.score) {
            EXPECT_EQ(*a.score, 100.0);
        }
    }
}

TEST(Similarity, CalibrationVideoAtBoundScoresZero) {
    const auto defs = default_angle_defs();
    const auto sample = video(Archetype::squat, 2);
    const std::vector<PoseSequence> wrong{video(Archetype::squat, 3, PoseFault::arms_bent)};
    const auto profile = calibrate(sample, wrong, defs);
    const auto r = score_similarity(wrong[0], sample, profile, defs);
    EXPECT_EQ(r.overall, 0.0);
    EXPECT_FALSE(r.similar);
}

TEST(Similarity, ProfileMismatchRejected) {
    const auto defs = default_angle_defs();
    const auto sample = video(Archetype::squat, 2);
    const std::vector<PoseSequence> wrong{video(Archetype::squat, 3, PoseFault::knees_bent)};
    auto profile = calibrate(sample, wrong, defs);
    SimilarityParams p;
    p.bins = 12;
    EXPECT_THROW(score_similarity(sample, sample, profile, defs, p), Error);
    profile.upper_bounds.erase("neck");
    EXPECT_THROW(score_similarity(sample, sample, profile, defs), Error);
}

TEST(Similarity, ProfileRoundTrip) {
    CalibrationProfile p;
    p.action_id = "squat";
    p.calibration_set_size = 50;
    p.upper_bounds = {{"left_elbow", 3.25}, {"neck", 0.125}};
    const auto back = parse_profile(serialize_profile(p));
    EXPECT_EQ(back.action_id, p.action_id);
    EXPECT_EQ(back.calibration_set_size, 50u);
    EXPECT_EQ(back.bins, 18u);
    EXPECT_EQ(back.upper_bounds, p.upper_bounds);
    EXPECT_THROW(parse_profile("{"), Error);
    EXPECT_THROW(parse_profile(R"({"upper_bounds":{"neck":-1}})"), Error);
}
