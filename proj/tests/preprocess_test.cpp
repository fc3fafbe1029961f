#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "rehab/io.hpp"
#include "rehab/preprocess.hpp"
#include "rehab/synthetic.hpp"

using namespace rehab;

namespace {

// Every keypoint at the origin except the nose, which follows `nose`.
PoseSequence with_nose(std::size_t n, const std::function<Vec2(std::size_t)>& nose) {
    std::vector<Frame> frames(n);
    for (std::size_t f = 0; f < n; ++f) {
        frames[f].index = f;
        frames[f][KeypointId::nose].set_position(nose(f));
    }
    return PoseSequence(std::move(frames));
}

std::size_t count_method(const RepairLog& log, RepairMethod m) {
    return static_cast<std::size_t>(std::count_if(log.begin(), log.end(), [m](const auto& e) { return e.method == m; }));
}

}  // namespace

TEST(Displacement, ThreeFourFive) {
    const auto seq = with_nose(2, [](std::size_t f) { return f ? Vec2{3, 4} : Vec2{0, 0}; });
    const auto table = displacements(seq);
    ASSERT_EQ(table.size(), 1u);
    EXPECT_DOUBLE_EQ(table.at(index_of(KeypointId::nose), 1), 5.0);
    EXPECT_DOUBLE_EQ(table.at(index_of(KeypointId::left_ankle), 1), 0.0);
}

TEST(Displacement, MatchesPairwiseDistances) {
    const auto seq = with_nose(100, [](std::size_t f) {
        const double t = static_cast<double>(f);
        return Vec2{20 * std::sin(t / 5), 0.3 * t * t};
    });
    const auto table = displacements(seq);
    const auto m = max_displacements(table);
    double brute = 0.0;
    for (std::size_t t = 1; t < 100; ++t) {
        const double dx = seq[t][KeypointId::nose].x - seq[t - 1][KeypointId::nose].x;
        const double dy = seq[t][KeypointId::nose].y - seq[t - 1][KeypointId::nose].y;
        EXPECT_NEAR(table.at(0, t), std::sqrt(dx * dx + dy * dy), 1e-12);
        brute = std::max(brute, std::sqrt(dx * dx + dy * dy));
    }
    EXPECT_DOUBLE_EQ(m[0], brute);
}

TEST(Displacement, MaximumPerKeypoint) {
    const auto still = with_nose(5, [](std::size_t) { return Vec2{1, 1}; });
    for (double v : max_displacements(displacements(still))) EXPECT_EQ(v, 0.0);
    const auto once = with_nose(4, [](std::size_t f) { return f >= 2 ? Vec2{7.5, 0} : Vec2{0, 0}; });
    EXPECT_DOUBLE_EQ(max_displacements(displacements(once))[0], 7.5);
}

TEST(Displacement, NeedsTwoFrames) {
    const auto one = with_nose(1, [](std::size_t) { return Vec2{0, 0}; });
    EXPECT_THROW(displacements(one), Error);
    EXPECT_THROW(preprocess(one), Error);
}

TEST(OutlierRemoval, ConstantMotionUnchanged) {
    const auto seq = with_nose(30, [](std::size_t f) { return Vec2{2.0 * static_cast<double>(f), 0}; });
    const auto r = remove_outliers(seq);
    EXPECT_TRUE(r.log.empty());
    EXPECT_EQ(r.sequence, seq);
}

TEST(OutlierRemoval, SingleLargeDisplacementFlagged) {
    // 99 displacements of 1 and one of 50.
    const auto seq = with_nose(101, [](std::size_t f) {
        const double x = static_cast<double>(f) + (f >= 50 ? 49.0 : 0.0);
        return Vec2{x, 0};
    });
    const auto table = displacements(seq);
    const auto& s = table.series(0);
    const auto [mean, sd] = mean_and_sd(s);
    EXPECT_NEAR((50.0 - mean) / sd, 9.95, 0.005);

    const auto r = remove_outliers(seq);
    ASSERT_EQ(r.log.size(), 1u);
    EXPECT_EQ(r.log[0].frame, 50u);
    EXPECT_EQ(r.log[0].keypoint, KeypointId::nose);
    EXPECT_EQ(r.log[0].method, RepairMethod::outlier_average);
}

TEST(OutlierRemoval, RepairIsNeighbourMidpoint) {
    const auto seq = with_nose(40, [](std::size_t f) {
        if (f == 11) return Vec2{100, -50};
        return Vec2{static_cast<double>(f), static_cast<double>(f)};
    });
    const auto r = remove_outliers(seq);
    ASSERT_EQ(r.log.size(), 1u);
    EXPECT_EQ(r.log[0].frame, 11u);
    EXPECT_EQ(r.log[0].before, (Vec2{100, -50}));
    EXPECT_EQ(r.log[0].after, (Vec2{11, 11}));
    EXPECT_EQ(r.sequence[11][KeypointId::nose].position(), (Vec2{11, 11}));
}

TEST(MotionContext, Classification) {
    const std::array<bool, 3> S{false, false, false}, L{true, true, true};
    EXPECT_EQ(classify_context(S, L), MotionContext::starting);
    EXPECT_EQ(classify_context(L, S), MotionContext::finishing);
    EXPECT_EQ(classify_context(L, L), MotionContext::ongoing);
    EXPECT_EQ(classify_context(S, S), MotionContext::erroneous);
    EXPECT_EQ(classify_context(S, {true, false, false}), MotionContext::erroneous);
    EXPECT_EQ(classify_context({true, false, true}, L), MotionContext::erroneous);
    EXPECT_EQ(classify_context(L, {true, false, true}), MotionContext::erroneous);
    // A run that starts just before the current frame is still motion onset.
    EXPECT_EQ(classify_context({false, false, true}, L), MotionContext::starting);
    EXPECT_EQ(classify_context(L, {true, true, false}), MotionContext::finishing);
}

TEST(TemporalRepair, LinearExtrapolation) {
    // Still keypoint, then (2,1), a two-frame drift, and back.
    const auto seq = with_nose(20, [](std::size_t f) {
        if (f <= 8) return Vec2{0, 0};
        if (f == 10 || f == 11) return Vec2{30, 30};
        return Vec2{2, 1};
    });
    const auto r = repair_temporal(seq);
    ASSERT_GE(r.log.size(), 2u);
    EXPECT_EQ(r.log[0].frame, 10u);
    EXPECT_EQ(r.log[0].method, RepairMethod::extrapolation);
    EXPECT_EQ(r.log[0].after, (Vec2{4, 2}));
    EXPECT_EQ(r.log[1].frame, 11u);
    EXPECT_EQ(r.log[1].after, (Vec2{6, 3}));
}

TEST(TemporalRepair, MotionOnsetNotRepaired) {
    const auto seq = with_nose(20, [](std::size_t f) {
        return Vec2{f < 10 ? 0.0 : 10.0 * static_cast<double>(f - 9), 0};
    });
    const auto r = preprocess(seq);
    EXPECT_TRUE(r.log.empty());
    EXPECT_EQ(r.sequence, seq);
}

TEST(TemporalRepair, FourFrameDriftRepaired) {
    const auto clean = generate_synthetic(MotionArchetype::make(Archetype::squat, 8, 20, 0.0), kDefaultFps, 3);
    CorruptionSpec spec;
    spec.seed = 9;
    spec.drift_runs.push_back({60, 4, 40.0, KeypointId::left_ankle});
    const auto bad = inject_corruptions(clean.sequence, spec);
    const auto r = preprocess(bad.sequence);
    const auto k = index_of(KeypointId::left_ankle);
    double worst_before = 0.0, worst_after = 0.0;
    for (const auto& c : bad.corruptions) {
        const Vec2 truth = clean.sequence.position(c.frame, k);
        const bool repaired = std::any_of(r.log.begin(), r.log.end(), [&](const auto& e) {
            return e.frame == c.frame && e.keypoint == KeypointId::left_ankle;
        });
        EXPECT_TRUE(repaired) << "frame " << c.frame;
        worst_before = std::max(worst_before, distance(bad.sequence.position(c.frame, k), truth));
        worst_after = std::max(worst_after, distance(r.sequence.position(c.frame, k), truth));
    }
    EXPECT_LT(worst_after, worst_before);
}

TEST(Preprocess, CleanSequencePassesThrough) {
    for (auto a : kAllArchetypes) {
        const auto v = generate_synthetic(MotionArchetype::make(a, 6, 18, 0.0), kDefaultFps, 5);
        const auto r = preprocess(v.sequence);
        EXPECT_TRUE(r.log.empty()) << archetype_name(a);
        EXPECT_EQ(r.sequence, v.sequence);
    }
}

TEST(Preprocess, SpikeAndDriftGiveBothRepairKinds) {
    const auto clean = generate_synthetic(MotionArchetype::make(Archetype::raise_hands, 8, 20, 1.0), kDefaultFps, 21);
    CorruptionSpec spec;
    spec.seed = 4;
    spec.spike_count = 1;
    spec.drift_runs.push_back({80, 2, 60.0, KeypointId::right_hip});
    const auto r = preprocess(inject_corruptions(clean.sequence, spec).sequence);
    EXPECT_GE(count_method(r.log, RepairMethod::outlier_average), 1u);
    EXPECT_GE(count_method(r.log, RepairMethod::extrapolation), 1u);
}

TEST(Preprocess, LogReplaysOntoOriginal) {
    const auto clean = generate_synthetic(MotionArchetype::make(Archetype::lift_foot, 6, 20, 2.0), kDefaultFps, 8);
    CorruptionSpec spec;
    spec.seed = 12;
    spec.spike_count = 4;
    spec.drift_runs.push_back({40, 3, 50.0, std::nullopt});
    const auto bad = inject_corruptions(clean.sequence, spec).sequence;
    const auto r = preprocess(bad);
    EXPECT_FALSE(r.log.empty());
    EXPECT_EQ(replay_repairs(bad, r.log), r.sequence);
    EXPECT_FALSE(format_repair_log(r.log).empty());
}

TEST(Preprocess, SecondPassRepairsLess) {
    const auto clean = generate_synthetic(MotionArchetype::make(Archetype::shrug, 8, 20, 2.0), kDefaultFps, 30);
    CorruptionSpec spec;
    spec.seed = 31;
    spec.spike_count = 5;
    const auto first = preprocess(inject_corruptions(clean.sequence, spec).sequence);
    const auto second = preprocess(first.sequence);
    EXPECT_LT(second.log.size(), first.log.size());
}

TEST(Preprocess, ParameterValidation) {
    const auto seq = with_nose(20, [](std::size_t f) { return Vec2{static_cast<double>(f), 0}; });
    PreprocessParams p;
    p.displacement_threshold = 0.0;
    EXPECT_THROW(preprocess(seq, p), Error);
    p = {};
    p.z_threshold = -1;
    EXPECT_THROW(preprocess(seq, p), Error);
}
