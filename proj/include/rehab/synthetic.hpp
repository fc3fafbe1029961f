#pragma once

// Synthetic skeleton motion with known ground truth, plus corruption injection
// that mimics the failure modes of a frame-by-frame pose detector.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rehab/error.hpp"
#include "rehab/pose.hpp"

namespace rehab {

enum class Archetype { squat, raise_hands, lift_foot, rotate_neck, rotate_waist, shrug };

inline constexpr std::array<Archetype, 6> kAllArchetypes = {
    Archetype::squat,       Archetype::raise_hands,  Archetype::lift_foot,
    Archetype::rotate_neck, Archetype::rotate_waist, Archetype::shrug,
};

inline constexpr std::string_view archetype_name(Archetype a) {
    switch (a) {
        case Archetype::squat: return "squat";
        case Archetype::raise_hands: return "raise_hands";
        case Archetype::lift_foot: return "lift_foot";
        case Archetype::rotate_neck: return "rotate_neck";
        case Archetype::rotate_waist: return "rotate_waist";
        case Archetype::shrug: return "shrug";
    }
    return "";
}

inline Archetype archetype_from_name(std::string_view name) {
    for (auto a : kAllArchetypes)
        if (archetype_name(a) == name) return a;
    throw Error(ErrorKind::validation, "unknown archetype '" + std::string(name) + "'");
}

// Peak-to-rest displacement, in pixels, of the archetype's most mobile keypoint.
inline constexpr double default_amplitude(Archetype a) {
    switch (a) {
        case Archetype::squat: return 120.0;
        case Archetype::raise_hands: return 220.0;
        case Archetype::lift_foot: return 110.0;
        case Archetype::rotate_neck: return 50.0;
        case Archetype::rotate_waist: return 45.0;
        case Archetype::shrug: return 30.0;
    }
    return 0.0;
}

struct MotionArchetype {
    Archetype name = Archetype::squat;
    int repetitions = 10;
    double amplitude = default_amplitude(Archetype::squat);
    int period_frames = 20;
    double noise_sigma = 0.0;
    // Jitter is Gaussian white noise smoothed over this many frames (kernel
    // standard deviation), rescaled to noise_sigma per coordinate. 0 gives
    // independent jitter per frame.
    double noise_correlation_frames = 2.0;
    // Pause at full extension and at rest within every cycle.
    int hold_frames = 4;
    int rest_frames = 4;

    int cycle_frames() const { return period_frames + hold_frames + rest_frames; }

    static MotionArchetype make(Archetype a, int reps, int period, double noise) {
        return {a, reps, default_amplitude(a), period, noise};
    }
};

// Systematic posture errors used to build "incorrect pose" videos.
enum class PoseFault {
    none,
    arms_bent,         // elbows flexed throughout
    arms_abducted,     // arms held out to the side
    trunk_lean,        // upper body shifted sideways
    knees_bent,        // knees flexed and splayed
    head_turned,       // head held rotated
    shoulders_tilted,  // one shoulder raised
    partial_range,     // movement cut short
};

inline constexpr std::array<PoseFault, 7> kAllFaults = {
    PoseFault::arms_bent,   PoseFault::arms_abducted,    PoseFault::trunk_lean,
    PoseFault::knees_bent,  PoseFault::head_turned,      PoseFault::shoulders_tilted,
    PoseFault::partial_range,
};

// Faults that change the held posture; partial_range only changes how far the
// movement goes.
inline constexpr std::array<PoseFault, 6> kPostureFaults = {
    PoseFault::arms_bent,  PoseFault::arms_abducted, PoseFault::trunk_lean,
    PoseFault::knees_bent, PoseFault::head_turned,   PoseFault::shoulders_tilted,
};

inline constexpr std::string_view fault_name(PoseFault f) {
    switch (f) {
        case PoseFault::none: return "none";
        case PoseFault::arms_bent: return "arms_bent";
        case PoseFault::arms_abducted: return "arms_abducted";
        case PoseFault::trunk_lean: return "trunk_lean";
        case PoseFault::knees_bent: return "knees_bent";
        case PoseFault::head_turned: return "head_turned";
        case PoseFault::shoulders_tilted: return "shoulders_tilted";
        case PoseFault::partial_range: return "partial_range";
    }
    return "";
}

inline PoseFault fault_from_name(std::string_view name) {
    if (name == "none") return PoseFault::none;
    for (auto f : kAllFaults)
        if (fault_name(f) == name) return f;
    throw Error(ErrorKind::validation, "unknown fault '" + std::string(name) + "'");
}

struct GroundTruth {
    int repetitions = 0;
    std::vector<KeypointId> moving_keypoints;
};

struct SyntheticVideo {
    PoseSequence sequence;
    GroundTruth truth;
};

namespace detail {

using K = KeypointId;

// Upright subject facing the camera, image coordinates (y grows downwards).
inline constexpr std::array<Vec2, kNumKeypoints> kRestPose = {{
    {320, 100},  // nose
    {332, 88},   // left eye
    {308, 88},   // right eye
    {346, 96},   // left ear
    {294, 96},   // right ear
    {372, 170},  // left shoulder
    {268, 170},  // right shoulder
    {388, 262},  // left elbow
    {252, 262},  // right elbow
    {396, 350},  // left wrist
    {244, 350},  // right wrist
    {352, 330},  // left hip
    {288, 330},  // right hip
    {356, 445},  // left knee
    {284, 445},  // right knee
    {358, 560},  // left ankle
    {282, 560},  // right ankle
}};

// Displacement at full extension, in units of the archetype amplitude.
inline std::array<Vec2, kNumKeypoints> motion_direction(Archetype a) {
    std::array<Vec2, kNumKeypoints> d{};
    auto set = [&](K k, double x, double y) { d[index_of(k)] = {x, y}; };
    switch (a) {
        case Archetype::squat:
            for (auto k : {K::nose, K::left_eye, K::right_eye, K::left_ear, K::right_ear,
                           K::left_shoulder, K::right_shoulder, K::left_elbow, K::right_elbow,
                           K::left_wrist, K::right_wrist, K::left_hip, K::right_hip})
                set(k, 0.0, 1.0);
            set(K::left_knee, 0.35, 0.45);
            set(K::right_knee, -0.35, 0.45);
            break;
        case Archetype::raise_hands:
            set(K::left_elbow, 0.12, -0.5);
            set(K::right_elbow, -0.12, -0.5);
            set(K::left_wrist, 0.18, -1.0);
            set(K::right_wrist, -0.18, -1.0);
            set(K::left_shoulder, 0.0, -0.08);
            set(K::right_shoulder, 0.0, -0.08);
            break;
        case Archetype::lift_foot:
            // weight shifts over the standing leg while the other knee comes up
            for (auto k : {K::nose, K::left_eye, K::right_eye, K::left_ear, K::right_ear,
                           K::left_shoulder, K::right_shoulder, K::left_elbow, K::right_elbow,
                           K::left_wrist, K::right_wrist, K::right_hip})
                set(k, -0.15, -0.03);
            set(K::left_hip, -0.1, -0.15);
            set(K::left_knee, 0.05, -0.9);
            set(K::left_ankle, 0.08, -1.0);
            break;
        case Archetype::rotate_neck:
            set(K::nose, 1.0, 0.0);
            set(K::left_eye, 0.9, 0.0);
            set(K::right_eye, 0.9, 0.0);
            set(K::left_ear, 0.5, 0.0);
            set(K::right_ear, 0.7, 0.0);
            set(K::left_shoulder, -0.25, 0.0);
            set(K::right_shoulder, -0.25, 0.0);
            break;
        case Archetype::rotate_waist:
            set(K::left_shoulder, -1.0, 0.15);
            set(K::right_shoulder, 0.6, -0.15);
            set(K::left_elbow, -1.0, 0.15);
            set(K::right_elbow, 0.6, -0.15);
            set(K::left_wrist, -1.0, 0.15);
            set(K::right_wrist, 0.6, -0.15);
            // the head turns with the trunk
            for (auto k : {K::nose, K::left_eye, K::right_eye, K::left_ear, K::right_ear})
                set(k, -0.6, 0.0);
            break;
        case Archetype::shrug:
            for (auto k : {K::left_shoulder, K::right_shoulder, K::left_elbow, K::right_elbow,
                           K::left_wrist, K::right_wrist})
                set(k, 0.0, -1.0);
            for (auto k : {K::nose, K::left_eye, K::right_eye, K::left_ear, K::right_ear})
                set(k, 0.0, -0.35);
            break;
    }
    return d;
}

inline std::array<Vec2, kNumKeypoints> fault_offset(PoseFault f, double magnitude) {
    std::array<Vec2, kNumKeypoints> d{};
    auto set = [&](K k, double x, double y) { d[index_of(k)] = {magnitude * x, magnitude * y}; };
    switch (f) {
        case PoseFault::none:
        case PoseFault::partial_range: break;
        case PoseFault::arms_bent:
            set(K::left_wrist, -70, -60);
            set(K::right_wrist, 70, -60);
            break;
        case PoseFault::arms_abducted:
            set(K::left_elbow, 60, -30);
            set(K::right_elbow, -60, -30);
            set(K::left_wrist, 120, -60);
            set(K::right_wrist, -120, -60);
            break;
        case PoseFault::trunk_lean:
            for (auto k : {K::nose, K::left_eye, K::right_eye, K::left_ear, K::right_ear,
                           K::left_shoulder, K::right_shoulder, K::left_elbow, K::right_elbow,
                           K::left_wrist, K::right_wrist})
                set(k, 60, 8);
            break;
        case PoseFault::knees_bent:
            set(K::left_knee, 40, -15);
            set(K::right_knee, -40, -15);
            break;
        case PoseFault::head_turned:
            set(K::nose, 40, 0);
            set(K::left_eye, 36, 0);
            set(K::right_eye, 36, 0);
            break;
        case PoseFault::shoulders_tilted:
            set(K::left_shoulder, 0, -50);
            set(K::right_shoulder, 0, 50);
            break;
    }
    return d;
}

// Per keypoint, per frame 2-D jitter with marginal standard deviation sigma.
inline std::array<std::vector<Vec2>, kNumKeypoints> correlated_noise(std::size_t frames, std::uint64_t seed,
                                                                    double sigma, double correlation) {
    std::array<std::vector<Vec2>, kNumKeypoints> out;
    for (auto& v : out) v.assign(frames, Vec2{});
    if (sigma <= 0.0) return out;

    std::vector<double> kernel{1.0};
    if (correlation > 0.0) {
        const auto half = static_cast<long>(std::ceil(3.0 * correlation));
        kernel.clear();
        for (long j = -half; j <= half; ++j)
            kernel.push_back(std::exp(-0.5 * static_cast<double>(j * j) / (correlation * correlation)));
    }
    double norm = 0.0;
    for (double c : kernel) norm += c * c;
    const double scale = sigma / std::sqrt(norm);
    const std::size_t pad = kernel.size() - 1;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> white(0.0, 1.0);
    std::vector<double> wx(frames + pad), wy(frames + pad);
    for (auto& v : out) {
        for (std::size_t i = 0; i < wx.size(); ++i) {
            wx[i] = white(rng);
            wy[i] = white(rng);
        }
        for (std::size_t t = 0; t < frames; ++t) {
            double x = 0.0, y = 0.0;
            for (std::size_t j = 0; j < kernel.size(); ++j) {
                x += kernel[j] * wx[t + j];
                y += kernel[j] * wy[t + j];
            }
            v[t] = {scale * x, scale * y};
        }
    }
    return out;
}

// Extension in [0, 1] at frame `t`: every cycle rests, rises along half a
// cosine, holds, and falls back; a final rest closes the sequence.
inline double phase(int t, const MotionArchetype& a) {
    if (t >= a.repetitions * a.cycle_frames()) return 0.0;
    const double half = 0.5 * a.period_frames;
    auto rise = [&](double x) { return 0.5 * (1.0 - std::cos(std::numbers::pi * x / half)); };
    const double x = t % a.cycle_frames() - a.rest_frames;
    if (x <= 0.0) return 0.0;
    if (x <= half) return rise(x);
    if (x <= half + a.hold_frames) return 1.0;
    return rise(x - a.hold_frames);
}

}  // namespace detail

inline void validate(const MotionArchetype& a) {
    if (a.repetitions < 1) throw Error(ErrorKind::validation, "repetitions must be >= 1");
    if (a.period_frames < 4) throw Error(ErrorKind::validation, "period_frames must be >= 4");
    if (a.hold_frames < 0 || a.rest_frames < 0)
        throw Error(ErrorKind::validation, "hold and rest frames must be >= 0");
    if (!(a.amplitude > 0.0) || !std::isfinite(a.amplitude))
        throw Error(ErrorKind::validation, "amplitude must be positive");
    if (!(a.noise_sigma >= 0.0) || !std::isfinite(a.noise_sigma))
        throw Error(ErrorKind::validation, "noise_sigma must be >= 0");
    if (!(a.noise_correlation_frames >= 0.0))
        throw Error(ErrorKind::validation, "noise correlation must be >= 0");
}

// Each moving keypoint follows rest + s(t) * amplitude * direction where s is
// the phase above, so the sequence starts and ends at rest and the
// displacement from frame 0 peaks (plateaus) exactly once per cycle. Jitter of
// noise_sigma is added to every coordinate.
inline SyntheticVideo generate_synthetic(const MotionArchetype& archetype, double fps,
                                         std::uint64_t seed, PoseFault fault = PoseFault::none,
                                         double fault_magnitude = 1.0) {
    validate(archetype);
    if (!(fps > 0.0)) throw Error(ErrorKind::validation, "fps must be positive");

    const auto direction = detail::motion_direction(archetype.name);
    const auto offset = detail::fault_offset(fault, fault_magnitude);
    const double range = fault == PoseFault::partial_range ? 1.0 - 0.6 * fault_magnitude : 1.0;

    const int n = archetype.repetitions * archetype.cycle_frames() + archetype.rest_frames + 1;
    const auto noise = detail::correlated_noise(static_cast<std::size_t>(n), seed, archetype.noise_sigma,
                                                archetype.noise_correlation_frames);

    std::vector<Frame> frames(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        const double s = detail::phase(t, archetype);
        auto& frame = frames[static_cast<std::size_t>(t)];
        frame.index = static_cast<std::size_t>(t);
        for (std::size_t k = 0; k < kNumKeypoints; ++k) {
            Vec2 p = detail::kRestPose[k] + offset[k] +
                     (s * range * archetype.amplitude) * direction[k];
            p = p + noise[k][static_cast<std::size_t>(t)];
            frame.keypoints[k].set_position(p);
        }
    }

    GroundTruth truth{archetype.repetitions, {}};
    for (std::size_t k = 0; k < kNumKeypoints; ++k)
        if (direction[k].x != 0.0 || direction[k].y != 0.0)
            truth.moving_keypoints.push_back(static_cast<KeypointId>(k));

    return {PoseSequence(std::move(frames), fps, "synthetic",
                         std::string(archetype_name(archetype.name))),
            std::move(truth)};
}

// ---------------------------------------------------------------------------
// Corruption injection

struct DriftRun {
    std::size_t start = 0;
    std::size_t length = 1;  // 1..4 frames
    double offset = 40.0;    // pixels
    std::optional<KeypointId> keypoint;  // chosen from the seed when empty
};

struct CorruptionSpec {
    std::size_t spike_count = 0;
    std::vector<DriftRun> drift_runs;
    std::uint64_t seed = 0;
};

enum class CorruptionKind { spike, drift };

struct Corruption {
    std::size_t frame = 0;
    KeypointId keypoint = KeypointId::nose;
    CorruptionKind kind = CorruptionKind::spike;

    friend bool operator==(const Corruption&, const Corruption&) = default;
    friend auto operator<=>(const Corruption&, const Corruption&) = default;
};

struct CorruptedVideo {
    PoseSequence sequence;
    std::vector<Corruption> corruptions;
};

namespace detail {

inline double min_spike_zscore(const std::vector<Frame>& frames, std::size_t k,
                                const std::vector<std::size_t>& spike_frames) {
    const std::size_t n = frames.size() - 1;
    std::vector<double> disp(n);
    for (std::size_t t = 1; t <= n; ++t)
        disp[t - 1] = distance(frames[t].keypoints[k].position(),
                               frames[t - 1].keypoints[k].position());
    double mean = 0.0;
    for (double d : disp) mean += d;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double d : disp) var += (d - mean) * (d - mean);
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (sd == 0.0) return 0.0;
    // smallest |z| over the displacements leading into each spike frame
    double worst = std::numeric_limits<double>::infinity();
    for (auto f : spike_frames) worst = std::min(worst, std::abs(disp[f - 1] - mean) / sd);
    return worst;
}

}  // namespace detail

// Single-frame spikes are sized so that the displacement into each spiked frame
// has |z| > 3 within its keypoint's displacement series. Drift runs shift a
// keypoint by a constant offset for 1..4 consecutive frames.
inline CorruptedVideo inject_corruptions(const PoseSequence& seq, const CorruptionSpec& spec) {
    const std::size_t n = seq.size();
    for (const auto& run : spec.drift_runs) {
        if (run.length < 1 || run.length > 4)
            throw Error(ErrorKind::validation, "drift run length must be within 1..4");
        if (run.start + run.length > n)
            throw Error(ErrorKind::validation, "drift run exceeds sequence bounds");
    }
    if (spec.spike_count > 0 && n < 12)
        throw Error(ErrorKind::validation, "spikes need at least 12 frames to be detectable");

    std::mt19937_64 rng(spec.seed);
    std::vector<Frame> frames = seq.frames();
    std::vector<Corruption> log;
    std::set<std::pair<std::size_t, std::size_t>> touched;

    std::uniform_int_distribution<std::size_t> pick_keypoint(0, kNumKeypoints - 1);
    std::uniform_real_distribution<double> pick_angle(0.0, 2.0 * std::numbers::pi);

    for (const auto& run : spec.drift_runs) {
        const std::size_t k = run.keypoint ? index_of(*run.keypoint) : pick_keypoint(rng);
        const double theta = pick_angle(rng);
        const Vec2 shift{run.offset * std::cos(theta), run.offset * std::sin(theta)};
        for (std::size_t f = run.start; f < run.start + run.length; ++f) {
            if (!touched.insert({f, k}).second)
                throw Error(ErrorKind::validation, "overlapping corruptions");
            auto& kp = frames[f].keypoints[k];
            kp.set_position(kp.position() + shift);
            log.push_back({f, static_cast<KeypointId>(k), CorruptionKind::drift});
        }
    }

    if (spec.spike_count > 0) {
        // Spikes sit at interior frames, at least 3 frames away from any other
        // corruption of the same keypoint.
        std::uniform_int_distribution<std::size_t> pick_frame(1, n - 2);
        std::vector<std::pair<std::size_t, std::size_t>> spikes;  // (frame, keypoint)
        std::vector<Vec2> directions;
        std::size_t attempts = 0;
        while (spikes.size() < spec.spike_count) {
            if (++attempts > 100000) throw Error(ErrorKind::validation, "cannot place spikes");
            const std::size_t f = pick_frame(rng);
            const std::size_t k = pick_keypoint(rng);
            bool clear = true;
            for (const auto& [tf, tk] : touched)
                if (tk == k && (tf + 3 > f && f + 3 > tf)) clear = false;
            if (!clear) continue;
            touched.insert({f, k});
            spikes.emplace_back(f, k);
            const double theta = pick_angle(rng);
            directions.push_back({std::cos(theta), std::sin(theta)});
        }

        const auto base = frames;
        double magnitude = 50.0;
        bool ok = false;
        for (int iter = 0; iter < 40 && !ok; ++iter) {
            frames = base;
            for (std::size_t i = 0; i < spikes.size(); ++i) {
                auto& kp = frames[spikes[i].first].keypoints[spikes[i].second];
                kp.set_position(kp.position() + magnitude * directions[i]);
            }
            ok = true;
            for (std::size_t k = 0; k < kNumKeypoints && ok; ++k) {
                std::vector<std::size_t> at;
                for (const auto& [f, kk] : spikes)
                    if (kk == k) at.push_back(f);
                if (!at.empty() && detail::min_spike_zscore(frames, k, at) <= 3.0) ok = false;
            }
            if (!ok) magnitude *= 1.5;
        }
        if (!ok) throw Error(ErrorKind::validation, "too many spikes for |z| > 3 on one keypoint");
        for (const auto& [f, k] : spikes)
            log.push_back({f, static_cast<KeypointId>(k), CorruptionKind::spike});
    }

    std::sort(log.begin(), log.end());
    return {with_frames(seq, std::move(frames)), std::move(log)};
}

}  // namespace rehab
