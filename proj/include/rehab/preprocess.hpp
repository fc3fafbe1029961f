#pragma once

// Repair of detector errors in keypoint trajectories.
//
// Stage 1 flags single-frame jumps whose displacement is a Z-score outlier and
// replaces the offending position by the midpoint of its neighbours. Stage 2
// looks at every displacement that exceeds T times the keypoint's largest
// displacement and decides, from the three displacements on either side,
// whether it is genuine motion (starting, finishing or ongoing) or a detector
// error. Errors are replaced by linear extrapolation from the two preceding
// frames.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rehab/error.hpp"
#include "rehab/pose.hpp"

namespace rehab {

// disp[k][t - 1] is the distance keypoint k travelled between frame t - 1
// (secondary) and frame t (primary).
class DisplacementTable {
public:
    DisplacementTable() = default;
    explicit DisplacementTable(std::size_t frames) {
        for (auto& d : disp_) d.assign(frames > 0 ? frames - 1 : 0, 0.0);
    }

    std::size_t size() const noexcept { return disp_[0].size(); }
    bool empty() const noexcept { return size() == 0; }

    // t is the primary frame index, 1 <= t <= size().
    double at(std::size_t keypoint, std::size_t t) const { return disp_[keypoint][t - 1]; }
    double& at(std::size_t keypoint, std::size_t t) { return disp_[keypoint][t - 1]; }

    const std::vector<double>& series(std::size_t keypoint) const { return disp_[keypoint]; }

private:
    std::array<std::vector<double>, kNumKeypoints> disp_;
};

inline DisplacementTable displacements(const PoseSequence& seq) {
    if (seq.size() < 2) throw Error(ErrorKind::validation, "displacements need at least 2 frames");
    DisplacementTable table(seq.size());
    for (std::size_t t = 1; t < seq.size(); ++t)
        for (std::size_t k = 0; k < kNumKeypoints; ++k)
            table.at(k, t) = distance(seq.position(t, k), seq.position(t - 1, k));
    return table;
}

inline std::array<double, kNumKeypoints> max_displacements(const DisplacementTable& table) {
    if (table.empty()) throw Error(ErrorKind::validation, "empty displacement table");
    std::array<double, kNumKeypoints> m{};
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
        const auto& s = table.series(k);
        m[k] = *std::max_element(s.begin(), s.end());
    }
    return m;
}

struct PreprocessParams {
    double z_threshold = 3.0;
    // Fraction of a keypoint's maximum displacement above which a displacement is large.
    double displacement_threshold = 0.2;
    static constexpr std::size_t window = 3;
    // Longest run of consecutive frames one keypoint may be extrapolated over.
    std::size_t max_run = 4;

    void validate() const {
        if (!(z_threshold > 0.0)) throw Error(ErrorKind::validation, "z threshold must be positive");
        if (!(displacement_threshold > 0.0 && displacement_threshold <= 1.0))
            throw Error(ErrorKind::validation, "displacement threshold must lie in (0, 1]");
        if (max_run < 1) throw Error(ErrorKind::validation, "max_run must be positive");
    }
};

enum class RepairMethod { outlier_average, extrapolation };

inline const char* method_name(RepairMethod m) {
    return m == RepairMethod::outlier_average ? "outlier_average" : "extrapolation";
}

struct RepairEntry {
    std::size_t frame = 0;
    KeypointId keypoint = KeypointId::nose;
    RepairMethod method = RepairMethod::outlier_average;
    Vec2 before;
    Vec2 after;

    friend bool operator==(const RepairEntry&, const RepairEntry&) = default;
};

using RepairLog = std::vector<RepairEntry>;

struct Repaired {
    PoseSequence sequence;
    RepairLog log;
};

// Population mean and standard deviation.
inline std::pair<double, double> mean_and_sd(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

inline Repaired remove_outliers(const PoseSequence& seq, const PreprocessParams& params = {}) {
    params.validate();
    if (seq.size() < 2) throw Error(ErrorKind::validation, "outlier removal needs at least 2 frames");

    const auto table = displacements(seq);
    const std::size_t last = seq.size() - 1;

    // Z-scores come from the untouched table; repairs then run in frame order
    // against the current (possibly already repaired) neighbours.
    std::array<std::vector<bool>, kNumKeypoints> outlier;
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
        const auto& s = table.series(k);
        const auto [mean, sd] = mean_and_sd(s);
        outlier[k].assign(s.size(), false);
        if (sd == 0.0) continue;
        for (std::size_t i = 0; i < s.size(); ++i)
            outlier[k][i] = std::abs((s[i] - mean) / sd) > params.z_threshold;
    }

    std::vector<Frame> frames = seq.frames();
    RepairLog log;
    for (std::size_t t = 1; t <= last; ++t) {
        for (std::size_t k = 0; k < kNumKeypoints; ++k) {
            if (!outlier[k][t - 1]) continue;
            const Vec2 before = frames[t].keypoints[k].position();
            const Vec2 prev = frames[t - 1].keypoints[k].position();
            // The final frame has no successor; fall back to the secondary frame.
            const Vec2 after =
                t < last ? 0.5 * (prev + frames[t + 1].keypoints[k].position()) : prev;
            if (after == before) continue;
            frames[t].keypoints[k].set_position(after);
            log.push_back({t, static_cast<KeypointId>(k), RepairMethod::outlier_average, before, after});
        }
    }
    return {with_frames(seq, std::move(frames)), std::move(log)};
}

// Classification of one large displacement from its surrounding context.
enum class MotionContext { starting, finishing, ongoing, erroneous };

// The large displacements in the window (three before, the current one, three
// after) must form one unbroken run through the current frame that carries on
// past the window edge: past the end (starting), past the start (finishing) or
// both (ongoing). A run that begins and ends inside the window, or a second run,
// is a burst too short to be real motion. All-small-before/all-large-after and
// its mirror are the strict cases; the run may also begin one or two frames
// before the current one, which is where smooth motion ramps up.
inline MotionContext classify_context(const std::array<bool, 3>& prior_large,
                                      const std::array<bool, 3>& next_large) {
    std::size_t before = 0;  // unbroken large displacements just before
    while (before < 3 && prior_large[2 - before]) ++before;
    std::size_t after = 0;
    while (after < 3 && next_large[after]) ++after;
    for (std::size_t i = before; i < 3; ++i)
        if (prior_large[2 - i]) return MotionContext::erroneous;
    for (std::size_t i = after; i < 3; ++i)
        if (next_large[i]) return MotionContext::erroneous;
    if (before == 3 && after == 3) return MotionContext::ongoing;
    if (after == 3) return MotionContext::starting;
    if (before == 3) return MotionContext::finishing;
    return MotionContext::erroneous;
}

// The maximum displacement per keypoint is fixed from the input table. Each
// displacement is evaluated on the current coordinates, so once a frame has
// been extrapolated the jump into the next frame is measured from the repaired
// position; that is what lets runs of consecutive bad frames get repaired one
// after another. An extrapolation is only applied when it shortens the jump
// into the frame, and at most max_run frames in a row are extrapolated, so
// jitter on a still keypoint cannot start a runaway chain.
inline Repaired repair_temporal(const PoseSequence& seq, const PreprocessParams& params = {}) {
    params.validate();
    if (seq.size() < 2) throw Error(ErrorKind::validation, "temporal repair needs at least 2 frames");

    constexpr std::size_t w = PreprocessParams::window;
    const std::size_t n = seq.size();
    const auto max_disp = max_displacements(displacements(seq));

    std::vector<Frame> frames = seq.frames();
    RepairLog log;
    if (n < 2 * w + 2) return {with_frames(seq, std::move(frames)), std::move(log)};

    auto disp = [&](std::size_t k, std::size_t t) {
        return distance(frames[t].keypoints[k].position(), frames[t - 1].keypoints[k].position());
    };
    std::array<std::size_t, kNumKeypoints> run{};  // consecutive extrapolated frames ending at t - 1

    for (std::size_t t = w + 1; t + w <= n - 1; ++t) {
        for (std::size_t k = 0; k < kNumKeypoints; ++k) {
            const std::size_t previous_run = std::exchange(run[k], 0);
            const double limit = params.displacement_threshold * max_disp[k];
            auto large = [&](std::size_t tt) { return disp(k, tt) > limit; };
            if (!large(t)) continue;

            std::array<bool, 3> prior{}, next{};
            for (std::size_t i = 0; i < w; ++i) {
                prior[i] = large(t - w + i);
                next[i] = large(t + 1 + i);
            }
            if (classify_context(prior, next) != MotionContext::erroneous) continue;
            if (previous_run >= params.max_run) continue;

            const Vec2 before = frames[t].keypoints[k].position();
            const Vec2 prev = frames[t - 1].keypoints[k].position();
            const Vec2 after = 2.0 * prev - frames[t - 2].keypoints[k].position();
            if (!(distance(after, prev) < distance(before, prev))) continue;
            frames[t].keypoints[k].set_position(after);
            log.push_back({t, static_cast<KeypointId>(k), RepairMethod::extrapolation, before, after});
            run[k] = previous_run + 1;
        }
    }
    return {with_frames(seq, std::move(frames)), std::move(log)};
}

inline Repaired preprocess(const PoseSequence& seq, const PreprocessParams& params = {}) {
    auto stage1 = remove_outliers(seq, params);
    auto stage2 = repair_temporal(stage1.sequence, params);
    RepairLog log = std::move(stage1.log);
    log.insert(log.end(), stage2.log.begin(), stage2.log.end());
    return {std::move(stage2.sequence), std::move(log)};
}

// Re-applies a log to the original sequence.
inline PoseSequence replay_repairs(const PoseSequence& original, const RepairLog& log) {
    std::vector<Frame> frames = original.frames();
    for (const auto& e : log) {
        if (e.frame >= frames.size()) throw Error(ErrorKind::validation, "repair frame out of range");
        frames[e.frame][e.keypoint].set_position(e.after);
    }
    return with_frames(original, std::move(frames));
}

inline std::string format_repair_log(const RepairLog& log) {
    std::ostringstream out;
    out << "# frame keypoint method old_x old_y new_x new_y\n";
    char buf[160];
    for (const auto& e : log) {
        std::snprintf(buf, sizeof buf, "%zu %s %s %.17g %.17g %.17g %.17g\n", e.frame,
                      std::string(name_of(e.keypoint)).c_str(), method_name(e.method), e.before.x,
                      e.before.y, e.after.x, e.after.y);
        out << buf;
    }
    return out.str();
}

}  // namespace rehab
