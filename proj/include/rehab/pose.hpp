#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rehab/error.hpp"

namespace rehab {

inline constexpr std::size_t kNumKeypoints = 17;

// COCO keypoint order as emitted by top-down pose estimators.
enum class KeypointId : std::size_t {
    nose = 0,
    left_eye,
    right_eye,
    left_ear,
    right_ear,
    left_shoulder,
    right_shoulder,
    left_elbow,
    right_elbow,
    left_wrist,
    right_wrist,
    left_hip,
    right_hip,
    left_knee,
    right_knee,
    left_ankle,
    right_ankle,
};

inline constexpr std::array<std::string_view, kNumKeypoints> kKeypointNames = {
    "nose",          "left_eye",       "right_eye",  "left_ear",    "right_ear",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow", "left_wrist",
    "right_wrist",   "left_hip",       "right_hip",  "left_knee",   "right_knee",
    "left_ankle",    "right_ankle",
};

constexpr std::size_t index_of(KeypointId id) { return static_cast<std::size_t>(id); }

constexpr std::string_view name_of(KeypointId id) { return kKeypointNames[index_of(id)]; }

inline std::optional<KeypointId> keypoint_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kNumKeypoints; ++i) {
        if (kKeypointNames[i] == name) return static_cast<KeypointId>(i);
    }
    return std::nullopt;
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend bool operator==(Vec2, Vec2) = default;

    double norm() const { return std::hypot(x, y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    // Carried through from the detector; the pipeline never reads it.
    std::optional<double> confidence;

    Vec2 position() const { return {x, y}; }
    void set_position(Vec2 p) {
        x = p.x;
        y = p.y;
    }

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

struct Frame {
    std::size_t index = 0;
    std::array<Keypoint, kNumKeypoints> keypoints{};

    const Keypoint& operator[](KeypointId id) const { return keypoints[index_of(id)]; }
    Keypoint& operator[](KeypointId id) { return keypoints[index_of(id)]; }

    friend bool operator==(const Frame&, const Frame&) = default;
};

inline constexpr double kDefaultFps = 10.0;

// Ordered frames of one video. Validated on construction and immutable afterwards.
class PoseSequence {
public:
    explicit PoseSequence(std::vector<Frame> frames, double fps = kDefaultFps,
                          std::string subject_id = {}, std::string action_id = {})
        : frames_(std::move(frames)),
          fps_(fps),
          subject_id_(std::move(subject_id)),
          action_id_(std::move(action_id)) {
        validate();
    }

    const std::vector<Frame>& frames() const noexcept { return frames_; }
    std::size_t size() const noexcept { return frames_.size(); }
    double fps() const noexcept { return fps_; }
    const std::string& subject_id() const noexcept { return subject_id_; }
    const std::string& action_id() const noexcept { return action_id_; }

    const Frame& operator[](std::size_t i) const { return frames_[i]; }
    Vec2 position(std::size_t frame, std::size_t keypoint) const {
        return frames_[frame].keypoints[keypoint].position();
    }

    friend bool operator==(const PoseSequence&, const PoseSequence&) = default;

private:
    void validate() const {
        if (frames_.empty()) throw Error(ErrorKind::validation, "sequence has no frames");
        if (!(fps_ > 0.0) || !std::isfinite(fps_))
            throw Error(ErrorKind::validation, "fps must be a positive finite number");
        for (std::size_t f = 0; f < frames_.size(); ++f) {
            if (f > 0 && frames_[f].index <= frames_[f - 1].index)
                throw Error(ErrorKind::validation, "frame indices must be strictly increasing");
            for (const auto& kp : frames_[f].keypoints) {
                if (!std::isfinite(kp.x) || !std::isfinite(kp.y))
                    throw Error(ErrorKind::validation,
                                "non-finite coordinate in frame " + std::to_string(f));
                if (kp.confidence && !(*kp.confidence >= 0.0 && *kp.confidence <= 1.0))
                    throw Error(ErrorKind::validation,
                                "confidence outside [0,1] in frame " + std::to_string(f));
            }
        }
    }

    std::vector<Frame> frames_;
    double fps_;
    std::string subject_id_;
    std::string action_id_;
};

// Copy of `seq` with frames replaced; metadata preserved.
inline PoseSequence with_frames(const PoseSequence& seq, std::vector<Frame> frames) {
    return PoseSequence(std::move(frames), seq.fps(), seq.subject_id(), seq.action_id());
}

}  // namespace rehab
