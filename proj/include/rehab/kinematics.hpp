#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rehab/error.hpp"
#include "rehab/pose.hpp"

namespace rehab {

// Angle in [0, pi] between two 2-D vectors; nullopt if either has zero length.
inline std::optional<double> angle_between(Vec2 a, Vec2 b) {
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return std::nullopt;
    const double c = (a.x * b.x + a.y * b.y) / (na * nb);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

struct Midpoint {
    KeypointId a;
    KeypointId b;
    friend bool operator==(const Midpoint&, const Midpoint&) = default;
};

using PointSpec = std::variant<KeypointId, Midpoint>;

inline Vec2 resolve(const PointSpec& p, const Frame& frame) {
    if (const auto* id = std::get_if<KeypointId>(&p)) return frame[*id].position();
    const auto& m = std::get<Midpoint>(p);
    return 0.5 * (frame[m.a].position() + frame[m.b].position());
}

struct VectorSpec {
    PointSpec origin;
    PointSpec tip;
    Vec2 evaluate(const Frame& f) const { return resolve(tip, f) - resolve(origin, f); }
    friend bool operator==(const VectorSpec&, const VectorSpec&) = default;
};

struct AngleDef {
    std::string name;
    VectorSpec a;
    VectorSpec b;

    std::optional<double> evaluate(const Frame& f) const {
        return angle_between(a.evaluate(f), b.evaluate(f));
    }
    friend bool operator==(const AngleDef&, const AngleDef&) = default;
};

inline std::vector<AngleDef> default_angle_defs() {
    using K = KeypointId;
    auto joint = [](const char* name, K at, K p, K q) {
        return AngleDef{name, {at, p}, {at, q}};
    };
    const Midpoint mid_shoulder{K::left_shoulder, K::right_shoulder};
    const Midpoint mid_hip{K::left_hip, K::right_hip};
    return {
        joint("left_elbow", K::left_elbow, K::left_shoulder, K::left_wrist),
        joint("right_elbow", K::right_elbow, K::right_shoulder, K::right_wrist),
        joint("left_shoulder", K::left_shoulder, K::left_elbow, K::left_hip),
        joint("right_shoulder", K::right_shoulder, K::right_elbow, K::right_hip),
        joint("left_hip", K::left_hip, K::left_shoulder, K::left_knee),
        joint("right_hip", K::right_hip, K::right_shoulder, K::right_knee),
        joint("left_knee", K::left_knee, K::left_hip, K::left_ankle),
        joint("right_knee", K::right_knee, K::right_hip, K::right_ankle),
        AngleDef{"neck", {mid_shoulder, K::nose}, {mid_shoulder, mid_hip}},
        joint("head_yaw", K::nose, K::left_ear, K::right_ear),
        AngleDef{"trunk_twist", {K::left_shoulder, K::right_shoulder}, {K::left_hip, K::right_hip}},
    };
}

// values[angle][frame]; NaN marks a frame where the angle is undefined.
struct AngleSeries {
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;

    std::size_t angles() const noexcept { return values.size(); }
    std::size_t frames() const noexcept { return values.empty() ? 0 : values[0].size(); }
    static bool missing(double v) { return std::isnan(v); }
};

inline AngleSeries extract_angles(const PoseSequence& seq, const std::vector<AngleDef>& defs) {
    AngleSeries out;
    out.names.reserve(defs.size());
    out.values.assign(defs.size(), std::vector<double>(seq.size()));
    for (std::size_t a = 0; a < defs.size(); ++a) {
        out.names.push_back(defs[a].name);
        for (std::size_t f = 0; f < seq.size(); ++f)
            out.values[a][f] =
                defs[a].evaluate(seq[f]).value_or(std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Catalogue documents: a JSON array of {"name", "a": [origin, tip], "b": [origin, tip]}
// where a point is a keypoint index, a keypoint name, or {"mid": [p, q]}.

namespace detail {

inline KeypointId keypoint_from_json(const nlohmann::json& j) {
    if (j.is_number_integer()) {
        const auto v = j.get<long long>();
        if (v < 0 || v >= static_cast<long long>(kNumKeypoints))
            throw Error(ErrorKind::validation, "keypoint index out of range");
        return static_cast<KeypointId>(v);
    }
    if (j.is_string()) {
        if (auto id = keypoint_from_name(j.get<std::string>())) return *id;
        throw Error(ErrorKind::validation, "unknown keypoint name " + j.dump());
    }
    throw Error(ErrorKind::parse, "keypoint must be an index or a name");
}

inline PointSpec point_from_json(const nlohmann::json& j) {
    if (j.is_object()) {
        if (!j.contains("mid") || !j["mid"].is_array() || j["mid"].size() != 2)
            throw Error(ErrorKind::parse, "midpoint must be {\"mid\": [p, q]}");
        return Midpoint{keypoint_from_json(j["mid"][0]), keypoint_from_json(j["mid"][1])};
    }
    return keypoint_from_json(j);
}

inline nlohmann::json point_to_json(const PointSpec& p) {
    if (const auto* id = std::get_if<KeypointId>(&p)) return index_of(*id);
    const auto& m = std::get<Midpoint>(p);
    return nlohmann::json{{"mid", {index_of(m.a), index_of(m.b)}}};
}

inline VectorSpec vector_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorKind::parse, "vector must be [origin, tip]");
    return {point_from_json(j[0]), point_from_json(j[1])};
}

}  // namespace detail

inline std::vector<AngleDef> angle_defs_from_json(const nlohmann::json& doc) {
    if (!doc.is_array() || doc.empty()) throw Error(ErrorKind::parse, "angle catalogue must be a non-empty array");
    std::vector<AngleDef> defs;
    for (const auto& e : doc) {
        if (!e.is_object() || !e.contains("name") || !e["name"].is_string() || !e.contains("a") ||
            !e.contains("b"))
            throw Error(ErrorKind::parse, "angle entry needs name, a and b");
        defs.push_back({e["name"].get<std::string>(), detail::vector_from_json(e["a"]),
                        detail::vector_from_json(e["b"])});
    }
    return defs;
}

inline nlohmann::json angle_defs_to_json(const std::vector<AngleDef>& defs) {
    auto out = nlohmann::json::array();
    for (const auto& d : defs)
        out.push_back({{"name", d.name},
                       {"a", {detail::point_to_json(d.a.origin), detail::point_to_json(d.a.tip)}},
                       {"b", {detail::point_to_json(d.b.origin), detail::point_to_json(d.b.tip)}}});
    return out;
}

}  // namespace rehab
