#pragma once

// Ingestion document:
//
//   {"action_id":"squat","fps":10.0,"subject_id":"p01","frames":[
//   [[x,y,conf],[x,y],... 17 entries in keypoint order],
//   ...
//   ]}
//
// `fps` defaults to 10 when absent. serialize_sequence emits exactly this layout
// (one frame per line), so parse followed by serialize reproduces a canonical
// document byte for byte.

#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "rehab/error.hpp"
#include "rehab/pose.hpp"

namespace rehab {

namespace detail {

inline double finite_number(const nlohmann::json& j, std::string_view what) {
    if (!j.is_number()) throw Error(ErrorKind::parse, std::string(what) + " is not a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw Error(ErrorKind::validation, std::string(what) + " is not finite");
    return v;
}

inline std::string optional_string(const nlohmann::json& doc, const char* key) {
    if (!doc.contains(key)) return {};
    if (!doc[key].is_string()) throw Error(ErrorKind::parse, std::string(key) + " must be a string");
    return doc[key].get<std::string>();
}

inline std::string number_text(double v) { return nlohmann::json(v).dump(); }

}  // namespace detail

inline PoseSequence sequence_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw Error(ErrorKind::parse, "sequence document must be an object");

    double fps = kDefaultFps;
    if (doc.contains("fps")) fps = detail::finite_number(doc["fps"], "fps");
    if (fps <= 0.0) throw Error(ErrorKind::validation, "fps must be positive");

    if (!doc.contains("frames") || !doc["frames"].is_array())
        throw Error(ErrorKind::parse, "missing frames array");

    std::vector<Frame> frames;
    frames.reserve(doc["frames"].size());
    for (const auto& jf : doc["frames"]) {
        if (!jf.is_array()) throw Error(ErrorKind::parse, "frame must be an array");
        if (jf.size() != kNumKeypoints)
            throw Error(ErrorKind::validation,
                        "keypoint count " + std::to_string(jf.size()) + " in frame " +
                            std::to_string(frames.size()) + ", expected 17");
        Frame frame;
        frame.index = frames.size();
        for (std::size_t k = 0; k < kNumKeypoints; ++k) {
            const auto& jk = jf[k];
            if (!jk.is_array() || jk.size() < 2 || jk.size() > 3)
                throw Error(ErrorKind::parse, "keypoint must be [x, y] or [x, y, confidence]");
            auto& kp = frame.keypoints[k];
            kp.x = detail::finite_number(jk[0], "x");
            kp.y = detail::finite_number(jk[1], "y");
            if (jk.size() == 3) kp.confidence = detail::finite_number(jk[2], "confidence");
        }
        frames.push_back(frame);
    }
    if (frames.empty()) throw Error(ErrorKind::validation, "sequence has no frames");

    return PoseSequence(std::move(frames), fps, detail::optional_string(doc, "subject_id"),
                        detail::optional_string(doc, "action_id"));
}

inline PoseSequence parse_sequence(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("malformed sequence document: ") + e.what());
    }
    return sequence_from_json(doc);
}

inline std::string serialize_sequence(const PoseSequence& seq) {
    std::ostringstream out;
    out << "{\"action_id\":" << nlohmann::json(seq.action_id()).dump()
        << ",\"fps\":" << detail::number_text(seq.fps())
        << ",\"subject_id\":" << nlohmann::json(seq.subject_id()).dump() << ",\"frames\":[\n";
    for (std::size_t f = 0; f < seq.size(); ++f) {
        out << '[';
        const auto& kps = seq[f].keypoints;
        for (std::size_t k = 0; k < kNumKeypoints; ++k) {
            if (k) out << ',';
            out << '[' << detail::number_text(kps[k].x) << ',' << detail::number_text(kps[k].y);
            if (kps[k].confidence) out << ',' << detail::number_text(*kps[k].confidence);
            out << ']';
        }
        out << ']' << (f + 1 < seq.size() ? ",\n" : "\n");
    }
    out << "]}\n";
    return out.str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorKind::io, "write failed for " + path);
}

inline PoseSequence load_sequence(const std::string& path) { return parse_sequence(read_file(path)); }

}  // namespace rehab
