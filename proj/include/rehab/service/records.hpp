#pragma once

// Records kept by the monitor service and their JSON forms. Every record is
// immutable once written; derived state is recomputed from them.

#include <string>
#include <string_view>

#include "json.hpp"
#include "rehab/error.hpp"
#include "rehab/pipeline.hpp"
#include "rehab/service/calendar.hpp"
#include "rehab/similarity.hpp"

namespace rehab::service {

enum class Intensity { light, medium, daily };

inline constexpr int required_checkpoints(Intensity i) {
    switch (i) {
        case Intensity::light: return 3;
        case Intensity::medium: return 5;
        case Intensity::daily: return 7;
    }
    return 7;
}

inline std::string_view intensity_name(Intensity i) {
    switch (i) {
        case Intensity::light: return "light";
        case Intensity::medium: return "medium";
        case Intensity::daily: return "daily";
    }
    return "daily";
}

inline Intensity parse_intensity(std::string_view s) {
    if (s == "light") return Intensity::light;
    if (s == "medium") return Intensity::medium;
    if (s == "daily") return Intensity::daily;
    throw Error(ErrorKind::validation, "intensity must be light, medium or daily");
}

struct Patient {
    std::string patient_id;
    std::string name;
};

struct ActionAssignment {
    std::string patient_id;
    std::string action_id;
    Intensity intensity = Intensity::daily;
    Date start_date{};
    Date visit_date{};
    int sets_per_checkpoint = 3;
    int reps_per_set = 10;
    std::string sample_ref;  // stored sequence, relative to the store
    CalibrationProfile profile;

    int required() const { return required_checkpoints(intensity); }
};

struct UploadRecord {
    std::string upload_id;
    std::string patient_id;
    std::string action_id;
    Date date{};
    std::string sequence_ref;
    DetectionResult result;
};

struct Notification {
    std::string patient_id;
    std::string action_id;
    Date date{};
    double completion_rate = 0.0;  // through the previous day, percent
};

struct LedgerEntry {
    Date date{};
    int sets_completed = 0;
    bool checkpoint_earned = false;
};

namespace detail {

inline const nlohmann::json& field(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::parse, std::string("missing field ") + key);
    return j[key];
}

inline std::string string_field(const nlohmann::json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) throw Error(ErrorKind::parse, std::string(key) + " must be a string");
    return v.get<std::string>();
}

inline int positive_int(const nlohmann::json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j[key];
    if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 1000000)
        throw Error(ErrorKind::validation, std::string(key) + " must be a positive integer");
    return v.get<int>();
}

}  // namespace detail

inline nlohmann::json to_json(const Patient& p) {
    return {{"patient_id", p.patient_id}, {"name", p.name}};
}

inline Patient patient_from_json(const nlohmann::json& j) {
    Patient p{detail::string_field(j, "patient_id"), j.contains("name") ? detail::string_field(j, "name") : ""};
    if (p.patient_id.empty()) throw Error(ErrorKind::validation, "patient_id must not be empty");
    return p;
}

inline nlohmann::json to_json(const ActionAssignment& a) {
    return {{"patient_id", a.patient_id},
            {"action_id", a.action_id},
            {"intensity", intensity_name(a.intensity)},
            {"required_checkpoints", a.required()},
            {"start_date", format_date(a.start_date)},
            {"visit_date", format_date(a.visit_date)},
            {"sets_per_checkpoint", a.sets_per_checkpoint},
            {"reps_per_set", a.reps_per_set},
            {"sample_ref", a.sample_ref},
            {"profile", profile_to_json(a.profile)}};
}

// Reads everything except the sample, which travels separately.
inline ActionAssignment assignment_from_json(const nlohmann::json& j) {
    ActionAssignment a;
    if (j.contains("patient_id")) a.patient_id = detail::string_field(j, "patient_id");
    a.action_id = detail::string_field(j, "action_id");
    if (a.action_id.empty()) throw Error(ErrorKind::validation, "action_id must not be empty");
    a.intensity = parse_intensity(detail::string_field(j, "intensity"));
    a.start_date = parse_date(detail::string_field(j, "start_date"));
    a.visit_date = parse_date(detail::string_field(j, "visit_date"));
    a.sets_per_checkpoint = detail::positive_int(j, "sets_per_checkpoint", 3);
    a.reps_per_set = detail::positive_int(j, "reps_per_set", 10);
    if (j.contains("sample_ref")) a.sample_ref = detail::string_field(j, "sample_ref");
    a.profile = profile_from_json(detail::field(j, "profile"));
    return a;
}

inline nlohmann::json to_json(const DetectionResult& r) {
    return {{"score", r.score},
            {"similar", r.similar},
            {"score_indeterminate", r.score_indeterminate},
            {"repetitions", r.repetitions},
            {"count_indeterminate", r.count_indeterminate},
            {"outlier_repairs", r.outlier_repairs},
            {"extrapolation_repairs", r.extrapolation_repairs}};
}

inline DetectionResult detection_from_json(const nlohmann::json& j) {
    try {
        return {j.at("score").get<double>(),
                j.at("similar").get<bool>(),
                j.at("score_indeterminate").get<bool>(),
                j.at("repetitions").get<int>(),
                j.at("count_indeterminate").get<bool>(),
                j.at("outlier_repairs").get<std::size_t>(),
                j.at("extrapolation_repairs").get<std::size_t>()};
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed detection result: ") + e.what());
    }
}

inline nlohmann::json to_json(const UploadRecord& u) {
    return {{"upload_id", u.upload_id},   {"patient_id", u.patient_id},     {"action_id", u.action_id},
            {"date", format_date(u.date)}, {"sequence_ref", u.sequence_ref}, {"result", to_json(u.result)}};
}

inline UploadRecord upload_from_json(const nlohmann::json& j) {
    return {detail::string_field(j, "upload_id"),    detail::string_field(j, "patient_id"),
            detail::string_field(j, "action_id"),    parse_date(detail::string_field(j, "date")),
            detail::string_field(j, "sequence_ref"), detection_from_json(detail::field(j, "result"))};
}

inline nlohmann::json to_json(const Notification& n) {
    return {{"patient_id", n.patient_id},
            {"action_id", n.action_id},
            {"date", format_date(n.date)},
            {"completion_rate", n.completion_rate}};
}

inline Notification notification_from_json(const nlohmann::json& j) {
    const auto& rate = detail::field(j, "completion_rate");
    if (!rate.is_number()) throw Error(ErrorKind::parse, "completion_rate must be a number");
    return {detail::string_field(j, "patient_id"), detail::string_field(j, "action_id"),
            parse_date(detail::string_field(j, "date")), rate.get<double>()};
}

inline nlohmann::json to_json(const LedgerEntry& e) {
    return {{"date", format_date(e.date)},
            {"sets_completed", e.sets_completed},
            {"checkpoint_earned", e.checkpoint_earned}};
}

}  // namespace rehab::service
