#pragma once

// Pose similarity against a reference (therapist) recording.
//
// Every joint angle's values over time are binned into a histogram over
// [0, pi]. The patient histogram P is compared with the reference histogram Q
// through D(P || Q) = sum P ln(P / Q). A per-angle upper bound u, learned as the
// largest divergence seen on known-incorrect recordings, maps a divergence d to
// max(100 - 100 d / u, 0), and the per-angle scores are combined with a
// harmonic mean so that a single badly performed joint drags the total down.

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rehab/error.hpp"
#include "rehab/kinematics.hpp"
#include "rehab/pose.hpp"

namespace rehab {

struct SimilarityParams {
    std::size_t bins = 18;
    double epsilon = 1e-6;
    double decision_threshold = 50.0;

    void validate() const {
        if (bins < 1) throw Error(ErrorKind::validation, "bin count must be positive");
        if (!(epsilon > 0.0)) throw Error(ErrorKind::validation, "epsilon must be positive");
        if (!(decision_threshold >= 0.0 && decision_threshold <= 100.0))
            throw Error(ErrorKind::validation, "decision threshold must lie in [0, 100]");
    }
};

struct AngleDistribution {
    std::vector<double> mass;
    std::size_t bins() const noexcept { return mass.size(); }
};

inline std::size_t bin_of(double angle, std::size_t bins) {
    const double pos = angle / std::numbers::pi * static_cast<double>(bins);
    if (!(pos > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(pos), bins - 1);
}

// Equal-width histogram over [0, pi] with epsilon added to every bin before
// renormalising. Missing (NaN) values are skipped; nullopt if none remain.
inline std::optional<AngleDistribution> histogram(std::span<const double> series,
                                                  std::size_t bins = 18, double epsilon = 1e-6) {
    if (bins < 1) throw Error(ErrorKind::validation, "bin count must be positive");
    std::vector<double> counts(bins, 0.0);
    std::size_t used = 0;
    for (double v : series) {
        if (std::isnan(v)) continue;
        counts[bin_of(v, bins)] += 1.0;
        ++used;
    }
    if (used == 0) return std::nullopt;

    double total = 0.0;
    for (auto& c : counts) {
        c = c / static_cast<double>(used) + epsilon;
        total += c;
    }
    for (auto& c : counts) c /= total;
    return AngleDistribution{std::move(counts)};
}

// D(p || q) in nats.
inline double kl_divergence(const AngleDistribution& p, const AngleDistribution& q) {
    if (p.bins() != q.bins()) throw Error(ErrorKind::validation, "bin count mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.bins(); ++i) {
        if (p.mass[i] > 0.0) d += p.mass[i] * std::log(p.mass[i] / q.mass[i]);
    }
    return std::max(d, 0.0);
}

inline constexpr double kMinUpperBound = 1e-12;

// nullopt when u is too small for the angle to discriminate anything.
inline std::optional<double> angle_score(double d, double u) {
    if (u <= kMinUpperBound) return std::nullopt;
    return std::max(100.0 - 100.0 * d / u, 0.0);
}

inline double harmonic_mean(std::span<const double> xs) {
    if (xs.empty()) throw Error(ErrorKind::validation, "harmonic mean of an empty list");
    double inv = 0.0;
    for (double x : xs) {
        if (x < 0.0) throw Error(ErrorKind::validation, "harmonic mean needs non-negative values");
        if (x == 0.0) return 0.0;
        inv += 1.0 / x;
    }
    const double h = static_cast<double>(xs.size()) / inv;
    // Keep the mean inside [min, max] despite rounding in the reciprocals.
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    return std::clamp(h, *lo, *hi);
}

struct CalibrationProfile {
    std::string action_id;
    std::size_t calibration_set_size = 0;
    std::size_t bins = 18;
    double epsilon = 1e-6;
    std::map<std::string, double> upper_bounds;
};

inline std::vector<std::optional<AngleDistribution>> angle_distributions(
    const AngleSeries& series, const SimilarityParams& params) {
    std::vector<std::optional<AngleDistribution>> out;
    out.reserve(series.angles());
    for (const auto& v : series.values) out.push_back(histogram(v, params.bins, params.epsilon));
    return out;
}

// u per angle is the largest D(incorrect || sample) over the calibration set.
inline CalibrationProfile calibrate(const PoseSequence& sample,
                                    std::span<const PoseSequence> incorrect,
                                    const std::vector<AngleDef>& defs,
                                    const SimilarityParams& params = {}) {
    params.validate();
    if (incorrect.empty()) throw Error(ErrorKind::validation, "empty calibration set");

    const auto reference = angle_distributions(extract_angles(sample, defs), params);
    CalibrationProfile profile;
    profile.action_id = sample.action_id();
    profile.calibration_set_size = incorrect.size();
    profile.bins = params.bins;
    profile.epsilon = params.epsilon;
    for (const auto& d : defs) profile.upper_bounds[d.name] = 0.0;

    for (const auto& video : incorrect) {
        const auto dists = angle_distributions(extract_angles(video, defs), params);
        for (std::size_t a = 0; a < defs.size(); ++a) {
            if (!reference[a] || !dists[a]) continue;
            auto& u = profile.upper_bounds[defs[a].name];
            u = std::max(u, kl_divergence(*dists[a], *reference[a]));
        }
    }
    return profile;
}

struct AngleScore {
    std::string name;
    std::optional<double> divergence;  // nullopt when either side has no defined values
    double upper_bound = 0.0;
    std::optional<double> score;       // nullopt when excluded from the aggregate
};

struct SimilarityReport {
    std::vector<AngleScore> angles;
    double overall = 0.0;
    bool similar = false;
    double threshold = 50.0;

    std::size_t included() const {
        return static_cast<std::size_t>(
            std::count_if(angles.begin(), angles.end(), [](const auto& a) { return a.score.has_value(); }));
    }
};

inline SimilarityReport score_angles(const AngleSeries& patient, const AngleSeries& sample,
                                     const CalibrationProfile& profile,
                                     const SimilarityParams& params = {}) {
    params.validate();
    if (patient.names != sample.names)
        throw Error(ErrorKind::validation, "patient and sample use different angle catalogues");
    if (profile.bins != params.bins || std::abs(profile.epsilon - params.epsilon) > 1e-3 * params.epsilon)
        throw Error(ErrorKind::validation, "profile was calibrated with different histogram settings");

    const auto p = angle_distributions(patient, params);
    const auto q = angle_distributions(sample, params);

    SimilarityReport report;
    report.threshold = params.decision_threshold;
    std::vector<double> scores;
    for (std::size_t a = 0; a < patient.angles(); ++a) {
        const auto it = profile.upper_bounds.find(patient.names[a]);
        if (it == profile.upper_bounds.end())
            throw Error(ErrorKind::validation,
                        "calibration profile has no bound for angle " + patient.names[a]);
        AngleScore s{patient.names[a], std::nullopt, it->second, std::nullopt};
        if (p[a] && q[a]) {
            s.divergence = kl_divergence(*p[a], *q[a]);
            s.score = angle_score(*s.divergence, s.upper_bound);
            if (s.score) scores.push_back(*s.score);
        }
        report.angles.push_back(std::move(s));
    }
    if (scores.empty())
        throw Error(ErrorKind::indeterminate, "no angle is both defined and discriminative");
    report.overall = harmonic_mean(scores);
    report.similar = report.overall >= params.decision_threshold;
    return report;
}

// Both sequences are expected to be preprocessed already.
inline SimilarityReport score_similarity(const PoseSequence& patient, const PoseSequence& sample,
                                         const CalibrationProfile& profile,
                                         const std::vector<AngleDef>& defs,
                                         const SimilarityParams& params = {}) {
    return score_angles(extract_angles(patient, defs), extract_angles(sample, defs), profile, params);
}

// ---------------------------------------------------------------------------
// Profile document:
//   {"action_id": "...", "calibration_set_size": 50, "bins": 18, "epsilon": 1e-06,
//    "upper_bounds": {"left_elbow": 3.2, ...}}

inline nlohmann::json profile_to_json(const CalibrationProfile& p) {
    nlohmann::json bounds = nlohmann::json::object();
    for (const auto& [name, u] : p.upper_bounds) bounds[name] = u;
    return {{"action_id", p.action_id},
            {"calibration_set_size", p.calibration_set_size},
            {"bins", p.bins},
            {"epsilon", p.epsilon},
            {"upper_bounds", bounds}};
}

inline CalibrationProfile profile_from_json(const nlohmann::json& doc) {
    try {
        CalibrationProfile p;
        p.action_id = doc.value("action_id", std::string{});
        p.calibration_set_size = doc.value("calibration_set_size", std::size_t{0});
        p.bins = doc.value("bins", std::size_t{18});
        p.epsilon = doc.value("epsilon", 1e-6);
        if (!doc.contains("upper_bounds") || !doc["upper_bounds"].is_object())
            throw Error(ErrorKind::parse, "profile needs an upper_bounds object");
        for (const auto& [name, u] : doc["upper_bounds"].items()) {
            if (!u.is_number()) throw Error(ErrorKind::parse, "upper bound must be a number");
            const double v = u.get<double>();
            if (!(v >= 0.0) || !std::isfinite(v))
                throw Error(ErrorKind::validation, "upper bound must be finite and >= 0");
            p.upper_bounds[name] = v;
        }
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("malformed profile: ") + e.what());
    }
}

inline CalibrationProfile parse_profile(std::string_view text) {
    try {
        return profile_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("malformed profile: ") + e.what());
    }
}

inline std::string serialize_profile(const CalibrationProfile& p) { return profile_to_json(p).dump(2) + "\n"; }

}  // namespace rehab
