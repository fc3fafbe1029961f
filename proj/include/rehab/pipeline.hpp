#pragma once

// End-to-end analysis of one upload, and the threshold sweep used to pick T.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rehab/error.hpp"
#include "rehab/evaluation.hpp"
#include "rehab/kinematics.hpp"
#include "rehab/preprocess.hpp"
#include "rehab/repetition.hpp"
#include "rehab/similarity.hpp"

namespace rehab {

struct PipelineParams {
    PreprocessParams preprocess;
    SimilarityParams similarity;
    CountParams count;
    std::vector<AngleDef> angles = default_angle_defs();
};

struct DetectionResult {
    double score = 0.0;
    bool similar = false;
    bool score_indeterminate = false;
    int repetitions = 0;
    bool count_indeterminate = false;
    std::size_t outlier_repairs = 0;
    std::size_t extrapolation_repairs = 0;

    friend bool operator==(const DetectionResult&, const DetectionResult&) = default;
};

// `sample` is the reference recording, already preprocessed.
inline DetectionResult analyze(const PoseSequence& upload, const PoseSequence& sample,
                               const CalibrationProfile& profile, const PipelineParams& params = {}) {
    const auto repaired = preprocess(upload, params.preprocess);
    DetectionResult r;
    for (const auto& e : repaired.log)
        (e.method == RepairMethod::outlier_average ? r.outlier_repairs : r.extrapolation_repairs)++;

    try {
        const auto report = score_similarity(repaired.sequence, sample, profile, params.angles, params.similarity);
        r.score = report.overall;
        r.similar = report.similar;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::indeterminate) throw;
        r.score_indeterminate = true;
    }
    try {
        r.repetitions = count_repetitions(repaired.sequence, params.count).repetitions;
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::indeterminate) throw;
        r.count_indeterminate = true;
    }
    return r;
}

// ---------------------------------------------------------------------------
// Threshold sweep: for every T the references and calibration videos are
// preprocessed at T, the profile is recalibrated, and each labelled upload is
// classified. An upload whose score is indeterminate counts as "not similar".

struct SweepReference {
    std::string name;
    PoseSequence sample;
    std::vector<PoseSequence> incorrect;
};

struct SweepPair {
    PoseSequence patient;
    std::size_t reference = 0;
    bool similar = false;
};

struct SweepRow {
    double threshold = 0.0;
    ConfusionMatrix cm;
    MetricsReport metrics;
};

inline std::vector<SweepRow> sweep_threshold(std::span<const SweepReference> references,
                                             std::span<const SweepPair> pairs,
                                             std::span<const double> thresholds,
                                             const PipelineParams& base = {}) {
    if (pairs.empty()) throw Error(ErrorKind::validation, "empty evaluation corpus");
    for (const auto& p : pairs)
        if (p.reference >= references.size()) throw Error(ErrorKind::validation, "pair names an unknown reference");

    std::vector<SweepRow> rows;
    for (double t : thresholds) {
        PipelineParams params = base;
        params.preprocess.displacement_threshold = t;

        std::vector<PoseSequence> samples;
        std::vector<CalibrationProfile> profiles;
        for (const auto& ref : references) {
            samples.push_back(preprocess(ref.sample, params.preprocess).sequence);
            std::vector<PoseSequence> wrong;
            wrong.reserve(ref.incorrect.size());
            for (const auto& v : ref.incorrect) wrong.push_back(preprocess(v, params.preprocess).sequence);
            profiles.push_back(calibrate(samples.back(), wrong, params.angles, params.similarity));
        }

        std::vector<bool> predicted, actual;
        for (const auto& p : pairs) {
            const auto patient = preprocess(p.patient, params.preprocess).sequence;
            bool label = false;
            try {
                label = score_similarity(patient, samples[p.reference], profiles[p.reference], params.angles,
                                         params.similarity)
                            .similar;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::indeterminate) throw;
            }
            predicted.push_back(label);
            actual.push_back(p.similar);
        }
        const auto cm = confusion(predicted, actual);
        rows.push_back({t, cm, precision_recall_f1(cm)});
    }
    return rows;
}

}  // namespace rehab
