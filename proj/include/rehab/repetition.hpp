#pragma once

// Repetition counting. Every keypoint's distance from its first-frame position
// is smoothed and its peaks counted; the repetition count is the smallest of the
// most frequent per-keypoint counts.

#include <algorithm>
#include <array>
#include <map>
#include <vector>

#include "rehab/error.hpp"
#include "rehab/pose.hpp"
#include "rehab/savgol.hpp"
#include "rehab/wavelet.hpp"

namespace rehab {

using DisplacementSeries = std::array<std::vector<double>, kNumKeypoints>;

inline DisplacementSeries reference_displacements(const PoseSequence& seq) {
    DisplacementSeries out;
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
        out[k].resize(seq.size());
        const Vec2 origin = seq.position(0, k);
        for (std::size_t t = 0; t < seq.size(); ++t) out[k][t] = distance(seq.position(t, k), origin);
    }
    return out;
}

struct CountParams {
    SmoothingParams smoothing;
    PeakParams peaks;
    bool include_stationary = false;
    // Keypoints whose largest displacement is below this fraction of the largest
    // displacement of any keypoint are treated as stationary.
    double stationary_fraction = 0.05;
};

struct RepetitionReport {
    std::array<int, kNumKeypoints> cycles{};
    std::array<bool, kNumKeypoints> included{};
    std::vector<int> modes;  // ascending
    int repetitions = 0;
};

// All values attaining the highest frequency, ascending.
inline std::vector<int> mode_set(const std::vector<int>& values) {
    std::map<int, int> freq;
    for (int v : values) ++freq[v];
    int best = 0;
    for (const auto& [v, f] : freq) best = std::max(best, f);
    std::vector<int> modes;
    for (const auto& [v, f] : freq)
        if (f == best) modes.push_back(v);
    return modes;
}

inline RepetitionReport count_repetitions(const PoseSequence& seq, const CountParams& params = {}) {
    params.smoothing.validate();
    params.peaks.validate();
    if (seq.size() < static_cast<std::size_t>(params.smoothing.window))
        throw Error(ErrorKind::indeterminate, "sequence shorter than the smoothing window");

    const auto series = reference_displacements(seq);
    std::array<double, kNumKeypoints> reach{};
    double global = 0.0;
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
        reach[k] = *std::max_element(series[k].begin(), series[k].end());
        global = std::max(global, reach[k]);
    }

    RepetitionReport report;
    std::vector<int> counts;
    for (std::size_t k = 0; k < kNumKeypoints; ++k) {
        report.included[k] =
            params.include_stationary || (global > 0.0 && reach[k] >= params.stationary_fraction * global);
        const auto smoothed = savitzky_golay(series[k], params.smoothing);
        report.cycles[k] = static_cast<int>(cwt_peaks(smoothed, params.peaks).size());
        if (report.included[k]) counts.push_back(report.cycles[k]);
    }
    if (counts.empty()) throw Error(ErrorKind::indeterminate, "every keypoint is stationary");

    report.modes = mode_set(counts);
    report.repetitions = report.modes.front();
    return report;
}

}  // namespace rehab
