#pragma once

// Classification metrics for the similarity label and accuracy of repetition
// counts. Hard accuracy credits exact counts; soft accuracy also credits a count
// one above the truth (never one below).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rehab/error.hpp"

namespace rehab {

struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::size_t total() const noexcept { return tp + fp + fn + tn; }
    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion(const std::vector<bool>& predicted, const std::vector<bool>& actual) {
    if (predicted.size() != actual.size())
        throw Error(ErrorKind::validation, "predicted and actual labels differ in length");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i]) (actual[i] ? cm.tp : cm.fp)++;
        else (actual[i] ? cm.fn : cm.tn)++;
    }
    return cm;
}

struct MetricsReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when a denominator was zero and the affected values were reported as 0.
    bool degenerate = false;
};

inline MetricsReport metrics_from(double precision, double recall) {
    MetricsReport m{precision, recall, 0.0, false};
    if (precision + recall > 0.0) m.f1 = 2.0 * precision * recall / (precision + recall);
    else m.degenerate = true;
    return m;
}

inline MetricsReport precision_recall_f1(const ConfusionMatrix& cm) {
    MetricsReport m;
    const auto predicted_yes = cm.tp + cm.fp;
    const auto actual_yes = cm.tp + cm.fn;
    if (predicted_yes > 0) m.precision = static_cast<double>(cm.tp) / static_cast<double>(predicted_yes);
    if (actual_yes > 0) m.recall = static_cast<double>(cm.tp) / static_cast<double>(actual_yes);
    if (m.precision + m.recall > 0.0)
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.degenerate = predicted_yes == 0 || actual_yes == 0 || cm.tp == 0;
    return m;
}

struct AccuracyReport {
    std::size_t all = 0;       // AV: videos evaluated
    std::size_t correct = 0;   // CV: exact counts
    std::size_t tolerant = 0;  // CtV: exact or one too many
    double hard_accuracy = 0.0;
    double soft_accuracy = 0.0;
};

inline AccuracyReport accuracy_from_counts(std::size_t all, std::size_t correct, std::size_t tolerant) {
    if (correct > tolerant || tolerant > all)
        throw Error(ErrorKind::validation, "accuracy counts must satisfy CV <= CtV <= AV");
    AccuracyReport r{all, correct, tolerant, 0.0, 0.0};
    if (all > 0) {
        r.hard_accuracy = static_cast<double>(correct) / static_cast<double>(all);
        r.soft_accuracy = static_cast<double>(tolerant) / static_cast<double>(all);
    }
    return r;
}

inline AccuracyReport repetition_accuracy(std::span<const int> detected, std::span<const int> truth) {
    if (detected.size() != truth.size())
        throw Error(ErrorKind::validation, "detected and true counts differ in length");
    std::size_t cv = 0, ctv = 0;
    for (std::size_t i = 0; i < detected.size(); ++i) {
        if (detected[i] == truth[i]) ++cv;
        if (detected[i] == truth[i] || detected[i] == truth[i] + 1) ++ctv;
    }
    return accuracy_from_counts(detected.size(), cv, ctv);
}

inline double hard_accuracy(std::span<const int> detected, std::span<const int> truth) {
    return repetition_accuracy(detected, truth).hard_accuracy;
}

inline double soft_accuracy(std::span<const int> detected, std::span<const int> truth) {
    return repetition_accuracy(detected, truth).soft_accuracy;
}

}  // namespace rehab
