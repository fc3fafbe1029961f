#pragma once

// Evaluation manifest: labelled corpus files for the threshold sweep and for
// repetition accuracy. Paths are relative to the manifest's directory; an
// "incorrect" entry may name a directory, meaning every *.json file in it.
//
//   {"thresholds": [0.1, 0.2, 0.3, 0.4, 0.5],
//    "references": [{"name": "squat", "sample": "squat/sample.json",
//                    "incorrect": ["squat/wrong"]}],
//    "pairs":  [{"patient": "squat/p00.json", "reference": "squat", "similar": true}],
//    "counts": [{"sequence": "squat/c00.json", "group": "squat", "repetitions": 10}]}

#include <algorithm>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "rehab/corpus.hpp"
#include "rehab/evaluation.hpp"
#include "rehab/io.hpp"
#include "rehab/pipeline.hpp"
#include "rehab/report.hpp"

namespace rehab {

struct EvaluationManifest {
    std::vector<double> thresholds;
    std::vector<SweepReference> references;
    std::vector<SweepPair> pairs;
    std::vector<CountItem> counts;
};

namespace detail {

inline std::vector<std::filesystem::path> expand(const std::filesystem::path& p) {
    if (!std::filesystem::is_directory(p)) return {p};
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    return files;
}

inline std::string manifest_string(const nlohmann::json& j, const char* key) {
    if (!j.is_object() || !j.contains(key) || !j[key].is_string())
        throw Error(ErrorKind::parse, std::string("manifest entry needs string field ") + key);
    return j[key].get<std::string>();
}

}  // namespace detail

inline EvaluationManifest load_manifest(const std::filesystem::path& path) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(path.string()));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::parse, std::string("malformed manifest: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::parse, "manifest must be an object");
    const auto base = path.parent_path();
    auto load_path = [](const std::filesystem::path& file) {
        try {
            return load_sequence(file.string());
        } catch (const Error& e) {
            throw Error(e.kind(), file.string() + ": " + e.what());
        }
    };
    auto load = [&](const std::string& rel) { return load_path(base / rel); };
    auto list = [&](const char* key) {
        if (!doc.contains(key)) return nlohmann::json::array();
        if (!doc[key].is_array()) throw Error(ErrorKind::parse, std::string(key) + " must be an array");
        return doc[key];
    };

    EvaluationManifest m;
    for (const auto& t : list("thresholds")) {
        if (!t.is_number()) throw Error(ErrorKind::parse, "thresholds must be numbers");
        m.thresholds.push_back(t.get<double>());
    }

    std::map<std::string, std::size_t> index;
    for (const auto& r : list("references")) {
        SweepReference ref{detail::manifest_string(r, "name"), load(detail::manifest_string(r, "sample")), {}};
        if (!r.contains("incorrect") || !r["incorrect"].is_array())
            throw Error(ErrorKind::parse, "reference " + ref.name + " needs an incorrect array");
        for (const auto& entry : r["incorrect"]) {
            if (!entry.is_string()) throw Error(ErrorKind::parse, "incorrect entries must be paths");
            for (const auto& f : detail::expand(base / entry.get<std::string>()))
                ref.incorrect.push_back(load_path(f));
        }
        if (ref.incorrect.empty()) throw Error(ErrorKind::validation, "reference " + ref.name + " has no incorrect videos");
        if (!index.emplace(ref.name, m.references.size()).second)
            throw Error(ErrorKind::validation, "duplicate reference " + ref.name);
        m.references.push_back(std::move(ref));
    }

    for (const auto& p : list("pairs")) {
        const auto name = detail::manifest_string(p, "reference");
        const auto it = index.find(name);
        if (it == index.end()) throw Error(ErrorKind::validation, "pair names unknown reference " + name);
        if (!p.contains("similar") || !p["similar"].is_boolean())
            throw Error(ErrorKind::parse, "pair needs a boolean similar label");
        m.pairs.push_back({load(detail::manifest_string(p, "patient")), it->second, p["similar"].get<bool>()});
    }

    for (const auto& c : list("counts")) {
        if (!c.contains("repetitions") || !c["repetitions"].is_number_integer() || c["repetitions"].get<int>() < 0)
            throw Error(ErrorKind::parse, "count entry needs a non-negative integer repetitions");
        m.counts.push_back({detail::manifest_string(c, "group"), load(detail::manifest_string(c, "sequence")),
                            c["repetitions"].get<int>()});
    }

    if (m.pairs.empty() && m.counts.empty()) throw Error(ErrorKind::validation, "manifest lists no pairs and no counts");
    return m;
}

struct GroupAccuracy {
    std::string group;  // "all" for the whole corpus
    AccuracyReport report;
};

// Counts each recording after preprocessing; an indeterminate count counts as 0.
inline std::vector<GroupAccuracy> count_accuracy(const std::vector<CountItem>& items,
                                                 const PipelineParams& params = {}) {
    std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> by_group;
    std::vector<int> all_detected, all_truth;
    for (const auto& item : items) {
        int detected = 0;
        try {
            detected = count_repetitions(preprocess(item.sequence, params.preprocess).sequence, params.count).repetitions;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::indeterminate) throw;
        }
        auto& [d, t] = by_group[item.group];
        d.push_back(detected);
        t.push_back(item.repetitions);
        all_detected.push_back(detected);
        all_truth.push_back(item.repetitions);
    }
    std::vector<GroupAccuracy> out;
    for (const auto& [group, dt] : by_group) out.push_back({group, repetition_accuracy(dt.first, dt.second)});
    if (!items.empty()) out.push_back({"all", repetition_accuracy(all_detected, all_truth)});
    return out;
}

inline Table sweep_table(const std::vector<SweepRow>& rows) {
    Table t{{"T", "Precision", "Recall", "F1"}, {}};
    for (const auto& r : rows)
        t.add({fixed(r.threshold, 2), fixed(r.metrics.precision), fixed(r.metrics.recall), fixed(r.metrics.f1)});
    return t;
}

inline Table accuracy_table(const std::vector<GroupAccuracy>& rows) {
    Table t{{"Action", "AV", "CV", "CtV", "HA", "SA"}, {}};
    for (const auto& g : rows)
        t.add({g.group, std::to_string(g.report.all), std::to_string(g.report.correct),
               std::to_string(g.report.tolerant), fixed(g.report.hard_accuracy, 2), fixed(g.report.soft_accuracy, 2)});
    return t;
}

inline std::string evaluate_report(const EvaluationManifest& m, const std::vector<double>& thresholds,
                                   const PipelineParams& params, OutputFormat format) {
    std::string out;
    if (!m.pairs.empty()) out += render(sweep_table(sweep_threshold(m.references, m.pairs, thresholds, params)), format);
    if (!m.counts.empty()) {
        if (!out.empty()) out += '\n';
        out += render(accuracy_table(count_accuracy(m.counts, params)), format);
    }
    return out;
}

}  // namespace rehab
