// rehab: offline pipeline commands and the monitor service.
//
// Exit status: 0 success, 1 parse or validation error, 2 indeterminate result,
// 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rehab/corpus.hpp"
#include "rehab/io.hpp"
#include "rehab/manifest.hpp"
#include "rehab/pipeline.hpp"
#include "rehab/report.hpp"
#include "rehab/service/http.hpp"
#include "rehab/synthetic.hpp"

namespace fs = std::filesystem;
using namespace rehab;

namespace {

struct Globals {
    double threshold = 0.2;
    std::uint64_t seed = 0;
    std::string format = "text";
    std::size_t bins = 18;
    double epsilon = 1e-6;
    int sg_window = 11;
    int sg_order = 3;
    int max_width = 0;
    double min_snr = 1.0;

    PipelineParams params() const {
        PipelineParams p;
        p.preprocess.displacement_threshold = threshold;
        p.similarity.bins = bins;
        p.similarity.epsilon = epsilon;
        p.count.smoothing = {sg_window, sg_order};
        p.count.peaks.max_width = max_width;
        p.count.peaks.min_snr = min_snr;
        p.preprocess.validate();
        p.similarity.validate();
        p.count.smoothing.validate();
        p.count.peaks.validate();
        return p;
    }
    OutputFormat output() const { return parse_format(format); }
};

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::indeterminate: return 2;
        case ErrorKind::io: return 3;
        default: return 1;
    }
}

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") std::cout << content;
    else write_file(path, content);
}

std::vector<PoseSequence> load_all(const std::vector<std::string>& paths) {
    std::vector<PoseSequence> out;
    for (const auto& p : paths)
        for (const auto& f : detail::expand(p)) out.push_back(load_sequence(f.string()));
    if (out.empty()) throw Error(ErrorKind::validation, "no incorrect videos found");
    return out;
}

CalibrationProfile calibrate_from(const PoseSequence& sample, const std::vector<std::string>& paths,
                                  const PipelineParams& params) {
    std::vector<PoseSequence> wrong;
    for (const auto& v : load_all(paths)) wrong.push_back(preprocess(v, params.preprocess).sequence);
    return calibrate(sample, wrong, params.angles, params.similarity);
}

std::string sequence_number(std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%03zu", i);
    return buf;
}

void write_corpus(const fs::path& dir, const CorpusSpec& spec) {
    const auto sim = similarity_corpus(spec);
    const auto counts = counting_corpus(spec);
    nlohmann::json manifest{{"thresholds", {0.1, 0.2, 0.3, 0.4, 0.5}},
                            {"references", nlohmann::json::array()},
                            {"pairs", nlohmann::json::array()},
                            {"counts", nlohmann::json::array()}};
    auto put = [&](const std::string& rel, const PoseSequence& s) {
        fs::create_directories((dir / rel).parent_path());
        write_file((dir / rel).string(), serialize_sequence(s));
        return rel;
    };
    for (const auto& ref : sim.references) {
        put(ref.name + "/sample.json", ref.sample);
        for (std::size_t i = 0; i < ref.incorrect.size(); ++i)
            put(ref.name + "/incorrect/" + sequence_number(i) + ".json", ref.incorrect[i]);
        manifest["references"].push_back(
            {{"name", ref.name}, {"sample", ref.name + "/sample.json"}, {"incorrect", {ref.name + "/incorrect"}}});
    }
    for (std::size_t i = 0; i < sim.pairs.size(); ++i) {
        const auto& p = sim.pairs[i];
        const auto& name = sim.references[p.reference].name;
        manifest["pairs"].push_back({{"patient", put(name + "/pair_" + sequence_number(i) + ".json", p.patient)},
                                     {"reference", name},
                                     {"similar", p.similar}});
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const auto& c = counts[i];
        manifest["counts"].push_back({{"sequence", put(c.group + "/count_" + sequence_number(i) + ".json", c.sequence)},
                                      {"group", c.group},
                                      {"repetitions", c.repetitions}});
    }
    write_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rehabilitation pose analysis: preprocessing, similarity scoring, repetition counting"};
    app.fallthrough();
    app.require_subcommand(1);
    Globals g;
    app.add_option("--threshold", g.threshold, "Displacement threshold T as a fraction of each keypoint's maximum")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--seed", g.seed, "Seed for synthetic data");
    app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"text", "tabular"}));
    app.add_option("--bins", g.bins, "Histogram bins over [0, pi]");
    app.add_option("--epsilon", g.epsilon, "Smoothing mass added to every histogram bin");
    app.add_option("--sg-window", g.sg_window, "Savitzky-Golay window (odd)");
    app.add_option("--sg-order", g.sg_order, "Savitzky-Golay polynomial order");
    app.add_option("--max-width", g.max_width, "Largest wavelet width (0: a tenth of the series length)");
    app.add_option("--min-snr", g.min_snr, "Minimum ridge signal-to-noise ratio");

    // score
    auto* score = app.add_subcommand("score", "Similarity of a patient recording to a sample recording");
    std::string sample_path, patient_path, profile_path;
    std::vector<std::string> calibrate_dirs;
    double decision = 50.0;
    score->add_option("sample", sample_path, "Sample sequence")->required();
    score->add_option("patient", patient_path, "Patient sequence")->required();
    auto* profile_opt = score->add_option("--profile", profile_path, "Calibration profile");
    score->add_option("--calibrate-from", calibrate_dirs, "Incorrect videos (files or directories) to calibrate from")
        ->excludes(profile_opt);
    score->add_option("--decision-threshold", decision, "Overall score at or above which the pose is similar")
        ->check(CLI::Range(0.0, 100.0));

    // count
    auto* count = app.add_subcommand("count", "Count repetitions in a recording");
    std::string count_path;
    bool include_stationary = false;
    count->add_option("sequence", count_path, "Sequence")->required();
    count->add_flag("--include-stationary", include_stationary, "Let still keypoints vote in the mode set");

    // preprocess
    auto* prep = app.add_subcommand("preprocess", "Repair keypoint errors and write the repaired sequence");
    std::string prep_in, prep_out, prep_log;
    prep->add_option("input", prep_in, "Sequence")->required();
    prep->add_option("-o,--output", prep_out, "Repaired sequence (default: standard output)");
    prep->add_option("--log", prep_log, "Repair log destination (default: standard error)");

    // calibrate
    auto* cal = app.add_subcommand("calibrate", "Learn per-angle divergence bounds from incorrect videos");
    std::string cal_sample, cal_out;
    std::vector<std::string> cal_inputs;
    cal->add_option("sample", cal_sample, "Sample sequence")->required();
    cal->add_option("incorrect", cal_inputs, "Incorrect videos: files or directories of *.json")->required();
    cal->add_option("-o,--output", cal_out, "Profile (default: standard output)");

    // generate
    auto* gen = app.add_subcommand("generate", "Synthetic recordings with known repetition counts");
    std::string gen_arch = "squat", gen_out, gen_fault = "none", corpus_dir;
    int gen_reps = 10, gen_period = 20;
    double gen_noise = 0.0, gen_fault_mag = 1.0, gen_fps = kDefaultFps;
    std::size_t gen_spikes = 0, gen_drifts = 0;
    CorpusSpec corpus;
    bool corpus_clean = false;
    gen->add_option("archetype", gen_arch, "squat, raise_hands, lift_foot, rotate_neck, rotate_waist or shrug");
    gen->add_option("--reps", gen_reps, "Repetitions");
    gen->add_option("--period", gen_period, "Frames per rise and fall");
    gen->add_option("--noise", gen_noise, "Jitter standard deviation in pixels");
    gen->add_option("--fps", gen_fps, "Frames per second");
    gen->add_option("--fault", gen_fault, "Posture fault");
    gen->add_option("--fault-magnitude", gen_fault_mag, "Fault strength, 1 = nominal");
    gen->add_option("--spikes", gen_spikes, "Single-frame spikes to inject");
    gen->add_option("--drifts", gen_drifts, "4-frame, 40 px drift runs to inject");
    gen->add_option("-o,--output", gen_out, "Sequence (default: standard output)");
    gen->add_option("--corpus", corpus_dir, "Write a labelled evaluation corpus and manifest.json here instead");
    gen->add_option("--calibration", corpus.calibration, "Corpus: incorrect videos per archetype");
    gen->add_option("--pairs", corpus.pairs_per_class, "Corpus: correct and perturbed uploads per archetype");
    gen->add_option("--counts", corpus.count_per_archetype, "Corpus: counting recordings per archetype");
    gen->add_flag("--clean", corpus_clean, "Corpus: no injected detector errors");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Threshold sweep and repetition accuracy over a manifest");
    std::string manifest_path;
    std::vector<double> sweep;
    eval->add_option("manifest", manifest_path, "Manifest")->required();
    eval->add_option("--thresholds", sweep, "Values of T to sweep (default: the manifest's, else 0.1..0.5)")
        ->delimiter(',');

    // serve
    auto* serve = app.add_subcommand("serve", "Run the monitor service over HTTP");
    std::string host = "127.0.0.1", store_dir;
    int port = 8080;
    serve->add_option("--host", host, "Listen address");
    serve->add_option("--port", port, "Listen port")->check(CLI::Range(1, 65535));
    serve->add_option("--store", store_dir, std::string("Storage directory (default: $") + service::kStoreEnv +
                                                 ", else ./rehab-store)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        const auto params = g.params();
        const auto format = g.output();

        if (*score) {
            auto p = params;
            p.similarity.decision_threshold = decision;
            const auto sample = preprocess(load_sequence(sample_path), p.preprocess).sequence;
            const auto patient = preprocess(load_sequence(patient_path), p.preprocess).sequence;
            if (profile_path.empty() && calibrate_dirs.empty())
                throw Error(ErrorKind::validation, "score needs --profile or --calibrate-from");
            const auto profile = profile_path.empty() ? calibrate_from(sample, calibrate_dirs, p)
                                                      : parse_profile(read_file(profile_path));
            const auto report = score_similarity(patient, sample, profile, p.angles, p.similarity);
            Table angles{{"angle", "divergence", "upper_bound", "score"}, {}};
            for (const auto& a : report.angles)
                angles.add({a.name, a.divergence ? fixed(*a.divergence, 6) : "-", fixed(a.upper_bound, 6),
                            a.score ? fixed(*a.score, 2) : "-"});
            Table summary{{"overall", "label"}, {}};
            summary.add({fixed(report.overall, 2), report.similar ? "similar" : "not_similar"});
            std::cout << render(angles, format) << '\n' << render(summary, format);
        } else if (*count) {
            auto p = params;
            p.count.include_stationary = include_stationary;
            const auto seq = preprocess(load_sequence(count_path), p.preprocess).sequence;
            const auto report = count_repetitions(seq, p.count);
            Table kp{{"keypoint", "cycles", "included"}, {}};
            for (std::size_t k = 0; k < kNumKeypoints; ++k)
                kp.add({std::string(kKeypointNames[k]), std::to_string(report.cycles[k]),
                        report.included[k] ? "yes" : "no"});
            std::string modes;
            for (int m : report.modes) modes += (modes.empty() ? "" : ",") + std::to_string(m);
            Table summary{{"modes", "repetitions"}, {}};
            summary.add({modes, std::to_string(report.repetitions)});
            std::cout << render(kp, format) << '\n' << render(summary, format);
        } else if (*prep) {
            const auto r = preprocess(load_sequence(prep_in), params.preprocess);
            Table log{{"frame", "keypoint", "method", "old_x", "old_y", "new_x", "new_y"}, {}};
            for (const auto& e : r.log)
                log.add({std::to_string(e.frame), std::string(name_of(e.keypoint)), method_name(e.method),
                         detail::number_text(e.before.x), detail::number_text(e.before.y),
                         detail::number_text(e.after.x), detail::number_text(e.after.y)});
            emit(prep_out, serialize_sequence(r.sequence));
            if (!prep_log.empty()) write_file(prep_log, render(log, format));
            else if (prep_out.empty() || prep_out == "-") std::cerr << render(log, format);
            else std::cout << render(log, format);
        } else if (*cal) {
            const auto sample = preprocess(load_sequence(cal_sample), params.preprocess).sequence;
            emit(cal_out, serialize_profile(calibrate_from(sample, cal_inputs, params)));
        } else if (*gen) {
            if (!corpus_dir.empty()) {
                corpus.seed = g.seed;
                corpus.corrupt = !corpus_clean;
                write_corpus(corpus_dir, corpus);
                std::cout << "wrote " << (fs::path(corpus_dir) / "manifest.json").string() << '\n';
            } else {
                auto m = MotionArchetype::make(archetype_from_name(gen_arch), gen_reps, gen_period, gen_noise);
                auto video = generate_synthetic(m, gen_fps, g.seed, fault_from_name(gen_fault), gen_fault_mag);
                if (gen_spikes > 0 || gen_drifts > 0) {
                    CorruptionSpec cs;
                    cs.seed = g.seed + 1;
                    cs.spike_count = gen_spikes;
                    const std::size_t n = video.sequence.size();
                    for (std::size_t i = 0; i < gen_drifts; ++i) {
                        if (n < 12) throw Error(ErrorKind::validation, "sequence too short for drift runs");
                        cs.drift_runs.push_back({4 + i * (n - 8) / gen_drifts, 4, 40.0, std::nullopt});
                    }
                    video.sequence = inject_corruptions(video.sequence, cs).sequence;
                }
                emit(gen_out, serialize_sequence(video.sequence));
                if (!gen_out.empty() && gen_out != "-") {
                    Table t{{"archetype", "repetitions", "frames"}, {}};
                    t.add({gen_arch, std::to_string(video.truth.repetitions), std::to_string(video.sequence.size())});
                    std::cout << render(t, format);
                }
            }
        } else if (*eval) {
            const auto m = load_manifest(manifest_path);
            auto thresholds = sweep.empty() ? m.thresholds : sweep;
            if (thresholds.empty()) thresholds = {0.1, 0.2, 0.3, 0.4, 0.5};
            std::cout << evaluate_report(m, thresholds, params, format);
        } else if (*serve) {
            const auto dir = store_dir.empty() ? service::store_dir_from_env() : store_dir;
            service::MonitorService svc(service::RecordStore::open(dir), params);
            httplib::Server server;
            service::mount_routes(server, svc);
            std::cerr << "listening on " << host << ':' << port << ", store " << dir << '\n';
            if (!server.listen(host, port)) throw Error(ErrorKind::io, "cannot listen on " + host + ":" + std::to_string(port));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
