// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only if all pass.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <unistd.h>
#include <vector>

#include "oracles.hpp"
#include "rehab/corpus.hpp"
#include "rehab/evaluation.hpp"
#include "rehab/io.hpp"
#include "rehab/manifest.hpp"
#include "rehab/pipeline.hpp"
#include "rehab/savgol.hpp"
#include "rehab/service/monitor.hpp"
#include "rehab/similarity.hpp"
#include "rehab/synthetic.hpp"
#include "rehab/wavelet.hpp"

namespace fs = std::filesystem;
using namespace rehab;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---------------------------------------------------------------------------

Outcome metric_fixtures() {
    Outcome o;
    struct Row {
        double t, p, r, f1;
    };
    const Row sweep_rows[] = {{0.1, 0.925, 0.833, 0.877}, {0.2, 0.931, 0.900, 0.915}, {0.3, 0.913, 0.700, 0.792},
                          {0.4, 0.909, 0.666, 0.769}, {0.5, 0.818, 0.346, 0.486}};
    for (const auto& row : sweep_rows) {
        const auto c = oracle::counts_for(row.p, row.r);
        const auto m = precision_recall_f1(ConfusionMatrix{c.tp, c.fp, c.fn, 0});
        if (c.tp == 0 || std::abs(m.f1 - row.f1) > 0.001) o.pass = false;
        if (row.t == 0.2 || row.t == 0.5) o.detail += "F1(T=" + fmt("%.1f", row.t) + ")=" + fmt("%.4f", m.f1) + " ";
    }
    struct Acc {
        std::size_t av, cv, ctv;
        double ha, sa;
    };
    const Acc action_rows[] = {{25, 19, 24, 0.76, 0.96}, {25, 21, 23, 0.84, 0.92}, {25, 22, 23, 0.88, 0.92},
                           {25, 23, 25, 0.92, 1.00}, {25, 21, 23, 0.84, 0.92}, {25, 20, 23, 0.80, 0.92}};
    int exact = 0;
    for (const auto& a : action_rows) {
        const auto r = accuracy_from_counts(a.av, a.cv, a.ctv);
        if (std::abs(r.hard_accuracy - a.ha) < 1e-12 && std::abs(r.soft_accuracy - a.sa) < 1e-12) ++exact;
    }
    if (exact != 6) o.pass = false;
    o.detail += "accuracy rows exact " + std::to_string(exact) + "/6";
    return o;
}

// ---------------------------------------------------------------------------
// Worked week: a light action started on Day 1, next visit on Day 8. A zero in the
// table means no video that slot.

constexpr int kWeek[6][4] = {{13, 10, 8, 5}, {10, 11, 10, 0}, {5, 12, 10, 0},
                               {8, 5, 0, 0},   {0, 0, 0, 0},    {5, 10, 10, 10}};

const service::Date kDay1 = service::parse_date("2026-03-02");

struct WeekRun {
    bool counts_exact = true;
};

WeekRun drive_week(service::MonitorService& svc) {
    WeekRun run;
    svc.add_patient({"patient-01", "Worked week patient"});
    const auto m = MotionArchetype::make(Archetype::squat, 10, 20, 0.0);
    const auto sample = generate_synthetic(m, kDefaultFps, 1).sequence;
    std::vector<PoseSequence> wrong;
    for (std::size_t i = 0; i < kPostureFaults.size(); ++i)
        wrong.push_back(preprocess(generate_synthetic(m, kDefaultFps, 10 + i, kPostureFaults[i]).sequence).sequence);

    service::ActionAssignment a;
    a.patient_id = "patient-01";
    a.action_id = "squat";
    a.intensity = service::Intensity::light;
    a.start_date = kDay1;
    a.visit_date = service::add_days(kDay1, 7);
    a.profile = calibrate(preprocess(sample).sequence, wrong, default_angle_defs());
    svc.assign_action(a, sample);

    for (int day = 0; day < 6; ++day)
        for (int slot = 0; slot < 4; ++slot) {
            const int reps = kWeek[day][slot];
            if (reps == 0) continue;
            const auto video =
                generate_synthetic(MotionArchetype::make(Archetype::squat, reps, 18 + slot * 2, 0.0), kDefaultFps,
                                   static_cast<std::uint64_t>(100 + day * 4 + slot))
                    .sequence;
            const auto u = svc.ingest_upload("patient-01", "squat", video, service::add_days(kDay1, day));
            if (u.result.repetitions != reps) run.counts_exact = false;
        }
    return run;
}

Outcome week_replay() {
    Outcome o;
    service::MonitorService svc;
    const auto run = drive_week(svc);

    std::vector<int> checkpoint_days;
    for (int day = 0; day < 7; ++day)
        if (svc.daily_rollup("patient-01", "squat", service::add_days(kDay1, day)).checkpoint_earned)
            checkpoint_days.push_back(day + 1);
    const double rate = svc.completion_rate("patient-01", "squat", service::add_days(kDay1, 5));

    const auto day7 = svc.notification_check(service::add_days(kDay1, 6));
    const auto again = svc.notification_check(service::add_days(kDay1, 6));
    const auto visit = svc.notification_check(service::add_days(kDay1, 7));
    const bool notified = day7.size() == 1 && again.size() == 1 && visit.empty() &&
                          svc.notifications("patient-01").size() == 1;

    o.pass = run.counts_exact && checkpoint_days == std::vector<int>{2, 6} && std::abs(rate - 66.7) <= 0.1 && notified;
    o.detail = std::string("counts ") + (run.counts_exact ? "exact" : "WRONG") + ", checkpoint days";
    for (int d : checkpoint_days) o.detail += " " + std::to_string(d);
    o.detail += ", completion " + fmt("%.1f%%", rate) + ", Day 7 reminders " + std::to_string(day7.size()) +
                " (visit day " + std::to_string(visit.size()) + ")";
    return o;
}

// ---------------------------------------------------------------------------

Outcome repetition_accuracy_corpus() {
    Outcome o;
    CorpusSpec spec;
    spec.corrupt = false;
    const auto acc = count_accuracy(counting_corpus(spec));
    for (const auto& g : acc) {
        if (g.report.soft_accuracy < 0.9) o.pass = false;
        if (g.group == "all")
            o.detail = "SA " + fmt("%.3f", g.report.soft_accuracy) + " HA " + fmt("%.3f", g.report.hard_accuracy) +
                       " over " + std::to_string(g.report.all) + "; per action SA";
    }
    for (const auto& g : acc)
        if (g.group != "all") o.detail += " " + fmt("%.2f", g.report.soft_accuracy);
    return o;
}

// ---------------------------------------------------------------------------

Outcome similarity_f1() {
    Outcome o;
    const auto corpus = similarity_corpus();
    const std::vector<double> ts{0.1, 0.2, 0.3, 0.4, 0.5};
    const auto rows = sweep_threshold(corpus.references, corpus.pairs, ts);
    const double f02 = rows[1].metrics.f1, f05 = rows[4].metrics.f1;
    o.pass = f02 >= 0.9 && f02 >= f05;
    o.detail = "F1 by T:";
    for (const auto& r : rows) o.detail += " " + fmt("%.3f", r.metrics.f1);
    o.detail += " (" + std::to_string(corpus.pairs.size()) + " pairs)";
    return o;
}

// ---------------------------------------------------------------------------

Outcome oracle_suites() {
    Outcome o;
    std::string failed;

    const auto sg = sg_coefficients(5, 2);
    const double expect[] = {-3.0 / 35, 12.0 / 35, 17.0 / 35, 12.0 / 35, -3.0 / 35};
    for (int i = 0; i < 5; ++i)
        if (std::abs(sg[static_cast<std::size_t>(i)] - expect[i]) > 1e-12) failed += " sg(5,2)";

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    double poly_err = 0.0;
    for (int window : {5, 7, 11, 15})
        for (int order = 0; order <= std::min(4, window - 1); ++order)
            for (int degree = 0; degree <= order; ++degree) {
                std::vector<double> c(static_cast<std::size_t>(degree + 1));
                for (auto& v : c) v = coef(rng);
                std::vector<double> x(60);
                for (std::size_t t = 0; t < x.size(); ++t) {
                    const double s = static_cast<double>(t) / 10.0 - 3.0;
                    double y = 0.0;
                    for (std::size_t j = c.size(); j-- > 0;) y = y * s + c[j];
                    x[t] = y;
                }
                const auto y = savitzky_golay(x, {window, order});
                for (std::size_t t = 0; t < x.size(); ++t) poly_err = std::max(poly_err, std::abs(y[t] - x[t]));
            }
    if (poly_err > 1e-9) failed += " sg-poly";

    int peak_mismatch = 0;
    for (int period = 10; period <= 30; ++period)
        for (int k = 1; k <= 25; ++k) {
            const auto x = oracle::cosine_cycles(k, period);
            if (cwt_peaks(x) != oracle::zero_crossing_peaks(x)) ++peak_mismatch;
        }
    if (peak_mismatch) failed += " cwt(" + std::to_string(peak_mismatch) + ")";

    double kl_err = 0.0;
    bool kl_sign = true;
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> a(40), b(40);
        for (auto& v : a) v = angle(rng);
        for (auto& v : b) v = trial % 2 ? angle(rng) * 0.5 : angle(rng);
        const auto p = histogram(a), q = histogram(b);
        const double d = kl_divergence(*p, *q);
        kl_err = std::max(kl_err, std::abs(d - oracle::kl(p->mass, q->mass)));
        if (!(d > 0.0) || kl_divergence(*p, *p) != 0.0) kl_sign = false;
    }
    if (kl_err > 1e-12 || !kl_sign) failed += " kl";

    o.pass = failed.empty();
    o.detail = "S-G poly err " + fmt("%.1e", poly_err) + ", cwt mismatches " + std::to_string(peak_mismatch) +
               "/525, KL err " + fmt("%.1e", kl_err) + (failed.empty() ? "" : "; failed:" + failed);
    return o;
}

// ---------------------------------------------------------------------------
// 60 recordings at sigma = 2: two spikes each plus one 4-frame, 40 px drift on a
// keypoint the archetype keeps still; their noise-free twins must come back
// unchanged.

Outcome preprocessing_properties() {
    Outcome o;
    std::mt19937_64 rng(11);
    std::size_t spikes = 0, spikes_fixed = 0, drift_frames = 0, drift_improved = 0, clean = 0, clean_identical = 0;
    for (int i = 0; i < 60; ++i) {
        const auto a = kAllArchetypes[static_cast<std::size_t>(i) % kAllArchetypes.size()];
        const int reps = 5 + static_cast<int>(rng() % 11);
        const int period = 16 + static_cast<int>(rng() % 15);
        const auto seed = rng();
        const auto noisy = generate_synthetic(MotionArchetype::make(a, reps, period, 2.0), kDefaultFps, seed);
        const auto still = generate_synthetic(MotionArchetype::make(a, reps, period, 0.0), kDefaultFps, seed);

        ++clean;
        const auto passthrough = preprocess(still.sequence);
        if (passthrough.log.empty() && serialize_sequence(passthrough.sequence) == serialize_sequence(still.sequence))
            ++clean_identical;

        std::vector<KeypointId> stationary;
        for (std::size_t k = 0; k < kNumKeypoints; ++k) {
            const auto id = static_cast<KeypointId>(k);
            if (std::find(noisy.truth.moving_keypoints.begin(), noisy.truth.moving_keypoints.end(), id) ==
                noisy.truth.moving_keypoints.end())
                stationary.push_back(id);
        }
        const std::size_t n = noisy.sequence.size();
        CorruptionSpec cs;
        cs.seed = seed + 1;
        cs.spike_count = 2;
        cs.drift_runs.push_back({10 + static_cast<std::size_t>(rng() % (n - 30)), 4, 40.0,
                                 stationary[static_cast<std::size_t>(rng() % stationary.size())]});
        const auto corrupted = inject_corruptions(noisy.sequence, cs);
        const auto repaired = preprocess(corrupted.sequence);

        std::set<std::pair<std::size_t, std::size_t>> touched;
        for (const auto& e : repaired.log) touched.insert({e.frame, index_of(e.keypoint)});
        for (const auto& c : corrupted.corruptions) {
            const auto k = index_of(c.keypoint);
            const Vec2 truth = noisy.sequence.position(c.frame, k);
            const double before = distance(corrupted.sequence.position(c.frame, k), truth);
            const double after = distance(repaired.sequence.position(c.frame, k), truth);
            if (c.kind == CorruptionKind::spike) {
                ++spikes;
                if (touched.contains({c.frame, k}) && after < before) ++spikes_fixed;
            } else {
                ++drift_frames;
                if (after < before) ++drift_improved;
            }
        }
    }
    o.pass = spikes_fixed == spikes && drift_improved == drift_frames && clean_identical == clean;
    o.detail = "spikes " + std::to_string(spikes_fixed) + "/" + std::to_string(spikes) + ", drift frames improved " +
               std::to_string(drift_improved) + "/" + std::to_string(drift_frames) + ", clean identical " +
               std::to_string(clean_identical) + "/" + std::to_string(clean);
    return o;
}

// ---------------------------------------------------------------------------

std::string pipeline_transcript() {
    CorpusSpec spec;
    spec.count_per_archetype = 2;
    const auto items = counting_corpus(spec);
    const auto& sample = items.front().sequence;
    std::vector<PoseSequence> wrong;
    for (std::size_t i = 2; i < items.size(); i += 2) wrong.push_back(preprocess(items[i].sequence).sequence);
    const auto prepared = preprocess(sample).sequence;
    const auto profile = calibrate(prepared, wrong, default_angle_defs());
    std::string out = serialize_profile(profile);
    for (const auto& item : items) {
        const auto r = preprocess(item.sequence);
        out += serialize_sequence(r.sequence) + format_repair_log(r.log);
        out += service::to_json(analyze(item.sequence, prepared, profile)).dump() + "\n";
    }
    return out;
}

std::string service_transcript(const service::MonitorService& svc) {
    std::string out;
    for (const auto& u : svc.results("patient-01", "squat")) out += service::to_json(u).dump() + "\n";
    for (int day = 0; day < 8; ++day) {
        const auto d = service::add_days(kDay1, day);
        out += service::to_json(svc.daily_rollup("patient-01", "squat", d)).dump() +
               fmt(" %.17g\n", svc.completion_rate("patient-01", "squat", d));
    }
    for (const auto& n : svc.notifications("patient-01")) out += service::to_json(n).dump() + "\n";
    return out;
}

bool same_tree(const fs::path& a, const fs::path& b) {
    std::set<std::string> names_a, names_b;
    for (const auto& e : fs::recursive_directory_iterator(a)) names_a.insert(fs::relative(e.path(), a).string());
    for (const auto& e : fs::recursive_directory_iterator(b)) names_b.insert(fs::relative(e.path(), b).string());
    if (names_a != names_b) return false;
    for (const auto& name : names_a)
        if (fs::is_regular_file(a / name) && read_file((a / name).string()) != read_file((b / name).string()))
            return false;
    return true;
}

Outcome determinism() {
    Outcome o;
    const bool pipeline_same = pipeline_transcript() == pipeline_transcript();

    const auto root = fs::temp_directory_path() / ("rehab-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(root);
    bool log_same = false, outputs_same = false;
    {
        service::MonitorService original(service::RecordStore::open(root / "original"));
        drive_week(original);
        original.notification_check(service::add_days(kDay1, 6));

        service::MonitorService replayed(service::RecordStore::open(root / "replayed"));
        service::replay(original, replayed);
        const service::MonitorService reopened(service::RecordStore::open(root / "original"));

        log_same = same_tree(root / "original", root / "replayed");
        const auto t = service_transcript(original);
        outputs_same = t == service_transcript(replayed) && t == service_transcript(reopened);
    }
    fs::remove_all(root);

    o.pass = pipeline_same && log_same && outputs_same;
    o.detail = std::string("pipeline rerun ") + (pipeline_same ? "identical" : "DIFFERS") + ", replayed store " +
               (log_same ? "identical" : "DIFFERS") + ", service outputs " + (outputs_same ? "identical" : "DIFFER");
    return o;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        double budget_s;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"metric arithmetic fixtures", 1.0, metric_fixtures},
        {"checkpoint replay of the worked example", 5.0, week_replay},
        {"repetition soft accuracy >= 0.90", 60.0, repetition_accuracy_corpus},
        {"similarity F1 >= 0.90 at T=0.2 and >= F1 at T=0.5", 120.0, similarity_f1},
        {"oracle suites", 60.0, oracle_suites},
        {"preprocessing properties", 60.0, preprocessing_properties},
        {"determinism and replay", 60.0, determinism},
    };
    int failures = 0;
    int number = 0;
    for (const auto& c : criteria) {
        ++number;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.budget_s) {
            o.pass = false;
            o.detail += "; over the " + fmt("%.0f", c.budget_s) + " s budget";
        }
        failures += !o.pass;
        std::printf("%s %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", number, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
