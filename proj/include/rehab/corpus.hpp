#pragma once

// Seeded synthetic corpora for the similarity sweep and for repetition counting.
//
// Similarity: per archetype one reference recording, `calibration` incorrect
// videos cycling through the posture faults, `pairs_per_class` correct uploads
// and as many uploads with a random posture fault. Counting: `count_per_archetype`
// recordings with repetitions uniform in [min_reps, max_reps].
//
// Every recording gets its own repetition count, period (16-30 frames),
// amplitude (+-10%) and jitter. With `corrupt` set, each one also receives
// detector-like errors: 3-6 single-frame spikes and 4-8 runs of 2-4 frames
// displaced by 40-80 px.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rehab/pipeline.hpp"
#include "rehab/synthetic.hpp"

namespace rehab {

struct CorpusSpec {
    std::uint64_t seed = 2024;
    double noise_sigma = 2.0;
    bool corrupt = true;
    std::size_t calibration = 50;
    std::size_t pairs_per_class = 5;
    std::size_t count_per_archetype = 10;
    int min_reps = 5;
    int max_reps = 15;
    double fault_min = 0.85;
    double fault_max = 1.0;
};

struct CountItem {
    std::string group;
    PoseSequence sequence;
    int repetitions = 0;
};

struct SimilarityCorpus {
    std::vector<SweepReference> references;
    std::vector<SweepPair> pairs;
};

namespace detail {

class CorpusRng {
public:
    explicit CorpusRng(std::uint64_t seed) : rng_(seed) {}

    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    std::uint64_t seed() { return rng_(); }

private:
    std::mt19937_64 rng_;
};

inline SyntheticVideo recording(CorpusRng& rng, const CorpusSpec& spec, Archetype a, int reps,
                                PoseFault fault = PoseFault::none, double magnitude = 0.0) {
    auto m = MotionArchetype::make(a, reps, rng.integer(16, 30), spec.noise_sigma);
    m.amplitude *= rng.real(0.9, 1.1);
    auto video = generate_synthetic(m, kDefaultFps, rng.seed(), fault, magnitude);
    if (!spec.corrupt) return video;

    CorruptionSpec cs;
    cs.seed = rng.seed();
    cs.spike_count = static_cast<std::size_t>(rng.integer(3, 6));
    const int runs = rng.integer(4, 8);
    const int last_start = static_cast<int>(video.sequence.size()) - 15;
    for (int i = 0; i < runs; ++i) {
        DriftRun d;
        d.length = static_cast<std::size_t>(rng.integer(2, 4));
        d.offset = rng.real(40.0, 80.0);
        d.start = static_cast<std::size_t>(rng.integer(10, last_start));
        cs.drift_runs.push_back(d);
    }
    try {
        video.sequence = inject_corruptions(video.sequence, cs).sequence;
    } catch (const Error&) {
        // Runs that happen to overlap: keep the recording uncorrupted.
    }
    return video;
}

}  // namespace detail

inline SimilarityCorpus similarity_corpus(const CorpusSpec& spec = {}) {
    detail::CorpusRng rng(spec.seed);
    SimilarityCorpus c;
    for (std::size_t ai = 0; ai < kAllArchetypes.size(); ++ai) {
        const auto a = kAllArchetypes[ai];
        auto reps = [&] { return rng.integer(spec.min_reps, spec.max_reps); };
        auto magnitude = [&] { return rng.real(spec.fault_min, spec.fault_max); };

        SweepReference ref{std::string(archetype_name(a)), detail::recording(rng, spec, a, reps()).sequence, {}};
        for (std::size_t i = 0; i < spec.calibration; ++i) {
            const auto fault = kPostureFaults[i % kPostureFaults.size()];
            ref.incorrect.push_back(detail::recording(rng, spec, a, reps(), fault, magnitude()).sequence);
        }
        c.references.push_back(std::move(ref));

        for (std::size_t i = 0; i < spec.pairs_per_class; ++i)
            c.pairs.push_back({detail::recording(rng, spec, a, reps()).sequence, ai, true});
        for (std::size_t i = 0; i < spec.pairs_per_class; ++i) {
            const auto fault = kPostureFaults[static_cast<std::size_t>(rng.integer(0, 5))];
            c.pairs.push_back({detail::recording(rng, spec, a, reps(), fault, magnitude()).sequence, ai, false});
        }
    }
    return c;
}

inline std::vector<CountItem> counting_corpus(const CorpusSpec& spec = {}) {
    detail::CorpusRng rng(spec.seed);
    std::vector<CountItem> items;
    for (auto a : kAllArchetypes) {
        for (std::size_t i = 0; i < spec.count_per_archetype; ++i) {
            const int reps = rng.integer(spec.min_reps, spec.max_reps);
            items.push_back({std::string(archetype_name(a)), detail::recording(rng, spec, a, reps).sequence, reps});
        }
    }
    return items;
}

}  // namespace rehab
