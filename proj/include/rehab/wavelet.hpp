#pragma once

// Peak detection by continuous wavelet transform (CWT) ridge lines.
//
// The series is convolved with Ricker wavelets of widths 1..W. Local maxima of
// each row are chained from the widest row down to the narrowest, a maximum
// joining the nearest ridge within width/4 columns. Ridges that miss more than
// gap_threshold consecutive rows are closed. A ridge is kept when it spans at
// least min_ridge_length rows and its largest coefficient stands out from the
// local noise floor (a low percentile of the width-1 coefficients) by min_snr.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "rehab/error.hpp"

namespace rehab {

struct PeakParams {
    int max_width = 0;          // 0 selects max(1, floor(N / 10))
    int gap_threshold = 2;
    int min_ridge_length = 0;   // 0 selects ceil(max_width / 4)
    double min_snr = 1.0;
    double noise_percentile = 10.0;

    int resolved_max_width(std::size_t n) const {
        return max_width > 0 ? max_width : std::max(1, static_cast<int>(n / 10));
    }
    int resolved_min_length(std::size_t n) const {
        if (min_ridge_length > 0) return min_ridge_length;
        return (resolved_max_width(n) + 3) / 4;
    }
    void validate() const {
        if (max_width < 0 || gap_threshold < 1 || min_ridge_length < 0 || !(min_snr > 0.0) ||
            !(noise_percentile > 0.0 && noise_percentile <= 100.0))
            throw Error(ErrorKind::validation, "peak parameters must be positive");
    }
};

// Mexican-hat wavelet with unit L2 norm.
inline double ricker(double x, double width) {
    const double a = 2.0 / (std::sqrt(3.0 * width) * std::pow(std::numbers::pi, 0.25));
    const double r = x * x / (width * width);
    return a * (1.0 - r) * std::exp(-0.5 * r);
}

using CwtMatrix = std::vector<std::vector<double>>;  // [width index][sample]

// The series is mirrored about its end samples, so a boundary sample is never
// an interior maximum of any row.
inline CwtMatrix cwt(std::span<const double> series, int max_width) {
    const auto n = static_cast<long>(series.size());
    CwtMatrix out(static_cast<std::size_t>(max_width), std::vector<double>(series.size(), 0.0));
    if (n == 0) return out;

    auto extended = [&](long i) {
        if (i < 0) return series[static_cast<std::size_t>(-i)];
        if (i >= n) return series[static_cast<std::size_t>(2 * (n - 1) - i)];
        return series[static_cast<std::size_t>(i)];
    };

    for (int w = 1; w <= max_width; ++w) {
        const long half = std::min<long>(static_cast<long>(std::ceil(5.0 * w)), n - 1);
        std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1));
        for (long j = -half; j <= half; ++j)
            kernel[static_cast<std::size_t>(j + half)] = ricker(static_cast<double>(j), w);
        auto& row = out[static_cast<std::size_t>(w - 1)];
        for (long i = 0; i < n; ++i) {
            double acc = 0.0;
            for (long j = -half; j <= half; ++j) acc += kernel[static_cast<std::size_t>(j + half)] * extended(i + j);
            row[static_cast<std::size_t>(i)] = acc;
        }
    }
    return out;
}

struct RidgeLine {
    std::vector<int> rows;  // ascending width index
    std::vector<int> cols;
};

namespace detail {

// Interior local maxima; a flat top reports its middle sample (left of centre
// for an even run).
inline std::vector<int> row_maxima(const std::vector<double>& row) {
    std::vector<int> cols;
    const std::size_t n = row.size();
    std::size_t i = 1;
    while (i + 1 < n) {
        if (row[i] > row[i - 1]) {
            std::size_t j = i;
            while (j + 1 < n && row[j + 1] == row[i]) ++j;
            if (j + 1 < n && row[j + 1] < row[i]) cols.push_back(static_cast<int>((i + j) / 2));
            i = j + 1;
        } else {
            ++i;
        }
    }
    return cols;
}

// numpy-style percentile with linear interpolation.
inline double percentile(std::vector<double> v, double pct) {
    std::sort(v.begin(), v.end());
    const double pos = pct / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace detail

inline std::vector<RidgeLine> identify_ridge_lines(const CwtMatrix& m, int gap_threshold) {
    struct Open {
        std::vector<int> rows, cols;
        int gap = 0;
    };
    std::vector<std::vector<int>> maxima;
    maxima.reserve(m.size());
    for (const auto& row : m) maxima.push_back(detail::row_maxima(row));

    int start = -1;
    for (int r = static_cast<int>(m.size()) - 1; r >= 0; --r)
        if (!maxima[static_cast<std::size_t>(r)].empty()) {
            start = r;
            break;
        }
    if (start < 0) return {};

    std::vector<Open> open;
    std::vector<Open> closed;
    for (int c : maxima[static_cast<std::size_t>(start)]) open.push_back({{start}, {c}, 0});

    for (int r = start - 1; r >= 0; --r) {
        for (auto& line : open) ++line.gap;
        const double max_distance = (r + 1) / 4.0;
        std::vector<int> previous;
        previous.reserve(open.size());
        for (const auto& line : open) previous.push_back(line.cols.back());

        for (int c : maxima[static_cast<std::size_t>(r)]) {
            std::size_t best = previous.size();
            int best_diff = 0;
            for (std::size_t i = 0; i < previous.size(); ++i) {
                const int d = std::abs(c - previous[i]);
                if (best == previous.size() || d < best_diff) {
                    best = i;
                    best_diff = d;
                }
            }
            if (best < previous.size() && best_diff <= max_distance) {
                open[best].rows.push_back(r);
                open[best].cols.push_back(c);
                open[best].gap = 0;
            } else {
                open.push_back({{r}, {c}, 0});
            }
        }
        for (std::size_t i = open.size(); i-- > 0;) {
            if (open[i].gap > gap_threshold) {
                closed.push_back(std::move(open[i]));
                open.erase(open.begin() + static_cast<long>(i));
            }
        }
    }
    for (auto& line : open) closed.push_back(std::move(line));

    std::vector<RidgeLine> out;
    out.reserve(closed.size());
    for (auto& line : closed) {
        std::vector<std::size_t> order(line.rows.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return line.rows[a] < line.rows[b]; });
        RidgeLine rl;
        for (auto i : order) {
            rl.rows.push_back(line.rows[i]);
            rl.cols.push_back(line.cols[i]);
        }
        out.push_back(std::move(rl));
    }
    return out;
}

inline std::vector<RidgeLine> filter_ridge_lines(const CwtMatrix& m, const std::vector<RidgeLine>& ridges,
                                                 int min_length, double min_snr, double noise_percentile) {
    const auto& first = m.front();
    const std::size_t n = first.size();
    const std::size_t window = std::max<std::size_t>(1, (n + 19) / 20);
    const std::size_t half = window / 2;
    const std::size_t odd = window % 2;

    std::vector<double> noise(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(i + half + odd, n);
        noise[i] = detail::percentile({first.begin() + static_cast<long>(lo), first.begin() + static_cast<long>(hi)},
                                      noise_percentile);
    }

    std::vector<RidgeLine> kept;
    for (const auto& ridge : ridges) {
        if (static_cast<int>(ridge.rows.size()) < min_length) continue;
        double signal = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < ridge.rows.size(); ++i)
            signal = std::max(signal, m[static_cast<std::size_t>(ridge.rows[i])][static_cast<std::size_t>(ridge.cols[i])]);
        const double floor = noise[static_cast<std::size_t>(ridge.cols.front())];
        const double snr = floor == 0.0 ? (signal == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                        : std::abs(signal / floor);
        if (snr < min_snr) continue;
        kept.push_back(ridge);
    }
    return kept;
}

// Moves `start` uphill on the series for at most `steps` samples and returns it if
// it lands on a local maximum (rising into it, not rising out of it).
inline std::optional<std::size_t> snap_to_local_max(std::span<const double> x, std::size_t start,
                                                    std::size_t steps) {
    std::size_t i = start;
    for (std::size_t s = 0; s < steps; ++s) {
        if (i + 1 < x.size() && x[i + 1] > x[i]) ++i;
        else if (i > 0 && x[i - 1] >= x[i]) --i;
        else break;
    }
    if (i == 0 || i + 1 >= x.size()) return std::nullopt;
    if (x[i] > x[i - 1] && x[i] >= x[i + 1]) return i;
    return std::nullopt;
}

// Sorted, de-duplicated peak positions. Each surviving ridge contributes the
// local maximum of the series nearest to its narrowest-width column.
inline std::vector<std::size_t> cwt_peaks(std::span<const double> series, const PeakParams& params = {}) {
    params.validate();
    if (series.size() < 4) return {};
    const int max_width = params.resolved_max_width(series.size());
    const auto m = cwt(series, max_width);
    const auto ridges = identify_ridge_lines(m, params.gap_threshold);
    const auto kept = filter_ridge_lines(m, ridges, params.resolved_min_length(series.size()),
                                         params.min_snr, params.noise_percentile);

    std::vector<std::size_t> peaks;
    for (const auto& r : kept) {
        const auto steps = static_cast<std::size_t>(r.rows.front()) + 3;
        if (auto p = snap_to_local_max(series, static_cast<std::size_t>(r.cols.front()), steps))
            peaks.push_back(*p);
    }
    std::sort(peaks.begin(), peaks.end());
    peaks.erase(std::unique(peaks.begin(), peaks.end()), peaks.end());
    return peaks;
}

}  // namespace rehab
