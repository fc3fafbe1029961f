#pragma once

// Independent reference computations used by the unit tests and the acceptance
// binary. None of them call the code they check.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[pivot][c])) pivot = r;
        std::swap(a[c], a[pivot]);
        std::swap(b[c], b[pivot]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

// Centre-point smoothing weights from the normal equations (V^T V) c = V^T y:
// weight j is the fitted value at offset 0 when y is the j-th unit vector.
inline std::vector<double> savgol_weights(int window, int polyorder) {
    const int half = window / 2;
    const auto m = static_cast<std::size_t>(polyorder + 1);
    std::vector<std::vector<double>> ata(m, std::vector<double>(m, 0.0));
    for (int i = -half; i <= half; ++i)
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) ata[r][c] += std::pow(i, static_cast<double>(r + c));
    std::vector<double> w;
    for (int j = -half; j <= half; ++j) {
        std::vector<double> aty(m);
        for (std::size_t r = 0; r < m; ++r) aty[r] = std::pow(j, static_cast<double>(r));
        w.push_back(solve(ata, aty)[0]);  // coefficient of x^0 = value at offset 0
    }
    return w;
}

// Indices where the first difference changes from positive to non-positive.
inline std::vector<std::size_t> zero_crossing_peaks(const std::vector<double>& x) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i + 1 < x.size(); ++i)
        if (x[i] - x[i - 1] > 0.0 && x[i + 1] - x[i] <= 0.0) out.push_back(i);
    return out;
}

// k full cycles of amplitude * (1 - cos(2 pi t / period)), t = 0..k*period.
inline std::vector<double> cosine_cycles(int cycles, int period, double amplitude = 50.0) {
    std::vector<double> x(static_cast<std::size_t>(cycles * period + 1));
    for (std::size_t t = 0; t < x.size(); ++t)
        x[t] = amplitude * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(t) / period));
    return x;
}

// D(p || q) = sum p_i log(p_i / q_i), term by term.
inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) d += p[i] * (std::log(p[i]) - std::log(q[i]));
    return d;
}

// Counts per bin by scanning each bin's interval [i*pi/B, (i+1)*pi/B), the last
// bin closed, then smoothed and renormalised.
inline std::vector<double> histogram(const std::vector<double>& values, std::size_t bins, double epsilon) {
    std::vector<double> h(bins, 0.0);
    std::size_t used = 0;
    for (double v : values) {
        if (std::isnan(v)) continue;
        ++used;
        for (std::size_t i = 0; i < bins; ++i) {
            const double lo = std::numbers::pi * static_cast<double>(i) / static_cast<double>(bins);
            const double hi = std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(bins);
            if ((v >= lo && v < hi) || (i + 1 == bins && v >= lo) || (i == 0 && v < lo)) {
                h[i] += 1.0;
                break;
            }
        }
    }
    double total = 0.0;
    for (auto& c : h) {
        c = c / static_cast<double>(used) + epsilon;
        total += c;
    }
    for (auto& c : h) c /= total;
    return h;
}

// Confusion counts (tp, fp, fn) whose precision and recall round to the given
// three-decimal values; the smallest tp that works.
struct Counts {
    std::size_t tp = 0, fp = 0, fn = 0;
};

inline Counts counts_for(double precision, double recall) {
    for (std::size_t tp = 1; tp < 100000; ++tp) {
        const double t = static_cast<double>(tp);
        const auto fp = static_cast<std::size_t>(std::llround(t / precision - t));
        const auto fn = static_cast<std::size_t>(std::llround(t / recall - t));
        const double p = t / static_cast<double>(tp + fp), r = t / static_cast<double>(tp + fn);
        if (std::abs(p - precision) < 5e-4 && std::abs(r - recall) < 5e-4) return {tp, fp, fn};
    }
    return {};
}

}  // namespace oracle
