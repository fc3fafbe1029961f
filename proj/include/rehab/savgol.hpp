#pragma once

// Savitzky-Golay smoothing: each output sample is the value at the window centre
// of the least-squares polynomial fitted to the surrounding window. Samples
// closer than half a window to either end are taken from the polynomial fitted
// to the first (or last) full window, so the output has the input's length.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "rehab/error.hpp"

namespace rehab {

struct SmoothingParams {
    int window = 11;
    int polyorder = 3;

    void validate() const {
        if (window < 3 || window % 2 == 0)
            throw Error(ErrorKind::validation, "smoothing window must be odd and >= 3");
        if (polyorder < 0 || polyorder >= window)
            throw Error(ErrorKind::validation, "polynomial order must lie in [0, window)");
    }
};

namespace detail {

// Projection onto polynomials of degree <= polyorder sampled at offsets
// -half..half: row i gives the fitted value at offset i - half.
inline Eigen::MatrixXd savgol_hat_matrix(const SmoothingParams& p) {
    p.validate();
    const int half = p.window / 2;
    Eigen::MatrixXd vander(p.window, p.polyorder + 1);
    for (int i = 0; i < p.window; ++i) {
        double x = 1.0;
        for (int j = 0; j <= p.polyorder; ++j) {
            vander(i, j) = x;
            x *= static_cast<double>(i - half);
        }
    }
    const Eigen::MatrixXd pinv = vander.completeOrthogonalDecomposition().pseudoInverse();
    return vander * pinv;
}

}  // namespace detail

inline std::vector<double> sg_coefficients(int window, int polyorder) {
    const SmoothingParams p{window, polyorder};
    const Eigen::MatrixXd hat = detail::savgol_hat_matrix(p);
    const Eigen::VectorXd centre = hat.row(window / 2);
    return {centre.data(), centre.data() + centre.size()};
}

inline std::vector<double> savitzky_golay(std::span<const double> series, const SmoothingParams& p = {}) {
    p.validate();
    const auto n = static_cast<int>(series.size());
    if (n < p.window) throw Error(ErrorKind::validation, "series shorter than smoothing window");

    const Eigen::MatrixXd hat = detail::savgol_hat_matrix(p);
    const int half = p.window / 2;
    std::vector<double> out(series.size());

    for (int i = half; i < n - half; ++i) {
        double acc = 0.0;
        for (int j = 0; j < p.window; ++j) acc += hat(half, j) * series[static_cast<std::size_t>(i - half + j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
    for (int i = 0; i < half; ++i) {
        double head = 0.0, tail = 0.0;
        const int tail_row = p.window - half + i;
        for (int j = 0; j < p.window; ++j) {
            head += hat(i, j) * series[static_cast<std::size_t>(j)];
            tail += hat(tail_row, j) * series[static_cast<std::size_t>(n - p.window + j)];
        }
        out[static_cast<std::size_t>(i)] = head;
        out[static_cast<std::size_t>(n - half + i)] = tail;
    }
    return out;
}

}  // namespace rehab
