#pragma once

// Robust per-fiber anomaly scoring. Each mode-2 (weeks) fiber of the sparse
// tensor gets an exact univariate MCD fit; elements are scored by their
// squared robust z-score.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stsad/tensor.hpp"

namespace stsad {

struct McdFit {
    double location = 0.0;
    double scale = 0.0;     // consistency-corrected
    double raw_scale = 0.0; // standard deviation of the selected window
    std::size_t start = 0;  // window start in sorted order
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

} // namespace detail

/// Factor turning the standard deviation of the central `coverage` fraction
/// of a normal sample into the full-sample standard deviation:
/// 1 / sqrt(1 - 2 z phi(z) / coverage), with z the two-sided quantile.
inline double mcd_consistency_factor(double coverage) {
    if (!(coverage > 0.0) || coverage > 1.0)
        throw std::invalid_argument("mcd_consistency_factor: coverage must be in (0, 1]");
    if (coverage == 1.0)
        return 1.0;
    // Solve 2 Phi(z) - 1 = coverage by bisection.
    double lo = 0.0, hi = 40.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (2.0 * detail::normal_cdf(mid) - 1.0 < coverage)
            lo = mid;
        else
            hi = mid;
    }
    const double z = 0.5 * (lo + hi);
    const double truncated_var = 1.0 - 2.0 * z * detail::normal_pdf(z) / coverage;
    return 1.0 / std::sqrt(truncated_var);
}

/// Exact univariate Minimum Covariance Determinant: the h-subset with the
/// smallest variance is a contiguous window of the sorted sample. Ties go to
/// the lowest window start. Scales use the population (1/h) variance.
inline McdFit univariate_mcd(std::span<const double> x, std::size_t h) {
    const std::size_t n = x.size();
    if (n < 2)
        throw std::invalid_argument("univariate_mcd: need at least 2 values");
    if (h < 2 || h > n)
        throw std::invalid_argument("univariate_mcd: h=" + std::to_string(h) +
                                    " outside [2, " + std::to_string(n) + "]");
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());

    // Two-pass variance of one window.
    auto exact = [&](std::size_t s, double &mean) {
        const auto first = sorted.begin() + static_cast<std::ptrdiff_t>(s);
        const auto last = first + static_cast<std::ptrdiff_t>(h);
        mean = std::accumulate(first, last, 0.0) / static_cast<double>(h);
        double ss = 0.0;
        for (auto it = first; it != last; ++it)
            ss += (*it - mean) * (*it - mean);
        return ss / static_cast<double>(h);
    };

    // Screen all windows with prefix sums of centred values, then settle the
    // near-minimal ones exactly so rounding cannot change the winner.
    const double centre = sorted[n / 2];
    std::vector<double> sum(n + 1, 0.0), sq(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = sorted[i] - centre;
        sum[i + 1] = sum[i] + d;
        sq[i + 1] = sq[i] + d * d;
    }
    const std::size_t windows = n - h + 1;
    std::vector<double> approx(windows);
    double min_approx = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < windows; ++s) {
        const double m = (sum[s + h] - sum[s]) / static_cast<double>(h);
        approx[s] = std::max(0.0, (sq[s + h] - sq[s]) / static_cast<double>(h) - m * m);
        min_approx = std::min(min_approx, approx[s]);
    }
    const double slack = 1e-9 * sq[n] / static_cast<double>(h) + 1e-300;

    McdFit best;
    double best_var = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < windows; ++s) {
        if (approx[s] > min_approx + slack)
            continue;
        double mean = 0.0;
        const double var = exact(s, mean);
        if (var < best_var) {
            best_var = var;
            best.location = mean;
            best.start = s;
        }
    }
    best.raw_scale = std::sqrt(best_var);
    best.scale = best.raw_scale *
                 mcd_consistency_factor(static_cast<double>(h) / static_cast<double>(n));
    return best;
}

/// Score assigned when a fiber's robust scale is zero and the value differs
/// from its location.
inline constexpr double kDegenerateScore = 1e12;

/// Squared standardized distance with the zero-scale convention.
inline double robust_score(double value, const McdFit &fit) {
    if (fit.scale <= 1e-12)
        return value == fit.location ? 0.0 : kDegenerateScore;
    const double z = (value - fit.location) / fit.scale;
    return std::min(z * z, kDegenerateScore);
}

struct FiberScoreField {
    DenseTensor scores;
    /// One fit per fiber, indexed by i1 + I1*(i2 + I2*i4).
    std::vector<McdFit> fits;
};

/// Fits every mode-2 (third-mode) fiber of an order-4 tensor with
/// univariate_mcd using h = max(2, floor(h_fraction * I_3)).
inline FiberScoreField score_sparse_tensor(const DenseTensor &s, double h_fraction = 0.75) {
    if (s.order() != 4)
        throw std::invalid_argument("score_sparse_tensor: expected an order-4 tensor, got order " +
                                    std::to_string(s.order()));
    const std::size_t i1 = s.dim(0), i2 = s.dim(1), i3 = s.dim(2), i4 = s.dim(3);
    if (i3 < 4)
        throw std::invalid_argument("score_sparse_tensor: mode-3 length must be >= 4");
    if (!(h_fraction > 0.0) || h_fraction > 1.0)
        throw std::invalid_argument("score_sparse_tensor: h_fraction must be in (0, 1]");
    const auto h = std::max<std::size_t>(
        2, static_cast<std::size_t>(std::floor(h_fraction * static_cast<double>(i3))));

    FiberScoreField field{DenseTensor(s.dims()), {}};
    field.fits.resize(i1 * i2 * i4);
    const std::size_t stride = i1 * i2;
    std::vector<double> fiber(i3);
    for (std::size_t d = 0; d < i4; ++d)
        for (std::size_t b = 0; b < stride; ++b) {
            const std::size_t base = b + stride * i3 * d;
            for (std::size_t k = 0; k < i3; ++k)
                fiber[k] = s[base + stride * k];
            const McdFit fit = univariate_mcd(fiber, h);
            field.fits[b + stride * d] = fit;
            for (std::size_t k = 0; k < i3; ++k)
                field.scores[base + stride * k] = robust_score(fiber[k], fit);
        }
    return field;
}

inline std::size_t top_k_count(double k_percent, std::size_t total) {
    if (!(k_percent > 0.0) || k_percent > 100.0)
        throw std::invalid_argument("top_k: K must be in (0, 100], got " + std::to_string(k_percent));
    const double exact = k_percent / 100.0 * static_cast<double>(total);
    auto count = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
    return std::clamp<std::size_t>(count, 1, total);
}

/// Position of a flat (first-index-fastest) index in lexicographic
/// (i_1, i_2, ..., i_N) order.
inline std::size_t lexicographic_rank(const Dims &dims, std::size_t flat) {
    std::size_t rank = 0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const std::size_t idx = flat % dims[k];
        flat /= dims[k];
        std::size_t weight = 1;
        for (std::size_t j = k + 1; j < dims.size(); ++j)
            weight *= dims[j];
        rank += idx * weight;
    }
    return rank;
}

/// Marks the ceil(K% * size) highest scores; ties at the cutoff go to the
/// lexicographically smaller index.
inline SupportMask top_k_mask(const DenseTensor &scores, double k_percent) {
    const std::size_t count = top_k_count(k_percent, scores.size());
    std::vector<std::size_t> lex(scores.size());
    for (std::size_t i = 0; i < lex.size(); ++i)
        lex[i] = lexicographic_rank(scores.dims(), i);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b])
            return scores[a] > scores[b];
        return lex[a] < lex[b];
    });
    SupportMask mask(scores.dims(), false);
    for (std::size_t i = 0; i < count; ++i)
        mask.set(order[i], true);
    return mask;
}

inline SupportMask top_k_mask(const FiberScoreField &field, double k_percent) {
    return top_k_mask(field.scores, k_percent);
}

} // namespace stsad
