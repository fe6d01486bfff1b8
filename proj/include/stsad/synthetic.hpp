#pragma once

// Ground-truth-labelled synthetic traffic tensors: a week-periodic base
// pattern, multiplicative Gaussian noise, additive interval anomalies along
// the hour mode, and whole missing days (mode-0 fibers).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "stsad/tensor.hpp"

namespace stsad {

struct SynthConfig {
    Dims dims{24, 7, 12, 8};
    double c = 2.5;  // anomaly amplitude multiplier
    std::size_t l = 7; // anomaly interval length (hours)
    double m = 2.3;  // percent of mode-0 fibers with an anomaly
    double P = 0.0;  // percent of mode-0 fibers missing
    std::uint64_t seed = 1;
    double noise_mean = 1.0;
    double noise_var = 0.5;

    void validate(std::size_t hours) const {
        if (!(c > 0.0))
            throw std::invalid_argument("synth: c must be > 0");
        if (l < 1 || l > hours)
            throw std::invalid_argument("synth: l must be in [1, " + std::to_string(hours) + "]");
        if (!(m >= 0.0 && m <= 100.0))
            throw std::invalid_argument("synth: m must be in [0, 100]");
        if (!(P >= 0.0 && P <= 100.0))
            throw std::invalid_argument("synth: P must be in [0, 100]");
        if (!(noise_var >= 0.0))
            throw std::invalid_argument("synth: noise_var must be >= 0");
    }
};

struct InjectedInterval {
    std::size_t fiber = 0; // flat index over modes 1..N-1
    std::size_t start = 0; // 0-based hour
    std::size_t length = 0;
    int sign = 1;
    double shift = 0.0;    // signed value added to every entry
};

struct GroundTruth {
    SupportMask anomaly_mask;
    SupportMask observed;
    std::vector<InjectedInterval> intervals;
};

struct SyntheticInstance {
    DenseTensor data;
    GroundTruth truth;
};

namespace detail {

// Independent stream per (seed, stage) so stages can be re-run in isolation.
inline std::mt19937_64 stage_rng(std::uint64_t seed, std::uint64_t stage) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stage)};
    return std::mt19937_64(seq);
}

inline std::size_t percent_count(double percent, std::size_t total) {
    const double exact = percent / 100.0 * static_cast<double>(total);
    return static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
}

// k distinct indices from [0, total), uniformly, via partial Fisher-Yates.
inline std::vector<std::size_t> choose_distinct(std::size_t total, std::size_t k,
                                                std::mt19937_64 &rng) {
    std::vector<std::size_t> pool(total);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, total - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(k);
    return pool;
}

inline void require_order4(const DenseTensor &t, const char *what) {
    if (t.order() != 4)
        throw std::invalid_argument(std::string(what) + ": expected an order-4 tensor");
}

} // namespace detail

/// Positive smooth week-periodic traffic pattern: two daily harmonics per
/// zone with zone-specific amplitude and phase, damped on weekends. Constant
/// along mode 2 (weeks).
inline DenseTensor builtin_template(const Dims &dims) {
    if (dims.size() != 4)
        throw std::invalid_argument("builtin_template: dims must have 4 entries");
    DenseTensor t(dims);
    const double hours = static_cast<double>(dims[0]);
    for (std::size_t z = 0; z < dims[3]; ++z) {
        const double golden = std::fmod(0.6180339887498949 * static_cast<double>(z + 1), 1.0);
        const double amplitude = 10.0 + 90.0 * golden;
        const double phase1 = 2.0 * std::numbers::pi * std::fmod(0.381966 * (z + 1.0), 1.0);
        const double phase2 = 2.0 * std::numbers::pi * std::fmod(0.7548776 * (z + 1.0), 1.0);
        for (std::size_t w = 0; w < dims[2]; ++w)
            for (std::size_t d = 0; d < dims[1]; ++d) {
                const double day = d >= 5 ? 0.7 : 1.0;
                for (std::size_t h = 0; h < dims[0]; ++h) {
                    const double x = 2.0 * std::numbers::pi * static_cast<double>(h) / hours;
                    const double shape =
                        1.0 + 0.5 * std::sin(x + phase1) + 0.3 * std::sin(2.0 * x + phase2);
                    t.at({h, d, w, z}) = amplitude * day * shape;
                }
            }
    }
    return t;
}

/// Averages the template across mode 2 and tiles the mean back.
inline DenseTensor generate_base(const DenseTensor &templ) {
    detail::require_order4(templ, "generate_base");
    const std::size_t inner = templ.dim(0) * templ.dim(1);
    const std::size_t weeks = templ.dim(2);
    DenseTensor out(templ.dims());
    for (std::size_t z = 0; z < templ.dim(3); ++z)
        for (std::size_t b = 0; b < inner; ++b) {
            const std::size_t base = b + inner * weeks * z;
            double sum = 0.0;
            for (std::size_t w = 0; w < weeks; ++w)
                sum += templ[base + inner * w];
            const double mean = sum / static_cast<double>(weeks);
            for (std::size_t w = 0; w < weeks; ++w)
                out[base + inner * w] = mean;
        }
    return out;
}

/// Multiplies every entry by an independent N(mean, var) draw.
inline DenseTensor inject_noise(const DenseTensor &t, std::uint64_t seed, double mean = 1.0,
                                double var = 0.5) {
    auto rng = detail::stage_rng(seed, 1);
    std::normal_distribution<double> noise(mean, std::sqrt(var));
    DenseTensor out(t.dims());
    for (std::size_t i = 0; i < t.size(); ++i)
        out[i] = t[i] * noise(rng);
    return out;
}

struct AnomalyInjection {
    DenseTensor data;
    SupportMask labels;
    std::vector<InjectedInterval> intervals;
};

/// Adds sign * c * mean(interval) to an l-hour window of ceil(m% of fibers)
/// distinct mode-0 fibers. Windows never wrap past the last hour.
inline AnomalyInjection inject_anomalies(const DenseTensor &t, double c, std::size_t l, double m,
                                         std::uint64_t seed) {
    const std::size_t hours = t.dim(0);
    if (!(c > 0.0))
        throw std::invalid_argument("inject_anomalies: c must be > 0");
    if (l < 1 || l > hours)
        throw std::invalid_argument("inject_anomalies: l out of range");
    if (!(m >= 0.0))
        throw std::invalid_argument("inject_anomalies: m must be >= 0");
    const std::size_t fibers = t.size() / hours;
    const std::size_t count = detail::percent_count(m, fibers);
    if (count > fibers)
        throw std::invalid_argument("inject_anomalies: m=" + std::to_string(m) +
                                    "% needs more distinct fibers than exist");
    auto rng = detail::stage_rng(seed, 2);
    AnomalyInjection out{t, SupportMask(t.dims(), false), {}};
    const auto chosen = detail::choose_distinct(fibers, count, rng);
    std::uniform_int_distribution<std::size_t> start_dist(0, hours - l);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t fiber : chosen) {
        InjectedInterval iv;
        iv.fiber = fiber;
        iv.start = start_dist(rng);
        iv.length = l;
        iv.sign = coin(rng) ? 1 : -1;
        const std::size_t base = fiber * hours;
        double sum = 0.0;
        for (std::size_t h = iv.start; h < iv.start + l; ++h)
            sum += t[base + h];
        iv.shift = iv.sign * c * (sum / static_cast<double>(l));
        for (std::size_t h = iv.start; h < iv.start + l; ++h) {
            out.data[base + h] += iv.shift;
            out.labels.set(base + h, true);
        }
        out.intervals.push_back(iv);
    }
    return out;
}

struct MissingInjection {
    DenseTensor data;
    SupportMask observed;
    std::vector<std::size_t> missing_fibers;
};

/// Zeroes ceil(P% of mode-0 fibers) and clears them from the support.
inline MissingInjection apply_missing(const DenseTensor &t, double P, std::uint64_t seed) {
    if (!(P >= 0.0 && P <= 100.0))
        throw std::invalid_argument("apply_missing: P must be in [0, 100]");
    const std::size_t hours = t.dim(0);
    const std::size_t fibers = t.size() / hours;
    auto rng = detail::stage_rng(seed, 3);
    MissingInjection out{t, SupportMask(t.dims(), true), {}};
    out.missing_fibers = detail::choose_distinct(fibers, detail::percent_count(P, fibers), rng);
    std::sort(out.missing_fibers.begin(), out.missing_fibers.end());
    for (std::size_t fiber : out.missing_fibers)
        for (std::size_t h = 0; h < hours; ++h) {
            out.data[fiber * hours + h] = 0.0;
            out.observed.set(fiber * hours + h, false);
        }
    return out;
}

/// base -> noise -> anomalies -> missing fibers.
inline SyntheticInstance synthesize(const DenseTensor &templ, const SynthConfig &cfg) {
    detail::require_order4(templ, "synthesize");
    cfg.validate(templ.dim(0));
    const DenseTensor base = generate_base(templ);
    const DenseTensor noisy = inject_noise(base, cfg.seed, cfg.noise_mean, cfg.noise_var);
    AnomalyInjection anomalous = inject_anomalies(noisy, cfg.c, cfg.l, cfg.m, cfg.seed);
    MissingInjection missing = apply_missing(anomalous.data, cfg.P, cfg.seed);
    return {std::move(missing.data),
            {std::move(anomalous.labels), std::move(missing.observed),
             std::move(anomalous.intervals)}};
}

inline SyntheticInstance synthesize(const SynthConfig &cfg) {
    return synthesize(builtin_template(cfg.dims), cfg);
}

} // namespace stsad
