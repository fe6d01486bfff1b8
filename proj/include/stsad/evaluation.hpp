#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stsad/admm.hpp"
#include "stsad/scoring.hpp"
#include "stsad/tensor.hpp"

namespace stsad {

struct LabeledScores {
    std::vector<double> scores;
    std::vector<unsigned char> labels; // 1 = anomalous
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;

    void push(double score, bool label) {
        scores.push_back(score);
        labels.push_back(label ? 1 : 0);
        ++(label ? n_pos : n_neg);
    }
};

/// Pairs scores with labels over the observed entries only.
inline LabeledScores label_scores(const DenseTensor &scores, const SupportMask &labels,
                                  const SupportMask &observed) {
    if (scores.dims() != labels.dims() || scores.dims() != observed.dims())
        throw std::invalid_argument("label_scores: shapes of scores, labels and mask differ");
    LabeledScores ls;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (observed[i])
            ls.push(scores[i], labels[i]);
    return ls;
}

/// Mann-Whitney AUC with midranks for ties, O(n log n).
inline double roc_auc(const LabeledScores &ls) {
    if (ls.n_pos == 0 || ls.n_neg == 0)
        throw std::invalid_argument("roc_auc: both classes must be present");
    const std::size_t n = ls.scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ls.scores[a] < ls.scores[b]; });
    // Twice the rank sum keeps midranks integral.
    std::size_t twice_rank_sum = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && ls.scores[order[j]] == ls.scores[order[i]])
            ++j;
        const std::size_t twice_midrank = i + 1 + j; // (i+1 + j) / 2 * 2
        for (std::size_t k = i; k < j; ++k)
            if (ls.labels[order[k]])
                twice_rank_sum += twice_midrank;
        i = j;
    }
    const std::size_t twice_u = twice_rank_sum - ls.n_pos * (ls.n_pos + 1);
    return (static_cast<double>(twice_u) / 2.0) /
           (static_cast<double>(ls.n_pos) * static_cast<double>(ls.n_neg));
}

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

/// ROC curve, one point per distinct score threshold (descending), starting
/// at (0, 0).
inline std::vector<RocPoint> roc_curve(const LabeledScores &ls) {
    if (ls.n_pos == 0 || ls.n_neg == 0)
        throw std::invalid_argument("roc_curve: both classes must be present");
    std::vector<std::size_t> order(ls.scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ls.scores[a] > ls.scores[b]; });
    std::vector<RocPoint> curve{{0.0, 0.0}};
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && ls.scores[order[j]] == ls.scores[order[i]]) {
            ++(ls.labels[order[j]] ? tp : fp);
            ++j;
        }
        curve.push_back({static_cast<double>(fp) / static_cast<double>(ls.n_neg),
                         static_cast<double>(tp) / static_cast<double>(ls.n_pos)});
        i = j;
    }
    return curve;
}

struct Event {
    std::string name;
    std::vector<std::size_t> indices; // flat element indices
};

using EventList = std::vector<Event>;

/// Number of events with at least one element inside the top-K% mask, per K.
inline std::vector<std::size_t> detection_at_k(const DenseTensor &scores, const EventList &events,
                                               const std::vector<double> &k_list) {
    if (events.empty())
        throw std::invalid_argument("detection_at_k: event list is empty");
    for (const auto &e : events) {
        if (e.indices.empty())
            throw std::invalid_argument("detection_at_k: event '" + e.name + "' has no elements");
        for (std::size_t idx : e.indices)
            if (idx >= scores.size())
                throw std::invalid_argument("detection_at_k: event '" + e.name +
                                            "' index out of bounds");
    }
    std::vector<std::size_t> detected;
    detected.reserve(k_list.size());
    for (double k : k_list) {
        const SupportMask top = top_k_mask(scores, k);
        std::size_t count = 0;
        for (const auto &e : events)
            if (std::any_of(e.indices.begin(), e.indices.end(),
                            [&](std::size_t i) { return top[i]; }))
                ++count;
        detected.push_back(count);
    }
    return detected;
}

inline std::vector<std::size_t> detection_at_k(const FiberScoreField &field,
                                               const EventList &events,
                                               const std::vector<double> &k_list) {
    return detection_at_k(field.scores, events, k_list);
}

/// A method under benchmark: maps (data, observed) to per-element scores.
struct BenchSolver {
    std::string name;
    std::function<DenseTensor(const DenseTensor &, const SupportMask &)> run;
};

struct BenchInstance {
    DenseTensor data;
    SupportMask observed;
    SupportMask labels;
};

struct BenchRow {
    std::string method;
    double auc_mean = 0.0;
    double auc_std = 0.0;
    double time_mean_s = 0.0;
    double time_std_s = 0.0;
    std::size_t successes = 0;
    std::size_t failures = 0;
    std::vector<double> aucs;
    std::vector<double> times;
};

inline std::pair<double, double> mean_std(const std::vector<double> &v) {
    if (v.empty())
        return {0.0, 0.0};
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2)
        return {mean, 0.0};
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

/// Runs each solver `repeats` times on the same instance, sequentially, and
/// reports mean and sample standard deviation of AUC and wall time. Failed
/// repeats are counted and left out of the statistics.
inline std::vector<BenchRow> benchmark_timing(const std::vector<BenchSolver> &solvers,
                                              const BenchInstance &instance,
                                              std::size_t repeats) {
    if (repeats < 2)
        throw std::invalid_argument("benchmark_timing: repeats must be >= 2");
    std::vector<BenchRow> rows;
    for (const auto &solver : solvers) {
        BenchRow row;
        row.method = solver.name;
        for (std::size_t r = 0; r < repeats; ++r) {
            try {
                admm::Stopwatch clock;
                const DenseTensor scores = solver.run(instance.data, instance.observed);
                const double elapsed = clock.seconds();
                const double auc =
                    roc_auc(label_scores(scores, instance.labels, instance.observed));
                row.times.push_back(elapsed);
                row.aucs.push_back(auc);
                ++row.successes;
            } catch (const std::exception &) {
                ++row.failures;
            }
        }
        std::tie(row.auc_mean, row.auc_std) = mean_std(row.aucs);
        std::tie(row.time_mean_s, row.time_std_s) = mean_std(row.times);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace stsad
