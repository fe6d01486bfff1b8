#pragma once

// Building blocks shared by the graph-regularized solver and the
// nuclear-norm baselines: parameters, the sparse/temporal-smoothness block
// updates, residual bookkeeping and the result type.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stsad/tensor.hpp"

namespace stsad {

struct AdmmParams {
    double theta = 1.0;  // low-rank weight
    double lambda = 0.0; // l1 weight on S
    double gamma = 0.0;  // temporal total-variation weight on S
    double beta1 = 1.0;  // data-fit penalty
    double beta2 = 1.0;  // W x_1 Delta = Z penalty
    double beta3 = 1.0;  // S = W penalty
    double beta4 = 1.0;  // low-rank consensus penalty
    std::size_t max_iter = 300;
    double tol = 1e-5;
    bool circular_diff = true;
    std::size_t threads = 1;

    void validate() const {
        auto nonneg = [](double v, const char *name) {
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
        };
        auto positive = [](double v, const char *name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument(std::string(name) + " must be finite and > 0");
        };
        nonneg(theta, "theta");
        nonneg(lambda, "lambda");
        nonneg(gamma, "gamma");
        positive(beta1, "beta1");
        positive(beta2, "beta2");
        positive(beta3, "beta3");
        positive(beta4, "beta4");
        nonneg(tol, "tol");
        if (max_iter < 1)
            throw std::invalid_argument("max_iter must be >= 1");
    }

    /// Data-driven defaults: lambda = 1/sqrt(max I_n), gamma = lambda,
    /// beta_1 = 1/(5 std of observed entries), other betas = beta_1.
    static AdmmParams defaults_for(const DenseTensor &y, const SupportMask &omega) {
        AdmmParams p;
        std::size_t max_dim = *std::max_element(y.dims().begin(), y.dims().end());
        p.lambda = 1.0 / std::sqrt(static_cast<double>(max_dim));
        p.gamma = p.lambda;
        double sum = 0.0, sq = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (omega[i]) {
                sum += y[i];
                sq += y[i] * y[i];
                ++n;
            }
        double stdev = 0.0;
        if (n > 1) {
            const double mean = sum / static_cast<double>(n);
            stdev = std::sqrt(std::max(0.0, (sq - n * mean * mean) / static_cast<double>(n - 1)));
        }
        p.beta1 = stdev > 0.0 ? 1.0 / (5.0 * stdev) : 1.0;
        p.beta2 = p.beta3 = p.beta4 = p.beta1;
        return p;
    }
};

using LogssParams = AdmmParams;
using BaselineParams = AdmmParams;

/// Primal residual norms, each divided by max(1, ||P_Omega[Y]||_F).
struct Residuals {
    double data = 0.0;      // P_Omega[L + S - Y]
    double tv = 0.0;        // W x_1 Delta - Z
    double sw = 0.0;        // S - W
    double graph_max = 0.0; // max_n of the low-rank consensus residuals

    double max() const { return std::max({data, tv, sw, graph_max}); }
};

struct IterationRecord {
    std::size_t iter = 0;
    Residuals residuals;
    double objective = 0.0;
    std::uint64_t svd_count = 0;
};

struct DecompositionResult {
    DenseTensor low_rank;
    DenseTensor sparse;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<IterationRecord> history;
    double wall_time_s = 0.0;
};

using IterationObserver = std::function<void(const IterationRecord &)>;

/// First-order difference operator along the time mode. Circular by default;
/// otherwise the last row is zero.
inline Matrix build_diff_operator(std::size_t length, bool circular = true) {
    if (length < 2)
        throw std::invalid_argument("build_diff_operator: length must be >= 2");
    const auto n = static_cast<Eigen::Index>(length);
    Matrix d = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!circular && i == n - 1)
            break;
        d(i, i) = 1.0;
        d(i, (i + 1) % n) = -1.0;
    }
    return d;
}

/// (beta_3 I + beta_2 Delta^T Delta)^{-1}.
inline Matrix smooth_aux_inverse(const Matrix &diff, double beta2, double beta3) {
    const Matrix a = beta3 * Matrix::Identity(diff.cols(), diff.cols()) +
                     beta2 * diff.transpose() * diff;
    return a.ldlt().solve(Matrix::Identity(a.rows(), a.cols()));
}

namespace admm {

/// L from the data-fit and consensus terms. `consensus_sum` is
/// sum_n (X^n + Gamma_4^n), where X^n is the mode-n low-rank estimate.
inline DenseTensor low_rank_step(const DenseTensor &y, const SupportMask &omega,
                                 const DenseTensor &sparse, const DenseTensor &dual_fit,
                                 const DenseTensor &consensus_sum, std::size_t modes,
                                 double beta1, double beta4) {
    y.require_same_shape(sparse, "update_low_rank");
    y.require_same_shape(consensus_sum, "update_low_rank");
    const double n = static_cast<double>(modes);
    const double denom = beta1 + n * beta4;
    DenseTensor out(y.dims());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (omega[i])
            out[i] = (beta1 * (y[i] - sparse[i] + dual_fit[i]) + beta4 * consensus_sum[i]) / denom;
        else
            out[i] = consensus_sum[i] / n;
    }
    return out;
}

/// Exact minimizer of lambda|S| + beta1/2 ||P_Omega[L+S-Y] - Gamma_1||^2 +
/// beta3/2 ||S - W - Gamma_3||^2.
inline DenseTensor sparse_step(const DenseTensor &y, const SupportMask &omega,
                               const DenseTensor &low_rank, const DenseTensor &dual_fit,
                               const DenseTensor &smooth, const DenseTensor &dual_split,
                               double lambda, double beta1, double beta3) {
    y.require_same_shape(low_rank, "update_sparse");
    y.require_same_shape(smooth, "update_sparse");
    DenseTensor out(y.dims());
    const double denom = beta1 + beta3;
    const double off_support = lambda / beta3;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double t4 = smooth[i] + dual_split[i];
        if (omega[i]) {
            const double t3 = y[i] - low_rank[i] + dual_fit[i];
            out[i] = soft_threshold(beta1 * t3 + beta3 * t4, lambda) / denom;
        } else {
            out[i] = soft_threshold(t4, off_support);
        }
    }
    return out;
}

/// Sparse update with no temporal-smoothness split (gamma = 0 baselines):
/// minimizer of lambda|S| + beta1/2 ||P_Omega[L+S-Y] - Gamma_1||^2.
inline DenseTensor sparse_step_unsplit(const DenseTensor &y, const SupportMask &omega,
                                       const DenseTensor &low_rank,
                                       const DenseTensor &dual_fit, double lambda,
                                       double beta1) {
    DenseTensor out(y.dims());
    for (std::size_t i = 0; i < y.size(); ++i)
        if (omega[i])
            out[i] = soft_threshold(y[i] - low_rank[i] + dual_fit[i], lambda / beta1);
    return out;
}

/// W_(1) = W_inv (beta3 (S - Gamma_3)_(1) + beta2 Delta^T (Gamma_2 + Z)_(1)).
inline DenseTensor smooth_aux_step(const DenseTensor &sparse, const DenseTensor &dual_split,
                                   const DenseTensor &tv, const DenseTensor &dual_tv,
                                   const Matrix &diff, const Matrix &w_inv, double beta2,
                                   double beta3) {
    DenseTensor a = sparse - dual_split;
    a *= beta3;
    DenseTensor b = dual_tv + tv;
    a += beta2 * mode_n_product(b, diff.transpose(), 0);
    return mode_n_product(a, w_inv, 0);
}

/// Z = T_{gamma/beta2}(W x_1 Delta - Gamma_2).
inline DenseTensor tv_aux_step(const DenseTensor &smooth, const DenseTensor &dual_tv,
                               const Matrix &diff, double gamma, double beta2) {
    return soft_threshold(mode_n_product(smooth, diff, 0) - dual_tv, gamma / beta2);
}

inline double observed_norm(const DenseTensor &y, const SupportMask &omega) {
    double sq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (omega[i])
            sq += y[i] * y[i];
    return std::sqrt(sq);
}

inline void require_finite(const DenseTensor &t, std::size_t iter, const char *name) {
    if (!t.all_finite())
        throw NumericalError("iteration " + std::to_string(iter) +
                             ": non-finite values in " + name);
}

class Stopwatch {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

} // namespace admm
} // namespace stsad
