#pragma once

// Nuclear-norm baselines. LOSS: theta sum_n ||L_(n)||_* + lambda ||S||_1 +
// gamma ||S x_1 Delta||_1 subject to P_Omega[L + S] = P_Omega[Y], split with
// per-mode copies L^n = L. HoRPCA is the same problem with gamma = 0.

#include <cstddef>
#include <vector>

#include "stsad/admm.hpp"
#include "stsad/linalg.hpp"
#include "stsad/parallel.hpp"
#include "stsad/tensor.hpp"

namespace stsad {

/// LOSS objective at (L, S); evaluates N SVDs, so only used on demand.
inline double loss_objective(const DenseTensor &low_rank, const DenseTensor &sparse,
                             const BaselineParams &p) {
    double nuclear = 0.0;
    for (std::size_t n = 0; n < low_rank.order(); ++n)
        nuclear += nuclear_norm(unfold(low_rank, n));
    double value = p.theta * nuclear + p.lambda * tensor_norms(sparse).l1;
    if (p.gamma > 0.0)
        value += p.gamma *
                 tensor_norms(mode_n_product(sparse, build_diff_operator(sparse.dim(0),
                                                                         p.circular_diff),
                                             0))
                     .l1;
    return value;
}

/// ADMM for LOSS. With gamma == 0 the W/Z split is dropped and the problem is
/// HoRPCA. The per-iteration `objective` field records lambda||S||_1 +
/// gamma||S x_1 Delta||_1 plus theta times the nuclear norms of the per-mode
/// copies, taken from the SVT singular values already computed.
inline DecompositionResult solve_loss(const DenseTensor &y, const SupportMask &omega,
                                      const BaselineParams &params,
                                      const IterationObserver &observer = {}) {
    params.validate();
    if (y.dims() != omega.dims())
        throw std::invalid_argument("LOSS: mask shape does not match data");
    if (y.order() < 2)
        throw std::invalid_argument("LOSS: tensor order must be >= 2");
    admm::Stopwatch clock;
    const Dims &dims = y.dims();
    const std::size_t modes = y.order();
    const bool temporal = params.gamma > 0.0;

    const DenseTensor y_obs = project_support(y, omega);
    const double scale = std::max(1.0, frobenius_norm(y_obs));

    DenseTensor low_rank(dims), sparse(dims), smooth(dims), tv(dims);
    DenseTensor dual_fit(dims), dual_tv(dims), dual_split(dims);
    std::vector<DenseTensor> splits(modes, DenseTensor(dims));
    std::vector<DenseTensor> dual_split_lr(modes, DenseTensor(dims));
    std::vector<double> nuclear(modes, 0.0);
    Matrix diff, w_inv;
    if (temporal) {
        diff = build_diff_operator(dims[0], params.circular_diff);
        w_inv = smooth_aux_inverse(diff, params.beta2, params.beta3);
    }
    const double tau = params.theta / params.beta4;

    DecompositionResult result;
    for (std::size_t t = 1; t <= params.max_iter; ++t) {
        const std::uint64_t svd_before = SpectralCounters::svd();

        DenseTensor consensus(dims);
        for (std::size_t n = 0; n < modes; ++n) {
            consensus += splits[n];
            consensus += dual_split_lr[n];
        }
        low_rank = admm::low_rank_step(y_obs, omega, sparse, dual_fit, consensus, modes,
                                       params.beta1, params.beta4);
        admm::require_finite(low_rank, t, "L");

        parallel_for(modes, params.threads, [&](std::size_t n) {
            const Matrix target = unfold(low_rank - dual_split_lr[n], n);
            auto [u, sigma, v] = thin_svd(target);
            Eigen::Index keep = 0;
            while (keep < sigma.size() && sigma[keep] > tau)
                ++keep;
            Matrix shrunk = Matrix::Zero(target.rows(), target.cols());
            if (keep > 0) {
                const Vector s = sigma.head(keep).array() - tau;
                nuclear[n] = s.sum();
                shrunk = u.leftCols(keep) * s.asDiagonal() * v.leftCols(keep).transpose();
            } else {
                nuclear[n] = 0.0;
            }
            splits[n] = fold(shrunk, n, dims);
        });

        if (temporal) {
            sparse = admm::sparse_step(y_obs, omega, low_rank, dual_fit, smooth, dual_split,
                                       params.lambda, params.beta1, params.beta3);
            admm::require_finite(sparse, t, "S");
            smooth = admm::smooth_aux_step(sparse, dual_split, tv, dual_tv, diff, w_inv,
                                           params.beta2, params.beta3);
            admm::require_finite(smooth, t, "W");
            tv = admm::tv_aux_step(smooth, dual_tv, diff, params.gamma, params.beta2);
            admm::require_finite(tv, t, "Z");
        } else {
            sparse = admm::sparse_step_unsplit(y_obs, omega, low_rank, dual_fit, params.lambda,
                                               params.beta1);
            admm::require_finite(sparse, t, "S");
        }

        Residuals r;
        double sq = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (omega[i]) {
                const double res = low_rank[i] + sparse[i] - y_obs[i];
                dual_fit[i] -= res;
                sq += res * res;
            }
        r.data = std::sqrt(sq) / scale;
        if (temporal) {
            const DenseTensor tv_res = mode_n_product(smooth, diff, 0) - tv;
            dual_tv -= tv_res;
            r.tv = frobenius_norm(tv_res) / scale;
            const DenseTensor sw_res = sparse - smooth;
            dual_split -= sw_res;
            r.sw = frobenius_norm(sw_res) / scale;
        }
        for (std::size_t n = 0; n < modes; ++n) {
            const DenseTensor res = low_rank - splits[n];
            dual_split_lr[n] -= res;
            r.graph_max = std::max(r.graph_max, frobenius_norm(res) / scale);
        }
        if (!std::isfinite(r.max()))
            throw NumericalError("iteration " + std::to_string(t) +
                                 ": non-finite residuals in the dual update");

        double objective = params.lambda * tensor_norms(sparse).l1;
        for (double v : nuclear)
            objective += params.theta * v;
        if (temporal)
            objective += params.gamma * tensor_norms(mode_n_product(sparse, diff, 0)).l1;

        IterationRecord rec{t, r, objective, SpectralCounters::svd() - svd_before};
        result.history.push_back(rec);
        if (observer)
            observer(rec);
        result.iterations = t;
        if (r.max() < params.tol) {
            result.converged = true;
            break;
        }
    }
    result.low_rank = std::move(low_rank);
    result.sparse = std::move(sparse);
    result.wall_time_s = clock.seconds();
    return result;
}

/// Higher-order RPCA: LOSS without the temporal term.
inline DecompositionResult solve_horpca(const DenseTensor &y, const SupportMask &omega,
                                        BaselineParams params,
                                        const IterationObserver &observer = {}) {
    params.gamma = 0.0;
    return solve_loss(y, omega, params, observer);
}

} // namespace stsad
