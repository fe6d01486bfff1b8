#pragma once

// Low-rank-on-graphs plus temporally smooth sparse decomposition.
//
// The low-rank part is tied to per-mode graph Fourier coefficients G^n through
// L = G^n x_n P_n, where P_n holds the J_n lowest-frequency Laplacian
// eigenvectors of mode n. Smoothness is penalized as tr(G_(n)^T Lambda_n
// G_(n)), so no SVD is needed inside the loop. The sparse part carries an l1
// penalty plus an l1 penalty on its first differences along mode 0 (time).

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "stsad/admm.hpp"
#include "stsad/graph.hpp"
#include "stsad/linalg.hpp"
#include "stsad/parallel.hpp"
#include "stsad/tensor.hpp"

namespace stsad {

struct SolverState {
    DenseTensor low_rank;                 // L
    DenseTensor sparse;                   // S
    DenseTensor smooth;                   // W, split copy of S
    DenseTensor tv;                       // Z = W x_1 Delta
    std::vector<DenseTensor> coeffs;      // G^n (mode n has extent J_n)
    std::vector<DenseTensor> recon;       // G^n x_n P_n, cached
    DenseTensor dual_fit;                 // Gamma_1
    DenseTensor dual_tv;                  // Gamma_2
    DenseTensor dual_split;               // Gamma_3
    std::vector<DenseTensor> dual_graph;  // Gamma_4^n
    Matrix diff;                          // Delta
    Matrix w_inv;                         // (beta3 I + beta2 Delta^T Delta)^-1
    std::vector<Matrix> basis;            // P_n (I_n x J_n)
    std::vector<Vector> freqs;            // Lambda_n diagonal (J_n)

    std::size_t modes() const { return basis.size(); }

    /// sum_n (G^n x_n P_n + Gamma_4^n)
    DenseTensor consensus_sum() const {
        DenseTensor sum(low_rank.dims());
        for (std::size_t n = 0; n < modes(); ++n) {
            sum += recon[n];
            sum += dual_graph[n];
        }
        return sum;
    }
};

/// All-zero initial state with the spectral quantities precomputed.
inline SolverState make_solver_state(const DenseTensor &y, const std::vector<ModeGraph> &graphs,
                                     const LogssParams &params) {
    if (graphs.size() != y.order())
        throw std::invalid_argument("LOGSS: need one graph per mode (" +
                                    std::to_string(y.order()) + "), got " +
                                    std::to_string(graphs.size()));
    SolverState s;
    const Dims &dims = y.dims();
    s.low_rank = s.sparse = s.smooth = s.tv = DenseTensor(dims);
    s.dual_fit = s.dual_tv = s.dual_split = DenseTensor(dims);
    for (std::size_t n = 0; n < y.order(); ++n) {
        const ModeGraph &g = graphs[n];
        if (g.extent() != dims[n])
            throw std::invalid_argument("LOGSS: graph for mode " + std::to_string(n) +
                                        " has extent " + std::to_string(g.extent()) +
                                        ", tensor has " + std::to_string(dims[n]));
        if (g.rank < 1 || g.rank > dims[n])
            throw std::invalid_argument("LOGSS: invalid rank for mode " + std::to_string(n));
        s.basis.push_back(g.basis());
        s.freqs.push_back(g.low_frequencies());
        Dims cdims = dims;
        cdims[n] = g.rank;
        s.coeffs.emplace_back(cdims);
        s.recon.emplace_back(dims);
        s.dual_graph.emplace_back(dims);
    }
    s.diff = build_diff_operator(dims[0], params.circular_diff);
    s.w_inv = smooth_aux_inverse(s.diff, params.beta2, params.beta3);
    return s;
}

inline DenseTensor update_low_rank(const SolverState &s, const DenseTensor &y,
                                   const SupportMask &omega, const LogssParams &p) {
    return admm::low_rank_step(y, omega, s.sparse, s.dual_fit, s.consensus_sum(), s.modes(),
                               p.beta1, p.beta4);
}

/// G^n = (2 theta/beta4 Lambda_n + I)^{-1} ((L - Gamma_4^n) x_n P_n^T).
/// The inverse is diagonal and applied as a row scaling.
inline std::vector<DenseTensor> update_graph_coeffs(const SolverState &s, const LogssParams &p) {
    std::vector<DenseTensor> out(s.modes());
    parallel_for(s.modes(), p.threads, [&](std::size_t n) {
        DenseTensor g = mode_n_product(s.low_rank - s.dual_graph[n], s.basis[n].transpose(), n);
        const Vector scale = (2.0 * (p.theta / p.beta4) * s.freqs[n].array() + 1.0).inverse();
        scale_mode_rows(g, n, scale);
        out[n] = std::move(g);
    });
    return out;
}

inline DenseTensor update_sparse(const SolverState &s, const DenseTensor &y,
                                 const SupportMask &omega, const LogssParams &p) {
    return admm::sparse_step(y, omega, s.low_rank, s.dual_fit, s.smooth, s.dual_split,
                             p.lambda, p.beta1, p.beta3);
}

inline DenseTensor update_smooth_aux(const SolverState &s, const LogssParams &p) {
    return admm::smooth_aux_step(s.sparse, s.dual_split, s.tv, s.dual_tv, s.diff, s.w_inv,
                                 p.beta2, p.beta3);
}

inline DenseTensor update_tv_aux(const SolverState &s, const LogssParams &p) {
    return admm::tv_aux_step(s.smooth, s.dual_tv, s.diff, p.gamma, p.beta2);
}

/// Dual ascent on all multipliers; requires `recon` to match the current G^n.
/// Returns the primal residual norms (unnormalized).
inline Residuals update_duals(SolverState &s, const DenseTensor &y, const SupportMask &omega,
                              std::size_t threads = 1) {
    Residuals r;
    double sq = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i)
        if (omega[i]) {
            const double res = s.low_rank[i] + s.sparse[i] - y[i];
            s.dual_fit[i] -= res;
            sq += res * res;
        }
    r.data = std::sqrt(sq);

    const DenseTensor tv_res = mode_n_product(s.smooth, s.diff, 0) - s.tv;
    s.dual_tv -= tv_res;
    r.tv = frobenius_norm(tv_res);

    const DenseTensor sw_res = s.sparse - s.smooth;
    s.dual_split -= sw_res;
    r.sw = frobenius_norm(sw_res);

    std::vector<double> graph_res(s.modes(), 0.0);
    parallel_for(s.modes(), threads, [&](std::size_t n) {
        const DenseTensor res = s.low_rank - s.recon[n];
        s.dual_graph[n] -= res;
        graph_res[n] = frobenius_norm(res);
    });
    for (double v : graph_res)
        r.graph_max = std::max(r.graph_max, v);
    return r;
}

/// theta sum_n tr(G_(n)^T Lambda_n G_(n)) + lambda ||S||_1 + gamma ||S x_1 Delta||_1
inline double logss_objective(const SolverState &s, const LogssParams &p) {
    double smooth_energy = 0.0;
    for (std::size_t n = 0; n < s.modes(); ++n)
        smooth_energy += s.freqs[n].dot(mode_row_sq_norms(s.coeffs[n], n));
    return p.theta * smooth_energy + p.lambda * tensor_norms(s.sparse).l1 +
           p.gamma * tensor_norms(mode_n_product(s.sparse, s.diff, 0)).l1;
}

/// Runs the ADMM iteration from the all-zero start until every normalized
/// primal residual is below `tol` or `max_iter` is reached.
inline DecompositionResult solve_logss(const DenseTensor &y, const SupportMask &omega,
                                       const std::vector<ModeGraph> &graphs,
                                       const LogssParams &params,
                                       const IterationObserver &observer = {}) {
    params.validate();
    if (y.dims() != omega.dims())
        throw std::invalid_argument("LOGSS: mask shape does not match data");
    if (y.order() < 2)
        throw std::invalid_argument("LOGSS: tensor order must be >= 2");
    admm::Stopwatch clock;
    SolverState s = make_solver_state(y, graphs, params);
    const DenseTensor y_obs = project_support(y, omega);
    const double scale = std::max(1.0, frobenius_norm(y_obs));

    DecompositionResult result;
    for (std::size_t t = 1; t <= params.max_iter; ++t) {
        s.low_rank = update_low_rank(s, y_obs, omega, params);
        admm::require_finite(s.low_rank, t, "L");

        s.coeffs = update_graph_coeffs(s, params);
        parallel_for(s.modes(), params.threads, [&](std::size_t n) {
            s.recon[n] = mode_n_product(s.coeffs[n], s.basis[n], n);
        });

        s.sparse = update_sparse(s, y_obs, omega, params);
        admm::require_finite(s.sparse, t, "S");
        s.smooth = update_smooth_aux(s, params);
        admm::require_finite(s.smooth, t, "W");
        s.tv = update_tv_aux(s, params);
        admm::require_finite(s.tv, t, "Z");

        Residuals r = update_duals(s, y_obs, omega, params.threads);
        r.data /= scale;
        r.tv /= scale;
        r.sw /= scale;
        r.graph_max /= scale;
        if (!std::isfinite(r.max()))
            throw NumericalError("iteration " + std::to_string(t) +
                                 ": non-finite residuals in the dual update");

        IterationRecord rec{t, r, logss_objective(s, params), 0};
        result.history.push_back(rec);
        if (observer)
            observer(rec);
        result.iterations = t;
        if (r.max() < params.tol) {
            result.converged = true;
            break;
        }
    }
    result.low_rank = std::move(s.low_rank);
    result.sparse = std::move(s.sparse);
    result.wall_time_s = clock.seconds();
    return result;
}

} // namespace stsad
