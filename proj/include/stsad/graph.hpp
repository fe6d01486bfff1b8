#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "stsad/linalg.hpp"
#include "stsad/tensor.hpp"

namespace stsad {

/// Similarity graph across one tensor mode together with its Laplacian
/// spectrum and the truncation rank used by the graph-regularized solver.
struct ModeGraph {
    std::size_t mode = 0;
    Matrix weights;   // W, symmetric, zero diagonal
    Matrix laplacian; // D - W
    Vector eigvals;   // ascending
    Matrix eigvecs;   // orthonormal, columns aligned with eigvals
    std::size_t rank = 1;

    std::size_t extent() const { return static_cast<std::size_t>(eigvals.size()); }

    /// Eigenvectors of the `rank` smallest eigenvalues (I_n x J_n).
    Matrix basis() const {
        return eigvecs.leftCols(static_cast<Eigen::Index>(rank));
    }
    /// The `rank` smallest eigenvalues.
    Vector low_frequencies() const {
        return eigvals.head(static_cast<Eigen::Index>(rank));
    }
};

/// k-nearest-neighbour Gaussian-kernel graph over the rows of `x`.
///
/// Row i connects to its k nearest rows (Euclidean, ties by lower index) with
/// weight exp(-d^2 / (sigma_i sigma_j)), sigma_i being the distance from i to
/// its k-th neighbour. The result is symmetrized with an elementwise max.
/// Zero distances give weight 1. A zero bandwidth is floored at the smallest
/// positive bandwidth in the graph.
inline Matrix build_knn_graph(const Matrix &x, std::size_t k) {
    const auto n = static_cast<std::size_t>(x.rows());
    if (n < 2 || k < 1 || k > n - 1)
        throw std::invalid_argument("build_knn_graph: k=" + std::to_string(k) +
                                    " outside [1, " +
                                    std::to_string(n > 0 ? n - 1 : 0) + "]");
    Matrix d2 = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = i + 1; j < x.rows(); ++j)
            d2(i, j) = d2(j, i) = (x.row(i) - x.row(j)).squaredNorm();

    std::vector<std::vector<std::size_t>> neighbours(n);
    Vector sigma(static_cast<Eigen::Index>(n));
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        order.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                order.push_back(j);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return d2(ii, static_cast<Eigen::Index>(a)) <
                   d2(ii, static_cast<Eigen::Index>(b));
        });
        neighbours[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        sigma[ii] = std::sqrt(d2(ii, static_cast<Eigen::Index>(order[k - 1])));
    }

    double sigma_floor = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < sigma.size(); ++i)
        if (sigma[i] > 0.0)
            sigma_floor = std::min(sigma_floor, sigma[i]);
    if (!std::isfinite(sigma_floor))
        sigma_floor = 1.0;

    Matrix w = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        for (std::size_t j : neighbours[i]) {
            const auto jj = static_cast<Eigen::Index>(j);
            const double dist2 = d2(ii, jj);
            double weight = 1.0;
            if (dist2 > 0.0) {
                const double bw = std::max(sigma[ii], sigma_floor) *
                                  std::max(sigma[jj], sigma_floor);
                weight = std::exp(-dist2 / bw);
            }
            w(ii, jj) = std::max(w(ii, jj), weight);
            w(jj, ii) = std::max(w(jj, ii), weight);
        }
    }
    return w;
}

/// Combinatorial Laplacian D - W.
inline Matrix build_laplacian(const Matrix &w) {
    if (w.rows() != w.cols() || !is_symmetric(w))
        throw std::invalid_argument("build_laplacian: W must be square and symmetric");
    if ((w.array() < 0.0).any())
        throw std::invalid_argument("build_laplacian: W must be nonnegative");
    if (w.diagonal().cwiseAbs().maxCoeff() != 0.0)
        throw std::invalid_argument("build_laplacian: W must have a zero diagonal");
    Matrix phi = -w;
    phi.diagonal() = w.rowwise().sum();
    return phi;
}

/// Smallest i (1-based) with lambda_i / lambda_{i+1} > ratio. A 0/0 ratio
/// (both below 1e-12) counts as 1. Falls back to I_n - 1.
inline std::size_t select_rank(const Vector &eigvals, double ratio = 0.9) {
    const auto n = static_cast<std::size_t>(eigvals.size());
    if (n < 2)
        throw std::invalid_argument("select_rank: need at least 2 eigenvalues");
    constexpr double zero = 1e-12;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double lo = eigvals[static_cast<Eigen::Index>(i)];
        const double hi = eigvals[static_cast<Eigen::Index>(i + 1)];
        const double r = (lo <= zero && hi <= zero) ? 1.0 : lo / hi;
        if (r > ratio)
            return i + 1;
    }
    return n - 1;
}

inline std::size_t default_neighbours(std::size_t extent) {
    return std::min<std::size_t>(10, extent - 1);
}

/// Builds W, the Laplacian, its spectrum and J_n for one mode of `y`.
/// `k == 0` selects min(10, I_n - 1) neighbours.
inline ModeGraph build_mode_graph(const DenseTensor &y, std::size_t mode,
                                  std::size_t k = 0, double rank_ratio = 0.9) {
    const Matrix x = unfold(y, mode);
    if (x.rows() < 2)
        throw std::invalid_argument("build_mode_graph: mode " + std::to_string(mode) +
                                    " needs extent >= 2");
    if (k == 0)
        k = default_neighbours(static_cast<std::size_t>(x.rows()));
    ModeGraph g;
    g.mode = mode;
    g.weights = build_knn_graph(x, k);
    g.laplacian = build_laplacian(g.weights);
    auto eig = sym_eig(g.laplacian);
    g.eigvals = std::move(eig.eigvals);
    g.eigvecs = std::move(eig.eigvecs);
    g.rank = select_rank(g.eigvals, rank_ratio);
    return g;
}

inline std::vector<ModeGraph> build_all_graphs(const DenseTensor &y, std::size_t k = 0,
                                               double rank_ratio = 0.9) {
    std::vector<ModeGraph> graphs;
    graphs.reserve(y.order());
    for (std::size_t n = 0; n < y.order(); ++n)
        graphs.push_back(build_mode_graph(y, n, k, rank_ratio));
    return graphs;
}

/// ||diag(Gamma)||_2 / ||Gamma||_F with Gamma = P^T C P.
inline double stationarity_from_covariance(const Matrix &cov, const Matrix &basis) {
    const Matrix gamma = basis.transpose() * cov * basis;
    const double total = gamma.norm();
    if (!(total > 0.0))
        throw std::invalid_argument("stationarity: covariance is zero, ratio undefined");
    return gamma.diagonal().norm() / total;
}

/// Graph stationarity of the rows of `x` (variables) over its columns
/// (samples), using the unbiased sample covariance.
inline double stationarity(const Matrix &x, const ModeGraph &graph) {
    if (x.rows() != graph.eigvecs.rows())
        throw std::invalid_argument("stationarity: graph built for a different mode extent");
    if (x.cols() < 2)
        throw std::invalid_argument("stationarity: need at least 2 samples");
    const Matrix centered = x.colwise() - x.rowwise().mean();
    const Matrix cov = centered * centered.transpose() / static_cast<double>(x.cols() - 1);
    return stationarity_from_covariance(cov, graph.eigvecs);
}

} // namespace stsad
