#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

#include "stsad/tensor.hpp"

namespace stsad {

/// Process-wide counters for dense spectral factorizations. The solvers are
/// checked against these to confirm where SVD/eigen work happens.
struct SpectralCounters {
    static std::atomic<std::uint64_t> &svd() {
        static std::atomic<std::uint64_t> count{0};
        return count;
    }
    static std::atomic<std::uint64_t> &eig() {
        static std::atomic<std::uint64_t> count{0};
        return count;
    }
    static void reset() {
        svd() = 0;
        eig() = 0;
    }
};

struct SymEig {
    Vector eigvals; // ascending
    Matrix eigvecs; // orthonormal columns aligned with eigvals
};

inline bool is_symmetric(const Matrix &m, double rel_tol = 1e-12) {
    if (m.rows() != m.cols())
        return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// Full symmetric eigendecomposition, eigenvalues ascending.
inline SymEig sym_eig(const Matrix &a) {
    if (a.rows() != a.cols() || !is_symmetric(a))
        throw std::invalid_argument("sym_eig: input must be square and symmetric");
    ++SpectralCounters::eig();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success)
        throw NumericalError("sym_eig: eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

struct ThinSvd {
    Matrix u;
    Vector sigma; // descending
    Matrix v;
};

/// Thin SVD via two-sided Jacobi rotations with QR preconditioning.
inline ThinSvd thin_svd(const Matrix &m) {
    ++SpectralCounters::svd();
    Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> svd(
        m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

/// Singular value thresholding: the proximal map of tau * nuclear norm.
inline Matrix svt(const Matrix &m, double tau) {
    if (!(tau >= 0.0))
        throw std::invalid_argument("svt: threshold must be >= 0");
    if (m.size() == 0)
        return m;
    auto [u, sigma, v] = thin_svd(m);
    Eigen::Index keep = 0;
    while (keep < sigma.size() && sigma[keep] > tau)
        ++keep;
    if (keep == 0)
        return Matrix::Zero(m.rows(), m.cols());
    const Vector shrunk = sigma.head(keep).array() - tau;
    return u.leftCols(keep) * shrunk.asDiagonal() * v.leftCols(keep).transpose();
}

inline double nuclear_norm(const Matrix &m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().sum();
}

} // namespace stsad
