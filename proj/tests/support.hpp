#pragma once

// Shared helpers for the test suites.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "stsad/tensor.hpp"

namespace stsad::testing {

inline DenseTensor random_tensor(const Dims &dims, std::mt19937_64 &rng, double lo = -1.0,
                                 double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    DenseTensor t(dims);
    for (auto &v : t.data())
        v = u(rng);
    return t;
}

inline SupportMask random_mask(const Dims &dims, std::mt19937_64 &rng, double p_observed = 0.7) {
    std::bernoulli_distribution b(p_observed);
    SupportMask m(dims, false);
    for (std::size_t i = 0; i < m.size(); ++i)
        m.set(i, b(rng));
    return m;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
            m(i, j) = n(rng);
    return m;
}

inline double max_abs_diff(const DenseTensor &a, const DenseTensor &b) {
    return (a.vec() - b.vec()).cwiseAbs().maxCoeff();
}

/// Scratch directory removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string &tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("stsad_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    const std::filesystem::path &path() const { return path_; }

  private:
    std::filesystem::path path_;
};

} // namespace stsad::testing
