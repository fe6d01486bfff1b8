#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace stsad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

/// Raised when a computation produces NaN/Inf or otherwise cannot proceed
/// numerically. Argument and shape problems use std::invalid_argument.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline std::size_t element_count(const Dims &dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                           std::multiplies<>{});
}

inline std::string dims_to_string(const Dims &dims) {
    std::string out;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i)
            out += "x";
        out += std::to_string(dims[i]);
    }
    return out;
}

/// Dense order-N real tensor. Storage is first-index-fastest, so element
/// (i_1, ..., i_N) lives at i_1 + I_1*(i_2 + I_2*(i_3 + ...)). Modes are
/// 0-based in the API.
class DenseTensor {
  public:
    DenseTensor() = default;

    explicit DenseTensor(Dims dims, double fill = 0.0)
        : dims_(std::move(dims)) {
        check_dims(dims_);
        data_.assign(element_count(dims_), fill);
    }

    DenseTensor(Dims dims, std::vector<double> data)
        : dims_(std::move(dims)), data_(std::move(data)) {
        check_dims(dims_);
        if (data_.size() != element_count(dims_))
            throw std::invalid_argument("DenseTensor: data length " +
                                        std::to_string(data_.size()) +
                                        " does not match dims " +
                                        dims_to_string(dims_));
    }

    static DenseTensor zeros_like(const DenseTensor &other) {
        return DenseTensor(other.dims());
    }

    const Dims &dims() const { return dims_; }
    std::size_t order() const { return dims_.size(); }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t size() const { return data_.size(); }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    std::vector<double> &storage() { return data_; }
    const std::vector<double> &storage() const { return data_; }

    double &operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    std::size_t flat_index(std::span<const std::size_t> idx) const {
        std::size_t flat = 0;
        for (std::size_t k = idx.size(); k-- > 0;)
            flat = flat * dims_[k] + idx[k];
        return flat;
    }

    double &at(std::initializer_list<std::size_t> idx) {
        return data_[flat_index(std::span(idx.begin(), idx.size()))];
    }
    double at(std::initializer_list<std::size_t> idx) const {
        return data_[flat_index(std::span(idx.begin(), idx.size()))];
    }

    /// Column-vector view over the flat storage.
    Eigen::Map<Vector> vec() {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }
    Eigen::Map<const Vector> vec() const {
        return {data_.data(), static_cast<Eigen::Index>(data_.size())};
    }

    DenseTensor &operator+=(const DenseTensor &rhs) {
        require_same_shape(rhs, "operator+=");
        vec() += rhs.vec();
        return *this;
    }
    DenseTensor &operator-=(const DenseTensor &rhs) {
        require_same_shape(rhs, "operator-=");
        vec() -= rhs.vec();
        return *this;
    }
    DenseTensor &operator*=(double s) {
        vec() *= s;
        return *this;
    }

    friend DenseTensor operator+(DenseTensor lhs, const DenseTensor &rhs) {
        lhs += rhs;
        return lhs;
    }
    friend DenseTensor operator-(DenseTensor lhs, const DenseTensor &rhs) {
        lhs -= rhs;
        return lhs;
    }
    friend DenseTensor operator*(double s, DenseTensor t) {
        t *= s;
        return t;
    }

    bool same_shape(const DenseTensor &other) const {
        return dims_ == other.dims_;
    }

    void require_same_shape(const DenseTensor &other, const char *what) const {
        if (!same_shape(other))
            throw std::invalid_argument(std::string(what) +
                                        ": shape mismatch " +
                                        dims_to_string(dims_) + " vs " +
                                        dims_to_string(other.dims_));
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(),
                           [](double v) { return std::isfinite(v); });
    }

    friend bool operator==(const DenseTensor &, const DenseTensor &) = default;

  private:
    static void check_dims(const Dims &dims) {
        if (dims.empty())
            throw std::invalid_argument("DenseTensor: order must be >= 1");
        for (auto d : dims)
            if (d == 0)
                throw std::invalid_argument(
                    "DenseTensor: dimensions must be positive");
    }

    Dims dims_;
    std::vector<double> data_;
};

/// Boolean tensor marking observed entries (the support set).
class SupportMask {
  public:
    SupportMask() = default;
    explicit SupportMask(Dims dims, bool observed = true)
        : dims_(std::move(dims)),
          observed_(element_count(dims_), observed ? 1 : 0) {}
    SupportMask(Dims dims, std::vector<unsigned char> observed)
        : dims_(std::move(dims)), observed_(std::move(observed)) {
        if (observed_.size() != element_count(dims_))
            throw std::invalid_argument(
                "SupportMask: data length does not match dims");
    }

    const Dims &dims() const { return dims_; }
    std::size_t size() const { return observed_.size(); }
    bool operator[](std::size_t flat) const { return observed_[flat] != 0; }
    void set(std::size_t flat, bool value) { observed_[flat] = value ? 1 : 0; }
    const std::vector<unsigned char> &flags() const { return observed_; }

    std::size_t count() const {
        return static_cast<std::size_t>(
            std::count(observed_.begin(), observed_.end(), 1));
    }

    friend bool operator==(const SupportMask &, const SupportMask &) = default;

  private:
    Dims dims_;
    std::vector<unsigned char> observed_;
};

namespace detail {

inline void check_mode(const Dims &dims, std::size_t mode) {
    if (mode >= dims.size())
        throw std::invalid_argument("invalid mode index " +
                                    std::to_string(mode) + " for order-" +
                                    std::to_string(dims.size()) + " tensor");
}

// Splits the tensor around `mode` as (left, I_mode, right) blocks in storage
// order.
struct ModeSplit {
    std::size_t left = 1, extent = 1, right = 1;
};

inline ModeSplit split_at(const Dims &dims, std::size_t mode) {
    ModeSplit s;
    for (std::size_t k = 0; k < mode; ++k)
        s.left *= dims[k];
    s.extent = dims[mode];
    for (std::size_t k = mode + 1; k < dims.size(); ++k)
        s.right *= dims[k];
    return s;
}

} // namespace detail

/// Mode-n unfolding. Columns are ordered cyclically: mode n+1 varies fastest,
/// then n+2, ..., N, 1, ..., n-1. For mode 0 this is a plain reshape of the
/// storage.
inline Matrix unfold(const DenseTensor &t, std::size_t mode) {
    detail::check_mode(t.dims(), mode);
    const auto [left, extent, right] = detail::split_at(t.dims(), mode);
    Matrix m(static_cast<Eigen::Index>(extent),
             static_cast<Eigen::Index>(left * right));
    for (std::size_t l = 0; l < left; ++l)
        for (std::size_t r = 0; r < right; ++r) {
            const auto col = static_cast<Eigen::Index>(r + right * l);
            const std::size_t base = l + left * extent * r;
            for (std::size_t i = 0; i < extent; ++i)
                m(static_cast<Eigen::Index>(i), col) = t[base + left * i];
        }
    return m;
}

/// Inverse of unfold() under the same column convention.
inline DenseTensor fold(const Matrix &m, std::size_t mode, const Dims &dims) {
    detail::check_mode(dims, mode);
    const auto [left, extent, right] = detail::split_at(dims, mode);
    if (static_cast<std::size_t>(m.rows()) != extent ||
        static_cast<std::size_t>(m.cols()) != left * right)
        throw std::invalid_argument(
            "fold: matrix shape " + std::to_string(m.rows()) + "x" +
            std::to_string(m.cols()) + " incompatible with dims " +
            dims_to_string(dims) + " at mode " + std::to_string(mode));
    DenseTensor t(dims);
    for (std::size_t l = 0; l < left; ++l)
        for (std::size_t r = 0; r < right; ++r) {
            const auto col = static_cast<Eigen::Index>(r + right * l);
            const std::size_t base = l + left * extent * r;
            for (std::size_t i = 0; i < extent; ++i)
                t[base + left * i] = m(static_cast<Eigen::Index>(i), col);
        }
    return t;
}

/// T x_n U, with U of shape J x I_n. Implemented slice-by-slice on the storage
/// without materializing the unfolding.
inline DenseTensor mode_n_product(const DenseTensor &t,
                                  const Eigen::Ref<const Matrix> &u,
                                  std::size_t mode) {
    detail::check_mode(t.dims(), mode);
    if (static_cast<std::size_t>(u.cols()) != t.dim(mode))
        throw std::invalid_argument(
            "mode_n_product: matrix has " + std::to_string(u.cols()) +
            " columns, mode " + std::to_string(mode) + " has extent " +
            std::to_string(t.dim(mode)));
    const auto [left, extent, right] = detail::split_at(t.dims(), mode);
    Dims out_dims = t.dims();
    out_dims[mode] = static_cast<std::size_t>(u.rows());
    DenseTensor out(out_dims);
    const auto rows_out = static_cast<Eigen::Index>(u.rows());
    const auto l = static_cast<Eigen::Index>(left);
    const auto e = static_cast<Eigen::Index>(extent);
    if (left == 1) {
        // Mode-0 unfolding is the storage itself.
        Eigen::Map<const Matrix> in(t.data().data(), e, static_cast<Eigen::Index>(right));
        Eigen::Map<Matrix> res(out.data().data(), rows_out, static_cast<Eigen::Index>(right));
        res.noalias() = u * in;
        return out;
    }
    for (std::size_t r = 0; r < right; ++r) {
        Eigen::Map<const Matrix> in_slice(t.data().data() + left * extent * r,
                                          l, e);
        Eigen::Map<Matrix> out_slice(
            out.data().data() + left * out_dims[mode] * r, l, rows_out);
        out_slice.noalias() = in_slice * u.transpose();
    }
    return out;
}

struct TensorNorms {
    double frobenius = 0.0;
    double l1 = 0.0;
};

inline TensorNorms tensor_norms(const DenseTensor &t) {
    double sq = 0.0, abs_sum = 0.0;
    for (double v : t.data()) {
        sq += v * v;
        abs_sum += std::abs(v);
    }
    return {std::sqrt(sq), abs_sum};
}

inline double frobenius_norm(const DenseTensor &t) { return t.vec().norm(); }

/// Squared Euclidean norm of every row of the mode-n unfolding.
inline Vector mode_row_sq_norms(const DenseTensor &t, std::size_t mode) {
    detail::check_mode(t.dims(), mode);
    const auto [left, extent, right] = detail::split_at(t.dims(), mode);
    Vector out = Vector::Zero(static_cast<Eigen::Index>(extent));
    for (std::size_t r = 0; r < right; ++r)
        for (std::size_t i = 0; i < extent; ++i) {
            const double *p = t.data().data() + left * (i + extent * r);
            double acc = 0.0;
            for (std::size_t l = 0; l < left; ++l)
                acc += p[l] * p[l];
            out[static_cast<Eigen::Index>(i)] += acc;
        }
    return out;
}

/// Multiplies row i of the mode-n unfolding by factors[i], in place.
inline void scale_mode_rows(DenseTensor &t, std::size_t mode, const Vector &factors) {
    detail::check_mode(t.dims(), mode);
    const auto [left, extent, right] = detail::split_at(t.dims(), mode);
    if (static_cast<std::size_t>(factors.size()) != extent)
        throw std::invalid_argument("scale_mode_rows: factor count does not match extent");
    for (std::size_t r = 0; r < right; ++r)
        for (std::size_t i = 0; i < extent; ++i) {
            double *p = t.data().data() + left * (i + extent * r);
            const double f = factors[static_cast<Eigen::Index>(i)];
            for (std::size_t l = 0; l < left; ++l)
                p[l] *= f;
        }
}

/// Keeps observed entries (or, with `complement`, the unobserved ones) and
/// zeroes the rest.
inline DenseTensor project_support(const DenseTensor &t, const SupportMask &omega,
                                   bool complement = false) {
    if (t.dims() != omega.dims())
        throw std::invalid_argument("project_support: mask shape " +
                                    dims_to_string(omega.dims()) +
                                    " does not match tensor " +
                                    dims_to_string(t.dims()));
    DenseTensor out(t.dims());
    for (std::size_t i = 0; i < t.size(); ++i)
        if (omega[i] != complement)
            out[i] = t[i];
    return out;
}

inline double soft_threshold(double a, double phi) {
    if (!(phi >= 0.0))
        throw std::invalid_argument("soft_threshold: threshold must be >= 0");
    const double mag = std::abs(a) - phi;
    return mag > 0.0 ? std::copysign(mag, a) : 0.0;
}

/// Elementwise shrinkage sign(a) * max(|a| - phi, 0).
inline DenseTensor soft_threshold(const DenseTensor &t, double phi) {
    DenseTensor out(t.dims());
    for (std::size_t i = 0; i < t.size(); ++i)
        out[i] = soft_threshold(t[i], phi);
    return out;
}

} // namespace stsad
