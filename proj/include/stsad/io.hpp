#pragma once

// Tensor text format:
//
//   dims: I1 I2 ... IN
//   v_0
//   v_1
//   ...
//
// one value per element in storage (first-index-fastest) order, written with
// 17 significant digits so doubles round-trip exactly. Masks use the same
// layout with 0/1 values.

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "stsad/tensor.hpp"

namespace stsad {

class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_header(std::ostream &out, const Dims &dims) {
    out << "dims:";
    for (auto d : dims)
        out << ' ' << d;
    out << '\n';
}

inline Dims read_header(std::istream &in, const std::string &source) {
    std::string line;
    if (!std::getline(in, line))
        throw FormatError(source + ": empty file, expected 'dims:' header");
    std::istringstream hs(line);
    std::string tag;
    hs >> tag;
    if (tag != "dims:")
        throw FormatError(source + ": line 1: expected 'dims:' header, got '" + line + "'");
    Dims dims;
    std::string tok;
    while (hs >> tok) {
        char *end = nullptr;
        errno = 0;
        const long long v = std::strtoll(tok.c_str(), &end, 10);
        if (*end != '\0' || errno != 0 || v <= 0)
            throw FormatError(source + ": line 1: invalid dimension '" + tok + "'");
        dims.push_back(static_cast<std::size_t>(v));
    }
    if (dims.empty())
        throw FormatError(source + ": line 1: header lists no dimensions");
    return dims;
}

inline std::vector<double> read_values(std::istream &in, std::size_t expected,
                                       const std::string &source) {
    std::vector<double> values;
    values.reserve(expected);
    std::string tok;
    while (in >> tok) {
        char *end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (*end != '\0' || !std::isfinite(v))
            throw FormatError(source + ": invalid value '" + tok + "' at element " +
                              std::to_string(values.size()));
        values.push_back(v);
    }
    if (values.size() != expected)
        throw FormatError(source + ": header declares " + std::to_string(expected) +
                          " elements, payload has " + std::to_string(values.size()));
    return values;
}

} // namespace detail

inline void write_tensor(std::ostream &out, const DenseTensor &t) {
    detail::write_header(out, t.dims());
    for (double v : t.data())
        out << detail::format_double(v) << '\n';
}

inline DenseTensor read_tensor(std::istream &in, const std::string &source = "<stream>") {
    Dims dims = detail::read_header(in, source);
    auto values = detail::read_values(in, element_count(dims), source);
    return DenseTensor(std::move(dims), std::move(values));
}

inline void write_mask(std::ostream &out, const SupportMask &m) {
    detail::write_header(out, m.dims());
    for (auto f : m.flags())
        out << (f ? '1' : '0') << '\n';
}

inline SupportMask read_mask(std::istream &in, const std::string &source = "<stream>") {
    Dims dims = detail::read_header(in, source);
    auto values = detail::read_values(in, element_count(dims), source);
    std::vector<unsigned char> flags(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] != 0.0 && values[i] != 1.0)
            throw FormatError(source + ": mask value at element " + std::to_string(i) +
                              " is not 0 or 1");
        flags[i] = values[i] == 1.0 ? 1 : 0;
    }
    return SupportMask(std::move(dims), std::move(flags));
}

/// Stores a matrix as an order-2 tensor (column-major, i.e. rows fastest).
inline DenseTensor matrix_to_tensor(const Matrix &m) {
    DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    Eigen::Map<Matrix>(t.data().data(), m.rows(), m.cols()) = m;
    return t;
}

inline Matrix tensor_to_matrix(const DenseTensor &t) {
    if (t.order() == 1)
        return Eigen::Map<const Matrix>(t.data().data(), static_cast<Eigen::Index>(t.dim(0)), 1);
    if (t.order() != 2)
        throw FormatError("expected an order-2 tensor for a matrix, got order " +
                          std::to_string(t.order()));
    return Eigen::Map<const Matrix>(t.data().data(), static_cast<Eigen::Index>(t.dim(0)),
                                    static_cast<Eigen::Index>(t.dim(1)));
}

namespace detail {

inline std::ifstream open_in(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "' for reading");
    return in;
}

inline std::ofstream open_out(const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    return out;
}

} // namespace detail

inline void save_tensor(const std::filesystem::path &path, const DenseTensor &t) {
    auto out = detail::open_out(path);
    write_tensor(out, t);
}

inline DenseTensor load_tensor(const std::filesystem::path &path) {
    auto in = detail::open_in(path);
    return read_tensor(in, path.string());
}

inline void save_mask(const std::filesystem::path &path, const SupportMask &m) {
    auto out = detail::open_out(path);
    write_mask(out, m);
}

inline SupportMask load_mask(const std::filesystem::path &path) {
    auto in = detail::open_in(path);
    return read_mask(in, path.string());
}

} // namespace stsad
