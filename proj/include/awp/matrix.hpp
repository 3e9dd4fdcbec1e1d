#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "awp/errors.hpp"
#include "awp/parallel.hpp"

namespace awp {

using index_t = std::int64_t;

namespace detail {

/// Pairwise summation over a span, fixed recursion independent of callers.
/// Accumulates in double regardless of the element type.
template <typename T>
double pairwise_sum(std::span<const T> v) {
    if (v.size() <= 16) {
        double acc = 0.0;
        for (const T& x : v) acc += static_cast<double>(x);
        return acc;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.subspan(0, half)) + pairwise_sum(v.subspan(half));
}

template <typename T, typename Map>
double pairwise_map_sum(std::span<const T> v, Map map) {
    if (v.size() <= 16) {
        double acc = 0.0;
        for (const T& x : v) acc += map(x);
        return acc;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_map_sum(v.subspan(0, half), map) + pairwise_map_sum(v.subspan(half), map);
}

}  // namespace detail

/// Dense row-major matrix. The single carrier type for weights, activations,
/// covariance payloads, and iterates. Immutable use after construction is
/// safe to share across threads.
template <typename T>
class Matrix {
    static_assert(std::is_floating_point_v<T>, "Matrix requires float or double");

public:
    using value_type = T;

    Matrix() = default;

    Matrix(index_t rows, index_t cols, T fill = T(0))
        : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}

    Matrix(index_t rows, index_t cols, std::vector<T> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != checked_size(rows, cols)) {
            throw config_error("matrix data length does not match rows*cols");
        }
    }

    static Matrix identity(index_t n, T scale = T(1)) {
        Matrix m(n, n);
        for (index_t i = 0; i < n; ++i) m(i, i) = scale;
        return m;
    }

    index_t rows() const { return rows_; }
    index_t cols() const { return cols_; }
    index_t size() const { return rows_ * cols_; }

    T& operator()(index_t r, index_t c) { return data_[static_cast<std::size_t>(r * cols_ + c)]; }
    const T& operator()(index_t r, index_t c) const {
        return data_[static_cast<std::size_t>(r * cols_ + c)];
    }

    std::span<T> row(index_t r) {
        return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)};
    }
    std::span<const T> row(index_t r) const {
        return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)};
    }

    std::vector<T>& data() { return data_; }
    const std::vector<T>& data() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool all_finite() const {
        for (const T& x : data_) {
            if (!std::isfinite(x)) return false;
        }
        return true;
    }

    void require_finite(const char* what) const {
        if (!all_finite()) {
            throw numeric_error(std::string(what) + ": matrix contains non-finite entries");
        }
    }

    bool bit_equal(const Matrix& other) const {
        if (!same_shape(other)) return false;
        for (std::size_t i = 0; i < data_.size(); ++i) {
            // Bit-level compare: distinguishes -0.0 from 0.0, NaN never equal.
            if (std::memcmp(&data_[i], &other.data_[i], sizeof(T)) != 0) return false;
        }
        return true;
    }

    T max_abs() const {
        T m = T(0);
        for (const T& x : data_) m = std::max(m, std::abs(x));
        return m;
    }

private:
    static std::size_t checked_size(index_t rows, index_t cols) {
        if (rows < 0 || cols < 0) throw config_error("negative matrix dimension");
        return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    }

    index_t rows_ = 0;
    index_t cols_ = 0;
    std::vector<T> data_;
};

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;

/// Frobenius norm with a fixed row-major pairwise reduction, so the result
/// is deterministic and independent of the worker-thread count.
template <typename T>
double frobenius(const Matrix<T>& m) {
    m.require_finite("frobenius");
    const double sq = detail::pairwise_map_sum<T>(
        std::span<const T>(m.data()), [](T x) { return static_cast<double>(x) * static_cast<double>(x); });
    if (!std::isfinite(sq)) throw numeric_error("frobenius: sum of squares overflowed");
    return std::sqrt(sq);
}

/// out = A * B, row-parallel; the inner reduction over A's columns runs in a
/// fixed ascending order per output row.
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
    if (a.cols() != b.rows()) throw config_error("matmul: inner dimensions do not match");
    Matrix<T> out(a.rows(), b.cols());
    parallel_for(0, a.rows(), [&](index_t i) {
        auto out_row = out.row(i);
        auto a_row = a.row(i);
        for (index_t k = 0; k < a.cols(); ++k) {
            const T aik = a_row[static_cast<std::size_t>(k)];
            if (aik == T(0)) continue;
            auto b_row = b.row(k);
            for (index_t j = 0; j < b.cols(); ++j) {
                out_row[static_cast<std::size_t>(j)] += aik * b_row[static_cast<std::size_t>(j)];
            }
        }
    });
    return out;
}

template <typename T>
Matrix<T> subtract(const Matrix<T>& a, const Matrix<T>& b) {
    if (!a.same_shape(b)) throw config_error("subtract: shape mismatch");
    Matrix<T> out(a.rows(), a.cols());
    for (index_t i = 0; i < a.size(); ++i) {
        out.data()[static_cast<std::size_t>(i)] =
            a.data()[static_cast<std::size_t>(i)] - b.data()[static_cast<std::size_t>(i)];
    }
    return out;
}

template <typename From, typename To>
Matrix<To> convert(const Matrix<From>& m) {
    Matrix<To> out(m.rows(), m.cols());
    for (index_t i = 0; i < m.size(); ++i) {
        out.data()[static_cast<std::size_t>(i)] =
            static_cast<To>(m.data()[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace awp
