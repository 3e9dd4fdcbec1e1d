#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include "awp/matrix.hpp"

namespace awp {

/// Input-activation covariance C, either (1/n)·X·Xᵀ or the raw X·Xᵀ
/// auto-correlation. Symmetric positive semidefinite by construction.
/// The Frobenius norm is cached; step-size rules and loss clamping use it.
template <typename T>
class Covariance {
public:
    Covariance() = default;

    /// Wrap an explicit matrix (e.g. loaded from file or built in a test).
    /// Symmetry is checked within 1e-10 relative tolerance; PSD-ness is the
    /// caller's responsibility and is verified empirically by property tests.
    static Covariance from_matrix(Matrix<T> m, bool normalized, index_t sample_count = 0) {
        if (m.rows() != m.cols()) throw config_error("covariance matrix must be square");
        m.require_finite("covariance");
        const double scale = static_cast<double>(m.max_abs());
        const double tol = 1e-10 * (scale > 0 ? scale : 1.0);
        for (index_t i = 0; i < m.rows(); ++i) {
            for (index_t j = i + 1; j < m.cols(); ++j) {
                if (std::abs(static_cast<double>(m(i, j)) - static_cast<double>(m(j, i))) > tol) {
                    throw config_error("covariance matrix is not symmetric");
                }
            }
        }
        return Covariance(std::move(m), normalized, sample_count);
    }

    index_t dim() const { return matrix_.rows(); }
    const Matrix<T>& matrix() const { return matrix_; }
    bool normalized() const { return normalized_; }
    index_t sample_count() const { return sample_count_; }
    double frob_norm() const { return frob_; }

private:
    template <typename U>
    friend Covariance<U> covariance(const Matrix<U>& x, bool normalize);

    Covariance(Matrix<T> m, bool normalized, index_t sample_count)
        : matrix_(std::move(m)),
          normalized_(normalized),
          sample_count_(sample_count),
          frob_(frobenius(matrix_)) {}

    Matrix<T> matrix_;
    bool normalized_ = true;
    index_t sample_count_ = 0;
    double frob_ = 0.0;
};

using CovarianceF = Covariance<float>;
using CovarianceD = Covariance<double>;

/// C[i][j] = Σ_t X[i][t]·X[j][t], divided by n when normalize is set.
/// Only the upper triangle is computed; the lower is mirrored, so the output
/// equals its transpose bit-exactly.
template <typename T>
Covariance<T> covariance(const Matrix<T>& x, bool normalize) {
    if (x.rows() < 1 || x.cols() < 1) throw config_error("covariance: empty activation matrix");
    x.require_finite("covariance");
    const index_t d = x.rows();
    const index_t n = x.cols();
    Matrix<T> c(d, d);
    const T inv_n = normalize ? static_cast<T>(1) / static_cast<T>(n) : T(1);
    parallel_for(0, d, [&](index_t i) {
        auto xi = x.row(i);
        for (index_t j = i; j < d; ++j) {
            auto xj = x.row(j);
            T acc = T(0);
            for (index_t t = 0; t < n; ++t) {
                acc += xi[static_cast<std::size_t>(t)] * xj[static_cast<std::size_t>(t)];
            }
            if (normalize) acc *= inv_n;
            c(i, j) = acc;
        }
    });
    for (index_t i = 0; i < d; ++i) {
        for (index_t j = 0; j < i; ++j) c(i, j) = c(j, i);
    }
    c.require_finite("covariance");
    return Covariance<T>(std::move(c), normalize, n);
}

}  // namespace awp
