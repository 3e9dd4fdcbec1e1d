#pragma once

#include <cmath>

#include "awp/covariance.hpp"
#include "awp/matrix.hpp"

namespace awp {

namespace detail {

/// ⟨A, B⟩_F with the same fixed row-major reduction order everywhere, so the
/// engine's fused path and the standalone loss agree bit-for-bit.
template <typename T>
double frob_inner(const Matrix<T>& a, const Matrix<T>& b) {
    double total = 0.0;
    for (index_t i = 0; i < a.rows(); ++i) {
        auto ra = a.row(i);
        auto rb = b.row(i);
        double acc = 0.0;
        for (index_t j = 0; j < a.cols(); ++j) {
            acc += static_cast<double>(ra[static_cast<std::size_t>(j)]) *
                   static_cast<double>(rb[static_cast<std::size_t>(j)]);
        }
        total += acc;
    }
    return total;
}

/// tr[(R)·C·Rᵀ] given the precomputed product G = R·C. Tiny negative traces
/// from cancellation are clamped to zero; anything below the clamp window
/// signals an invalid covariance. λmax(C) ≤ ‖C‖_F bounds the window.
template <typename T>
double clamped_residual_trace(const Matrix<T>& r, const Matrix<T>& g, double w_frob,
                              double c_frob) {
    const double trace = frob_inner(r, g);
    if (trace >= 0.0) return trace;
    const double window = 1e-10 * w_frob * w_frob * c_frob;
    if (trace < -window) {
        throw numeric_error("activation loss: residual trace is negative beyond clamp window "
                            "(covariance is not PSD?)");
    }
    return 0.0;
}

}  // namespace detail

/// Activation-aware reconstruction loss ‖(W−Θ)·C^{1/2}‖_F, evaluated in trace
/// form as √tr[(W−Θ)·C·(W−Θ)ᵀ] — no matrix square root is ever formed.
template <typename T>
double activation_loss(const Matrix<T>& w, const Matrix<T>& theta, const Covariance<T>& c) {
    if (!w.same_shape(theta)) throw config_error("activation_loss: W and Theta shapes differ");
    if (c.dim() != w.cols()) throw config_error("activation_loss: covariance dim != d_in");
    const Matrix<T> r = subtract(w, theta);
    const Matrix<T> g = matmul(r, c.matrix());
    const double trace = detail::clamped_residual_trace(r, g, frobenius(w), c.frob_norm());
    return std::sqrt(trace);
}

}  // namespace awp
