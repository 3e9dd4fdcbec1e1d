#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "awp/covariance.hpp"
#include "awp/matrix.hpp"

namespace awp {

/// Spectral extremes of a PSD covariance plus the derived condition number.
/// kappa is +inf when λmin is indistinguishable from zero at the estimation
/// tolerance (rank-deficient C).
struct SpectralSummary {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double frob_norm = 0.0;
    double kappa = std::numeric_limits<double>::infinity();
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d4ecda049afb73ull;
    return z ^ (z >> 31);
}

/// Fixed pseudo-random start vector so power iteration is deterministic.
inline std::vector<double> power_start(index_t dim) {
    std::vector<double> v(static_cast<std::size_t>(dim));
    std::uint64_t s = 0x243f6a8885a308d3ull;  // fixed seed
    for (auto& x : v) {
        x = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53 + 0.25;
    }
    return v;
}

/// Power iteration for the top eigenvalue of the PSD operator
/// v ↦ C·v (shift = 0) or v ↦ shift·v − C·v. Converges when the Rayleigh
/// quotient's change drops below tol relative to it; errors out at the cap.
template <typename T>
double power_iteration(const Matrix<T>& c, double shift, double tol, index_t max_iters,
                       const char* what) {
    const index_t d = c.rows();
    std::vector<double> v = power_start(d);
    std::vector<double> y(static_cast<std::size_t>(d));
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;

    double lambda_prev = std::numeric_limits<double>::quiet_NaN();
    for (index_t it = 0; it < max_iters; ++it) {
        for (index_t i = 0; i < d; ++i) {
            double acc = 0.0;
            auto row = c.row(i);
            for (index_t j = 0; j < d; ++j) {
                acc += static_cast<double>(row[static_cast<std::size_t>(j)]) *
                       v[static_cast<std::size_t>(j)];
            }
            y[static_cast<std::size_t>(i)] =
                shift == 0.0 ? acc : shift * v[static_cast<std::size_t>(i)] - acc;
        }
        double lambda = 0.0;
        double ynorm = 0.0;
        for (index_t i = 0; i < d; ++i) {
            lambda += v[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
            ynorm += y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i)];
        }
        ynorm = std::sqrt(ynorm);
        if (ynorm <= std::numeric_limits<double>::min() * d) {
            return 0.0;  // operator annihilates the iterate: top eigenvalue is 0
        }
        if (std::isfinite(lambda_prev) &&
            std::abs(lambda - lambda_prev) <= tol * std::max(std::abs(lambda), 1e-300)) {
            return lambda;
        }
        lambda_prev = lambda;
        for (index_t i = 0; i < d; ++i) {
            v[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] / ynorm;
        }
    }
    throw numeric_error(std::string("spectral_extremes: power iteration for ") + what +
                        " did not converge within the iteration cap");
}

/// λmax only; the step-size rule does not need the slower λmin pass.
template <typename T>
double lambda_max_estimate(const Covariance<T>& c, double tol = 1e-9, index_t max_iters = 0) {
    if (c.frob_norm() == 0.0) return 0.0;
    const index_t cap = max_iters > 0 ? max_iters : 10 * c.dim();
    return std::max(0.0, power_iteration(c.matrix(), 0.0, tol, cap, "lambda_max"));
}

}  // namespace detail

/// λmax by power iteration; λmin by power iteration on (‖C‖_F·I − C), a valid
/// PSD shift since λmax ≤ ‖C‖_F. max_iters = 0 selects the default cap of
/// 10·dim; the λmin pass converges slowly on well-conditioned C, so callers
/// that need it should budget a larger cap.
template <typename T>
SpectralSummary spectral_extremes(const Covariance<T>& c, double tol = 1e-9,
                                  index_t max_iters = 0) {
    const index_t d = c.dim();
    if (d < 1) throw config_error("spectral_extremes: empty covariance");
    const index_t cap = max_iters > 0 ? max_iters : 10 * d;

    SpectralSummary s;
    s.frob_norm = c.frob_norm();
    if (s.frob_norm == 0.0) {
        s.lambda_min = s.lambda_max = 0.0;
        s.kappa = std::numeric_limits<double>::infinity();
        return s;
    }
    s.lambda_max = std::max(0.0, detail::power_iteration(c.matrix(), 0.0, tol, cap, "lambda_max"));
    // The shifted pass estimates frob − λmin, a quantity of size ~frob. Tighten
    // its stopping tolerance so the residual bias stays at the tol·λmax scale.
    const double tol_shifted = tol * std::min(1.0, s.lambda_max / s.frob_norm);
    const double shifted =
        detail::power_iteration(c.matrix(), s.frob_norm, tol_shifted, cap, "lambda_min");
    s.lambda_min = std::max(0.0, s.frob_norm - shifted);
    if (s.lambda_min > tol * s.lambda_max) {
        s.kappa = std::max(1.0, s.lambda_max / s.lambda_min);
    } else {
        s.kappa = std::numeric_limits<double>::infinity();
    }
    return s;
}

}  // namespace awp
