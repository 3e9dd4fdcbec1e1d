#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "awp/matrix.hpp"
#include "awp/parallel.hpp"

namespace awp {

/// Per-row sparsity constraint: keep exactly k entries per row, either given
/// directly or derived from a pruning ratio p as k = round((1−p)·d_in).
struct RowSparsitySpec {
    enum class Mode { keep_count, ratio };

    Mode mode = Mode::keep_count;
    index_t k = 0;
    double p = 0.0;
    index_t d_in = 0;

    static RowSparsitySpec keep(index_t k, index_t d_in) {
        RowSparsitySpec s;
        s.mode = Mode::keep_count;
        s.k = k;
        s.d_in = d_in;
        s.validate();
        return s;
    }

    static RowSparsitySpec from_ratio(double p, index_t d_in) {
        RowSparsitySpec s;
        s.mode = Mode::ratio;
        s.p = p;
        s.d_in = d_in;
        s.k = static_cast<index_t>(std::llround((1.0 - p) * static_cast<double>(d_in)));
        s.validate();
        return s;
    }

    void validate() const {
        if (d_in < 1) throw config_error("row sparsity spec: d_in must be positive");
        if (mode == Mode::ratio && (p < 0.0 || p > 1.0)) {
            throw config_error("row sparsity spec: ratio must lie in [0,1]");
        }
        if (k < 0 || k > d_in) throw config_error("row sparsity spec: k out of [0, d_in]");
    }

    index_t keep_count() const { return k; }
    double target_ratio() const {
        return mode == Mode::ratio ? p : 1.0 - static_cast<double>(k) / static_cast<double>(d_in);
    }
};

/// Grouped asymmetric min-max uniform quantization: each contiguous group of
/// group_size entries within a row gets its own scale and zero point.
struct QuantSpec {
    int bits = 4;
    index_t group_size = 128;

    static QuantSpec make(int bits, index_t group_size) {
        QuantSpec q{bits, group_size};
        q.validate();
        return q;
    }

    void validate() const {
        if (bits < 2 || bits > 24) throw config_error("quant spec: bits must be in [2, 24]");
        if (group_size < 1) throw config_error("quant spec: group size must be positive");
    }

    index_t levels() const { return index_t(1) << bits; }
    index_t groups_per_row(index_t d_in) const { return (d_in + group_size - 1) / group_size; }
};

/// Per-(row, group) reconstruction grid. Representable values are
/// scale·(q − zero_point) for integer codes q in [0, 2^bits−1]. A constant
/// group degenerates to scale = 0; its value is kept in offset so the
/// projection of such a group stays exact.
struct QuantGrid {
    int bits = 4;
    index_t group_size = 128;
    index_t rows = 0;
    index_t cols = 0;
    std::vector<double> scales;      // rows × n_groups
    std::vector<int> zero_points;    // rows × n_groups
    std::vector<double> offsets;     // rows × n_groups; nonzero only when scale == 0

    index_t n_groups() const { return (cols + group_size - 1) / group_size; }
    index_t group_of(index_t col) const { return col / group_size; }
    index_t slot(index_t row, index_t group) const { return row * n_groups() + group; }

    void require_shape(index_t r, index_t c) const {
        if (r != rows || c != cols) throw config_error("quant grid does not match matrix shape");
    }
};

/// Boolean support mask with exactly k true entries per row.
struct SparsityMask {
    index_t rows = 0;
    index_t cols = 0;
    std::vector<std::uint8_t> keep;   // rows × cols, 0/1
    std::vector<index_t> row_counts;  // true-count per row

    SparsityMask() = default;
    SparsityMask(index_t r, index_t c)
        : rows(r), cols(c), keep(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0),
          row_counts(static_cast<std::size_t>(r), 0) {}

    bool at(index_t r, index_t c) const {
        return keep[static_cast<std::size_t>(r * cols + c)] != 0;
    }
    void set(index_t r, index_t c) {
        auto& slot = keep[static_cast<std::size_t>(r * cols + c)];
        if (!slot) {
            slot = 1;
            ++row_counts[static_cast<std::size_t>(r)];
        }
    }
};

template <typename T>
struct SparseProjection {
    Matrix<T> theta;
    SparsityMask mask;
};

/// Hard thresholding per row: keep the k largest-magnitude entries, zero the
/// rest. Surviving entries are bit-identical to the input; ties on |value|
/// break toward the lower column index.
template <typename T>
SparseProjection<T> project_row_sparse(const Matrix<T>& z, const RowSparsitySpec& spec) {
    spec.validate();
    if (spec.d_in != z.cols()) throw config_error("project_row_sparse: spec d_in != matrix cols");
    const index_t k = spec.keep_count();

    SparseProjection<T> out{Matrix<T>(z.rows(), z.cols()), SparsityMask(z.rows(), z.cols())};
    parallel_for(0, z.rows(), [&](index_t i) {
        auto src = z.row(i);
        std::vector<index_t> order(static_cast<std::size_t>(z.cols()));
        std::iota(order.begin(), order.end(), index_t(0));
        auto larger = [&](index_t a, index_t b) {
            const double ma = std::abs(static_cast<double>(src[static_cast<std::size_t>(a)]));
            const double mb = std::abs(static_cast<double>(src[static_cast<std::size_t>(b)]));
            return ma != mb ? ma > mb : a < b;
        };
        if (k > 0 && k < z.cols()) {
            std::nth_element(order.begin(), order.begin() + (k - 1), order.end(), larger);
        }
        for (index_t j = 0; j < k; ++j) {
            const index_t col = order[static_cast<std::size_t>(j)];
            out.theta(i, col) = src[static_cast<std::size_t>(col)];
            out.mask.keep[static_cast<std::size_t>(i * z.cols() + col)] = 1;
        }
        out.mask.row_counts[static_cast<std::size_t>(i)] = k;
    });
    return out;
}

/// Min-max grid per group: scale = (max−min)/(2^bits−1) and
/// zero_point = clamp(round(−min/scale), 0, 2^bits−1). A zero-range group
/// stores its constant in offset and reconstructs exactly.
template <typename T>
QuantGrid fit_quant_grid(const Matrix<T>& z, const QuantSpec& spec) {
    spec.validate();
    QuantGrid grid;
    grid.bits = spec.bits;
    grid.group_size = spec.group_size;
    grid.rows = z.rows();
    grid.cols = z.cols();
    const index_t n_groups = grid.n_groups();
    grid.scales.assign(static_cast<std::size_t>(z.rows() * n_groups), 0.0);
    grid.zero_points.assign(static_cast<std::size_t>(z.rows() * n_groups), 0);
    grid.offsets.assign(static_cast<std::size_t>(z.rows() * n_groups), 0.0);
    const double q_max = static_cast<double>(spec.levels() - 1);

    parallel_for(0, z.rows(), [&](index_t i) {
        auto src = z.row(i);
        for (index_t g = 0; g < n_groups; ++g) {
            const index_t lo_col = g * spec.group_size;
            const index_t hi_col = std::min(z.cols(), lo_col + spec.group_size);
            double lo = static_cast<double>(src[static_cast<std::size_t>(lo_col)]);
            double hi = lo;
            for (index_t c = lo_col + 1; c < hi_col; ++c) {
                const double v = static_cast<double>(src[static_cast<std::size_t>(c)]);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            const std::size_t s = static_cast<std::size_t>(grid.slot(i, g));
            if (hi > lo) {
                grid.scales[s] = (hi - lo) / q_max;
                const double zp = std::round(-lo / grid.scales[s]);
                grid.zero_points[s] = static_cast<int>(std::clamp(zp, 0.0, q_max));
            } else {
                grid.scales[s] = 0.0;
                grid.zero_points[s] = 0;
                grid.offsets[s] = lo;
            }
        }
    });
    return grid;
}

/// Map every entry to its nearest representable grid value: round the integer
/// code half away from zero, clamp to [0, 2^bits−1], reconstruct.
template <typename T>
Matrix<T> quantize_to_grid(const Matrix<T>& z, const QuantGrid& grid) {
    grid.require_shape(z.rows(), z.cols());
    Matrix<T> out(z.rows(), z.cols());
    const double q_max = static_cast<double>((index_t(1) << grid.bits) - 1);
    parallel_for(0, z.rows(), [&](index_t i) {
        auto src = z.row(i);
        auto dst = out.row(i);
        for (index_t c = 0; c < z.cols(); ++c) {
            const std::size_t s = static_cast<std::size_t>(grid.slot(i, grid.group_of(c)));
            const double scale = grid.scales[s];
            if (scale == 0.0) {
                dst[static_cast<std::size_t>(c)] = static_cast<T>(grid.offsets[s]);
                continue;
            }
            const int zp = grid.zero_points[s];
            const double code = std::round(static_cast<double>(src[static_cast<std::size_t>(c)]) /
                                               scale +
                                           static_cast<double>(zp));
            const double q = std::clamp(code, 0.0, q_max);
            dst[static_cast<std::size_t>(c)] = static_cast<T>(scale * (q - zp));
        }
    });
    return out;
}

enum class JointOrder { prune_then_quant, quant_then_prune };

template <typename T>
struct JointProjection {
    Matrix<T> theta;
    SparsityMask mask;
    QuantGrid grid;
};

/// Composite projection for joint pruning + quantization.
/// prune_then_quant: prune, fit/quantize the pruned matrix, then re-apply the
/// mask so entries outside the support are exactly zero even when zero is not
/// on the grid. quant_then_prune: quantize first, then hard-threshold.
template <typename T>
JointProjection<T> project_joint(const Matrix<T>& z, const RowSparsitySpec& row_spec,
                                 const QuantSpec& qspec,
                                 JointOrder order = JointOrder::prune_then_quant) {
    if (order == JointOrder::prune_then_quant) {
        SparseProjection<T> pruned = project_row_sparse(z, row_spec);
        QuantGrid grid = fit_quant_grid(pruned.theta, qspec);
        Matrix<T> theta = quantize_to_grid(pruned.theta, grid);
        for (index_t i = 0; i < theta.rows(); ++i) {
            for (index_t c = 0; c < theta.cols(); ++c) {
                if (!pruned.mask.at(i, c)) theta(i, c) = T(0);
            }
        }
        return {std::move(theta), std::move(pruned.mask), std::move(grid)};
    }
    QuantGrid grid = fit_quant_grid(z, qspec);
    Matrix<T> quantized = quantize_to_grid(z, grid);
    SparseProjection<T> pruned = project_row_sparse(quantized, row_spec);
    return {std::move(pruned.theta), std::move(pruned.mask), std::move(grid)};
}

}  // namespace awp
