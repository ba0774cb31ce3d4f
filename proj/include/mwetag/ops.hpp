#pragma once

#include <span>

#include "mwetag/rng.hpp"
#include "mwetag/tensor.hpp"

namespace mwetag {

// Differentiable free functions over Tensor. Binary elementwise ops require
// equal shapes; the only implicit broadcast is a scalar operand in the
// *_scalar/scale forms. Row/column replication is explicit via broadcast_*.
// Reductions take axis 0 (collapse rows, result 1×n) or 1 (collapse columns,
// result m×1).

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double c);
Tensor scale(const Tensor& a, double c);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(double c, const Tensor& a) { return scale(a, c); }

Tensor tanh(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor sum(const Tensor& a, int axis);

/// Max-shifted softmax; rows (axis 1) or columns (axis 0) sum to one.
Tensor softmax(const Tensor& a, int axis);
/// Max-shifted log Σ exp along an axis.
Tensor logsumexp(const Tensor& a, int axis);

Tensor slice(const Tensor& a, Eigen::Index row, Eigen::Index n_rows, Eigen::Index col, Eigen::Index n_cols);
inline Tensor row(const Tensor& a, Eigen::Index r) { return slice(a, r, 1, 0, a.cols()); }
Tensor concat_rows(std::span<const Tensor> parts);
Tensor concat_cols(std::span<const Tensor> parts);

/// Repeats a 1×n row m times.
Tensor broadcast_rows(const Tensor& a, Eigen::Index m);
/// Repeats an m×1 column n times.
Tensor broadcast_cols(const Tensor& a, Eigen::Index n);
/// a + bias with `bias` a 1×n row added to every row of `a`.
Tensor add_row(const Tensor& a, const Tensor& bias);

/// Rows of `table` selected by index (embedding lookup).
Tensor gather_rows(const Tensor& table, std::span<const int> ids);
/// Column vector of a(rows[i], cols[i]).
Tensor pick(const Tensor& a, std::span<const int> rows, std::span<const int> cols);

/// Inverted dropout. With `rng == nullptr` (evaluation) this is the identity;
/// otherwise each entry is zeroed with probability p and survivors scaled by
/// 1/(1-p). Throws std::invalid_argument unless 0 <= p < 1.
Tensor dropout(const Tensor& a, double p, Rng* rng);

/// Per-row normalization to zero mean and unit variance, then `gain`⊙x+`bias`
/// with gain and bias 1×n rows.
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

}  // namespace mwetag
