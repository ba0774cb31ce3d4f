#include "mwetag/ops.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "mwetag/errors.hpp"

namespace mwetag {
namespace {

using detail::Node;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shapes " + a.shape_string() + " and " + b.shape_string() +
                     " differ");
  }
}

void require_axis(int axis, const char* op) {
  if (axis != 0 && axis != 1) throw ShapeError(std::string(op) + ": axis must be 0 or 1");
}

Matrix softmax_rows(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Matrix softmax_along(const Matrix& x, int axis) {
  if (axis == 1) return softmax_rows(x);
  return softmax_rows(x.transpose()).transpose();
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree for " + a.shape_string() + " and " + b.shape_string());
  }
  Matrix out = a.value() * b.value();
  return Tensor::from_op(std::move(out), {a, b}, [](Node& n) {
    Node& x = *n.inputs[0];
    Node& y = *n.inputs[1];
    if (x.requires_grad) x.accumulate(n.grad * y.value.transpose());
    if (y.requires_grad) y.accumulate(x.value.transpose() * n.grad);
  }, "matmul");
}

Tensor transpose(const Tensor& a) {
  Matrix out = a.value().transpose();
  return Tensor::from_op(std::move(out), {a}, [](Node& n) { n.inputs[0]->accumulate(n.grad.transpose()); },
                         "transpose");
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  return Tensor::from_op(a.value() + b.value(), {a, b}, [](Node& n) {
    n.inputs[0]->accumulate(n.grad);
    n.inputs[1]->accumulate(n.grad);
  }, "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  return Tensor::from_op(a.value() - b.value(), {a, b}, [](Node& n) {
    n.inputs[0]->accumulate(n.grad);
    n.inputs[1]->accumulate(-n.grad);
  }, "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mul");
  Matrix out = a.value().cwiseProduct(b.value());
  return Tensor::from_op(std::move(out), {a, b}, [](Node& n) {
    Node& x = *n.inputs[0];
    Node& y = *n.inputs[1];
    if (x.requires_grad) x.accumulate(n.grad.cwiseProduct(y.value));
    if (y.requires_grad) y.accumulate(n.grad.cwiseProduct(x.value));
  }, "mul");
}

Tensor add_scalar(const Tensor& a, double c) {
  Matrix out = a.value().array() + c;
  return Tensor::from_op(std::move(out), {a}, [](Node& n) { n.inputs[0]->accumulate(n.grad); }, "add_scalar");
}

Tensor scale(const Tensor& a, double c) {
  return Tensor::from_op(a.value() * c, {a}, [c](Node& n) { n.inputs[0]->accumulate(n.grad * c); }, "scale");
}

Tensor tanh(const Tensor& a) {
  Matrix out = a.value().array().tanh();
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    n.inputs[0]->accumulate((n.grad.array() * (1.0 - n.value.array().square())).matrix());
  }, "tanh");
}

Tensor sigmoid(const Tensor& a) {
  Matrix out = a.value().unaryExpr([](double v) {
    if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
  });
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    n.inputs[0]->accumulate((n.grad.array() * n.value.array() * (1.0 - n.value.array())).matrix());
  }, "sigmoid");
}

Tensor relu(const Tensor& a) {
  Matrix out = a.value().cwiseMax(0.0);
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    Node& x = *n.inputs[0];
    x.accumulate((x.value.array() > 0.0).select(n.grad, 0.0).matrix());
  }, "relu");
}

Tensor exp(const Tensor& a) {
  Matrix out = a.value().array().exp();
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    n.inputs[0]->accumulate(n.grad.cwiseProduct(n.value));
  }, "exp");
}

Tensor log(const Tensor& a) {
  Matrix out = a.value().array().log();
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    Node& x = *n.inputs[0];
    x.accumulate(n.grad.cwiseQuotient(x.value));
  }, "log");
}

Tensor sum(const Tensor& a) {
  return Tensor::from_op(Matrix::Constant(1, 1, a.value().sum()), {a}, [](Node& n) {
    Node& x = *n.inputs[0];
    x.accumulate(Matrix::Constant(x.value.rows(), x.value.cols(), n.grad(0, 0)));
  }, "sum");
}

Tensor mean(const Tensor& a) { return scale(sum(a), 1.0 / static_cast<double>(a.size())); }

Tensor sum(const Tensor& a, int axis) {
  require_axis(axis, "sum");
  Matrix out = axis == 0 ? Matrix(a.value().colwise().sum()) : Matrix(a.value().rowwise().sum());
  return Tensor::from_op(std::move(out), {a}, [axis](Node& n) {
    Node& x = *n.inputs[0];
    if (axis == 0) {
      x.accumulate(n.grad.replicate(x.value.rows(), 1));
    } else {
      x.accumulate(n.grad.replicate(1, x.value.cols()));
    }
  }, "sum");
}

Tensor softmax(const Tensor& a, int axis) {
  require_axis(axis, "softmax");
  Matrix out = softmax_along(a.value(), axis);
  return Tensor::from_op(std::move(out), {a}, [axis](Node& n) {
    const Matrix gs = n.grad.cwiseProduct(n.value);
    if (axis == 1) {
      Matrix dot = gs.rowwise().sum();
      n.inputs[0]->accumulate(gs - n.value.cwiseProduct(dot.replicate(1, n.value.cols())));
    } else {
      Matrix dot = gs.colwise().sum();
      n.inputs[0]->accumulate(gs - n.value.cwiseProduct(dot.replicate(n.value.rows(), 1)));
    }
  }, "softmax");
}

Tensor logsumexp(const Tensor& a, int axis) {
  require_axis(axis, "logsumexp");
  const Matrix& x = a.value();
  Matrix out;
  if (axis == 1) {
    out.resize(x.rows(), 1);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const double m = x.row(r).maxCoeff();
      out(r, 0) = m + std::log((x.row(r).array() - m).exp().sum());
    }
  } else {
    out.resize(1, x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double m = x.col(c).maxCoeff();
      out(0, c) = m + std::log((x.col(c).array() - m).exp().sum());
    }
  }
  return Tensor::from_op(std::move(out), {a}, [axis](Node& n) {
    Node& in = *n.inputs[0];
    // d lse / dx = softmax(x) along the reduced axis.
    if (axis == 1) {
      Matrix p = (in.value - n.value.replicate(1, in.value.cols())).array().exp().matrix();
      in.accumulate(p.cwiseProduct(n.grad.replicate(1, in.value.cols())));
    } else {
      Matrix p = (in.value - n.value.replicate(in.value.rows(), 1)).array().exp().matrix();
      in.accumulate(p.cwiseProduct(n.grad.replicate(in.value.rows(), 1)));
    }
  }, "logsumexp");
}

Tensor slice(const Tensor& a, Eigen::Index row, Eigen::Index n_rows, Eigen::Index col, Eigen::Index n_cols) {
  if (row < 0 || col < 0 || n_rows <= 0 || n_cols <= 0 || row + n_rows > a.rows() || col + n_cols > a.cols()) {
    throw ShapeError("slice: block (" + std::to_string(row) + "," + std::to_string(col) + ") of size " +
                     std::to_string(n_rows) + "x" + std::to_string(n_cols) + " exceeds " + a.shape_string());
  }
  Matrix out = a.value().block(row, col, n_rows, n_cols);
  return Tensor::from_op(std::move(out), {a}, [row, col, n_rows, n_cols](Node& n) {
    Node& x = *n.inputs[0];
    x.grad_buffer().block(row, col, n_rows, n_cols) += n.grad;
  }, "slice");
}

Tensor concat_rows(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  Eigen::Index total = 0;
  for (const Tensor& p : parts) {
    if (p.cols() != parts[0].cols()) {
      throw ShapeError("concat_rows: column counts differ (" + parts[0].shape_string() + " vs " +
                       p.shape_string() + ")");
    }
    total += p.rows();
  }
  Matrix out(total, parts[0].cols());
  Eigen::Index offset = 0;
  for (const Tensor& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
  }
  return Tensor::from_op(std::move(out), {parts.begin(), parts.end()}, [](Node& n) {
    Eigen::Index off = 0;
    for (auto& in : n.inputs) {
      const Eigen::Index r = in->value.rows();
      in->accumulate(n.grad.middleRows(off, r));
      off += r;
    }
  }, "concat_rows");
}

Tensor concat_cols(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  Eigen::Index total = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != parts[0].rows()) {
      throw ShapeError("concat_cols: row counts differ (" + parts[0].shape_string() + " vs " +
                       p.shape_string() + ")");
    }
    total += p.cols();
  }
  Matrix out(parts[0].rows(), total);
  Eigen::Index offset = 0;
  for (const Tensor& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  return Tensor::from_op(std::move(out), {parts.begin(), parts.end()}, [](Node& n) {
    Eigen::Index off = 0;
    for (auto& in : n.inputs) {
      const Eigen::Index c = in->value.cols();
      in->accumulate(n.grad.middleCols(off, c));
      off += c;
    }
  }, "concat_cols");
}

Tensor broadcast_rows(const Tensor& a, Eigen::Index m) {
  if (a.rows() != 1) throw ShapeError("broadcast_rows: expected a 1xn row, got " + a.shape_string());
  Matrix out = a.value().replicate(m, 1);
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    n.inputs[0]->accumulate(n.grad.colwise().sum());
  }, "broadcast_rows");
}

Tensor broadcast_cols(const Tensor& a, Eigen::Index n_cols) {
  if (a.cols() != 1) throw ShapeError("broadcast_cols: expected an mx1 column, got " + a.shape_string());
  Matrix out = a.value().replicate(1, n_cols);
  return Tensor::from_op(std::move(out), {a}, [](Node& n) {
    n.inputs[0]->accumulate(n.grad.rowwise().sum());
  }, "broadcast_cols");
}

Tensor add_row(const Tensor& a, const Tensor& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw ShapeError("add_row: bias " + bias.shape_string() + " does not match " + a.shape_string());
  }
  Matrix out = a.value().rowwise() + bias.value().row(0);
  return Tensor::from_op(std::move(out), {a, bias}, [](Node& n) {
    n.inputs[0]->accumulate(n.grad);
    n.inputs[1]->accumulate(n.grad.colwise().sum());
  }, "add_row");
}

Tensor gather_rows(const Tensor& table, std::span<const int> ids) {
  if (ids.empty()) throw ShapeError("gather_rows: no indices");
  Matrix out(static_cast<Eigen::Index>(ids.size()), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= table.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(ids[i]) + " outside table " + table.shape_string());
    }
    out.row(static_cast<Eigen::Index>(i)) = table.value().row(ids[i]);
  }
  std::vector<int> idx(ids.begin(), ids.end());
  return Tensor::from_op(std::move(out), {table}, [idx = std::move(idx)](Node& n) {
    Matrix& g = n.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < idx.size(); ++i) g.row(idx[i]) += n.grad.row(static_cast<Eigen::Index>(i));
  }, "gather_rows");
}

Tensor pick(const Tensor& a, std::span<const int> rows, std::span<const int> cols) {
  if (rows.size() != cols.size() || rows.empty()) {
    throw ShapeError("pick: need equally many (non-zero) row and column indices");
  }
  Matrix out(static_cast<Eigen::Index>(rows.size()), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows() || cols[i] < 0 || cols[i] >= a.cols()) {
      throw ShapeError("pick: (" + std::to_string(rows[i]) + "," + std::to_string(cols[i]) + ") outside " +
                       a.shape_string());
    }
    out(static_cast<Eigen::Index>(i), 0) = a.value()(rows[i], cols[i]);
  }
  std::vector<int> r(rows.begin(), rows.end());
  std::vector<int> c(cols.begin(), cols.end());
  return Tensor::from_op(std::move(out), {a}, [r = std::move(r), c = std::move(c)](Node& n) {
    Matrix& g = n.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < r.size(); ++i) g(r[i], c[i]) += n.grad(static_cast<Eigen::Index>(i), 0);
  }, "pick");
}

Tensor dropout(const Tensor& a, double p, Rng* rng) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout probability must lie in [0, 1)");
  if (rng == nullptr || p == 0.0) return a;
  const double keep_scale = 1.0 / (1.0 - p);
  Matrix mask(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng->uniform() < p ? 0.0 : keep_scale;
  Matrix out = a.value().cwiseProduct(mask);
  return Tensor::from_op(std::move(out), {a}, [mask = std::move(mask)](Node& n) {
    n.inputs[0]->accumulate(n.grad.cwiseProduct(mask));
  }, "dropout");
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double eps) {
  const Eigen::Index n_cols = a.cols();
  if (gain.rows() != 1 || gain.cols() != n_cols || bias.rows() != 1 || bias.cols() != n_cols) {
    throw ShapeError("layer_norm: gain " + gain.shape_string() + " / bias " + bias.shape_string() +
                     " do not match " + a.shape_string());
  }
  const Matrix& x = a.value();
  Matrix normed(x.rows(), n_cols);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    normed.row(r) = (x.row(r).array() - mu) * inv_std(r);
  }
  Matrix out = (normed.array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += bias.value().row(0);
  return Tensor::from_op(std::move(out), {a, gain, bias},
                         [normed = std::move(normed), inv_std = std::move(inv_std)](Node& n) {
    Node& x_in = *n.inputs[0];
    Node& g_in = *n.inputs[1];
    Node& b_in = *n.inputs[2];
    if (g_in.requires_grad) g_in.accumulate(n.grad.cwiseProduct(normed).colwise().sum());
    if (b_in.requires_grad) b_in.accumulate(n.grad.colwise().sum());
    if (x_in.requires_grad) {
      Matrix dy = (n.grad.array().rowwise() * g_in.value.row(0).array()).matrix();
      Matrix dx(dy.rows(), dy.cols());
      for (Eigen::Index r = 0; r < dy.rows(); ++r) {
        const double mean_dy = dy.row(r).mean();
        const double mean_dyy = dy.row(r).cwiseProduct(normed.row(r)).mean();
        dx.row(r) = inv_std(r) * (dy.row(r).array() - mean_dy - normed.row(r).array() * mean_dyy);
      }
      x_in.accumulate(dx);
    }
  }, "layer_norm");
}

}  // namespace mwetag
