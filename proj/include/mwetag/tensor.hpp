#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace mwetag {

/// Row-major dense storage shared by every tensor. All tensors are rank 2;
/// vectors are 1×n rows and scalars are 1×1.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

struct Node {
  Matrix value;
  Matrix grad;  // empty until a gradient reaches this node
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads `grad` of the node it belongs to and accumulates into its inputs.
  std::function<void(Node&)> backward;

  /// Adds `g` into this node's gradient, allocating it on first use.
  template <class Derived>
  void accumulate(const Eigen::MatrixBase<Derived>& g) {
    if (!requires_grad) return;
    if (grad.size() == 0) {
      grad = g;
    } else {
      grad += g;
    }
  }

  /// Gradient buffer, zero-initialized if not yet allocated.
  Matrix& grad_buffer() {
    if (grad.size() == 0) grad = Matrix::Zero(value.rows(), value.cols());
    return grad;
  }
};

}  // namespace detail

/// Handle to a node in a define-by-run autograd graph. Copies share the node.
/// Every op records its inputs and a backward rule when gradients are enabled
/// and any input requires them; the graph is freed with its last handle.
class Tensor {
 public:
  Tensor() = default;

  /// Leaf that never receives gradients.
  static Tensor constant(Matrix value);
  /// Trainable leaf.
  static Tensor parameter(Matrix value);
  static Tensor scalar(double value) { return constant(Matrix::Constant(1, 1, value)); }

  /// Result of an op. Throws NumericError if `value` is not finite.
  static Tensor from_op(Matrix value, std::vector<Tensor> inputs, std::function<void(detail::Node&)> backward,
                        const char* op_name);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  /// Direct write access for optimizers and finite-difference probes.
  Matrix& value_mut() { return node_->value; }
  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->grad.size() != 0; }
  /// Accumulated gradient; zeros of the value's shape if none has flowed.
  Matrix grad() const;
  void zero_grad() const { node_->grad.resize(0, 0); }

  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  Eigen::Index size() const { return node_->value.size(); }
  std::string shape_string() const;

  /// Value of a 1×1 tensor.
  double item() const;

  /// Reverse-mode sweep from this scalar. Leaf gradients accumulate across
  /// calls until zero_grad(); intermediate gradients are released.
  void backward() const;

  const detail::Node* node() const { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  std::shared_ptr<detail::Node> node_;
};

/// Whether ops on this thread record backward rules.
bool grad_enabled();

/// Disables graph recording on the current thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

}  // namespace mwetag
