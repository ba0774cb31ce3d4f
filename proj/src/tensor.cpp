#include "mwetag/tensor.hpp"

#include <unordered_set>

#include "mwetag/errors.hpp"

namespace mwetag {
namespace {

thread_local bool g_grad_enabled = true;

std::string dims(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Tensor Tensor::constant(Matrix value) {
  if (!value.allFinite()) throw NumericError("constant tensor holds a non-finite value");
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  return Tensor(std::move(node));
}

Tensor Tensor::parameter(Matrix value) {
  Tensor t = constant(std::move(value));
  t.node_->requires_grad = true;
  return t;
}

Tensor Tensor::from_op(Matrix value, std::vector<Tensor> inputs, std::function<void(detail::Node&)> backward,
                       const char* op_name) {
  if (!value.allFinite()) throw NumericError(std::string(op_name) + " produced a non-finite value");
  auto node = std::make_shared<detail::Node>();
  node->value = std::move(value);
  if (g_grad_enabled) {
    for (const Tensor& in : inputs) {
      if (in.node_->requires_grad) {
        node->requires_grad = true;
        break;
      }
    }
  }
  if (node->requires_grad) {
    node->inputs.reserve(inputs.size());
    for (Tensor& in : inputs) node->inputs.push_back(std::move(in.node_));
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

Matrix Tensor::grad() const {
  if (node_->grad.size() == 0) return Matrix::Zero(rows(), cols());
  return node_->grad;
}

std::string Tensor::shape_string() const { return dims(node_->value); }

double Tensor::item() const {
  if (size() != 1) throw ShapeError("item() needs a 1x1 tensor, got " + shape_string());
  return node_->value(0, 0);
}

void Tensor::backward() const {
  if (size() != 1) throw ShapeError("backward() needs a scalar loss, got " + shape_string());
  if (!node_->requires_grad) return;

  // Iterative post-order DFS gives a topological order (inputs before users).
  std::vector<detail::Node*> order;
  std::unordered_set<const detail::Node*> seen;
  std::vector<std::pair<detail::Node*, std::size_t>> stack;
  stack.emplace_back(node_.get(), 0);
  seen.insert(node_.get());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->inputs.size()) {
      detail::Node* child = n->inputs[next++].get();
      if (child->requires_grad && seen.insert(child).second) stack.emplace_back(child, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  node_->accumulate(Matrix::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    detail::Node* n = *it;
    if (!n->backward) continue;  // leaf
    if (n->grad.size() != 0) n->backward(*n);
    n->grad.resize(0, 0);
  }
}

}  // namespace mwetag
