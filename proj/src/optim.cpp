#include "mwetag/optim.hpp"

#include <cmath>
#include <string>

#include "mwetag/errors.hpp"

namespace mwetag {

AdamState make_adam_state(std::span<const Tensor> params) {
  AdamState s;
  for (const Tensor& p : params) {
    s.first_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
    s.second_moment.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
  return s;
}

void adam_step(std::span<Tensor> params, std::span<const Matrix> grads, AdamState& state, double lr) {
  if (grads.size() != params.size() || state.first_moment.size() != params.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients, " + std::to_string(state.first_moment.size()) +
                     " moment slots");
  }
  ++state.step;
  const double correction1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& theta = params[i].value_mut();
    const Matrix& g = grads[i];
    if (g.rows() != theta.rows() || g.cols() != theta.cols()) {
      throw ShapeError("adam_step: gradient " + std::to_string(g.rows()) + "x" + std::to_string(g.cols()) +
                       " for parameter " + params[i].shape_string());
    }
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    theta.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + state.eps);
  }
}

double clip_global_norm(std::span<Matrix> grads, double max_norm) {
  double sq = 0.0;
  for (const Matrix& g : grads) sq += g.squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (Matrix& g : grads) g *= factor;
  }
  return norm;
}

}  // namespace mwetag
