#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mwetag/tensor.hpp"

namespace mwetag {

struct AdamState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Zero moments shaped like `params`.
AdamState make_adam_state(std::span<const Tensor> params);

/// One bias-corrected Adam update of `params` in place:
///   m̂ = m/(1−β₁ᵗ), v̂ = v/(1−β₂ᵗ), θ ← θ − lr·m̂/(√v̂ + ε).
/// Throws ShapeError if grads or state do not match the parameters.
void adam_step(std::span<Tensor> params, std::span<const Matrix> grads, AdamState& state, double lr);

/// Rescales `grads` so their joint L2 norm is at most `max_norm`. Returns the
/// norm before clipping.
double clip_global_norm(std::span<Matrix> grads, double max_norm);

}  // namespace mwetag
