#pragma once

#include <functional>
#include <span>

#include "mwetag/tensor.hpp"

namespace mwetag {

/// Compares reverse-mode gradients with central differences
/// (f(x+h·eᵢ) − f(x−h·eᵢ)) / 2h and returns the largest
/// |analytic − numeric| / max(1, |analytic| + |numeric|) over coordinates.
/// `f` must return a scalar and be deterministic (no dropout).
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Matrix& x, double h = 1e-5);

/// Same check against every entry of each tensor in `params`, which `loss`
/// reads by reference. Values are perturbed in place and restored; existing
/// gradients on `params` are cleared.
double grad_check(const std::function<Tensor()>& loss, std::span<Tensor> params, double h = 1e-5);

}  // namespace mwetag
