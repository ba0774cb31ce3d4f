#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "mwetag/rng.hpp"
#include "mwetag/tensor.hpp"

namespace mwetag {

enum Gate { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCellGate = 3 };
inline constexpr int kNumGates = 4;

/// Per-gate weights: input maps W (H×D), recurrent maps U (H×H), biases b (1×H).
struct LstmParams {
  std::array<Tensor, kNumGates> input_weights;
  std::array<Tensor, kNumGates> recurrent_weights;
  std::array<Tensor, kNumGates> biases;

  Eigen::Index input_dim() const { return input_weights[0].cols(); }
  Eigen::Index hidden_dim() const { return input_weights[0].rows(); }

  /// Weights uniform in [-range, range]; forget-gate bias 1, other biases 0.
  static LstmParams uniform(Eigen::Index input_dim, Eigen::Index hidden_dim, Rng& rng, double range);

  std::vector<std::pair<std::string, Tensor>> named_parameters(const std::string& prefix) const;
};

struct LstmState {
  Tensor h;
  Tensor c;
};

/// One step on 1×D input x with 1×H state:
///   i,f,o = σ(W x + U h + b), g = tanh(W x + U h + b),
///   c' = f⊙c + i⊙g, h' = o⊙tanh(c').
LstmState lstm_cell(const Tensor& x, const LstmState& prev, const LstmParams& p);

/// Runs the cell over the rows of `inputs` (T×D) from a zero state, left to
/// right, or right to left when `reverse`. Row t of the T×H result is the
/// hidden state after reading position t.
Tensor lstm_sequence(const Tensor& inputs, const LstmParams& p, bool reverse);

}  // namespace mwetag
