#include "mwetag/lstm.hpp"

#include "mwetag/errors.hpp"
#include "mwetag/ops.hpp"

namespace mwetag {
namespace {

constexpr std::array<const char*, kNumGates> kGateNames = {"i", "f", "o", "g"};

Tensor uniform_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double range) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-range, range);
  return Tensor::parameter(std::move(m));
}

// Gate pre-activations already include W x; adds U h + b and applies the cell.
LstmState step(const std::array<Tensor, kNumGates>& input_part, const LstmState& prev,
               const std::array<Tensor, kNumGates>& recurrent_t, const LstmParams& p) {
  std::array<Tensor, kNumGates> pre;
  for (int g = 0; g < kNumGates; ++g) pre[g] = add(add(input_part[g], matmul(prev.h, recurrent_t[g])), p.biases[g]);
  Tensor i = sigmoid(pre[kInputGate]);
  Tensor f = sigmoid(pre[kForgetGate]);
  Tensor o = sigmoid(pre[kOutputGate]);
  Tensor g = tanh(pre[kCellGate]);
  Tensor c = add(mul(f, prev.c), mul(i, g));
  Tensor h = mul(o, tanh(c));
  return {h, c};
}

}  // namespace

LstmParams LstmParams::uniform(Eigen::Index input_dim, Eigen::Index hidden_dim, Rng& rng, double range) {
  LstmParams p;
  for (int g = 0; g < kNumGates; ++g) {
    p.input_weights[g] = uniform_matrix(hidden_dim, input_dim, rng, range);
    p.recurrent_weights[g] = uniform_matrix(hidden_dim, hidden_dim, rng, range);
    p.biases[g] = Tensor::parameter(Matrix::Constant(1, hidden_dim, g == kForgetGate ? 1.0 : 0.0));
  }
  return p;
}

std::vector<std::pair<std::string, Tensor>> LstmParams::named_parameters(const std::string& prefix) const {
  std::vector<std::pair<std::string, Tensor>> out;
  for (int g = 0; g < kNumGates; ++g) {
    out.emplace_back(prefix + ".W_" + kGateNames[g], input_weights[g]);
    out.emplace_back(prefix + ".U_" + kGateNames[g], recurrent_weights[g]);
    out.emplace_back(prefix + ".b_" + kGateNames[g], biases[g]);
  }
  return out;
}

LstmState lstm_cell(const Tensor& x, const LstmState& prev, const LstmParams& p) {
  const Eigen::Index H = p.hidden_dim();
  if (x.rows() != 1 || x.cols() != p.input_dim()) {
    throw ShapeError("lstm_cell: input " + x.shape_string() + " for input dim " + std::to_string(p.input_dim()));
  }
  if (prev.h.rows() != 1 || prev.h.cols() != H || prev.c.rows() != 1 || prev.c.cols() != H) {
    throw ShapeError("lstm_cell: state shapes " + prev.h.shape_string() + "/" + prev.c.shape_string() +
                     " for hidden dim " + std::to_string(H));
  }
  std::array<Tensor, kNumGates> input_part;
  std::array<Tensor, kNumGates> recurrent_t;
  for (int g = 0; g < kNumGates; ++g) {
    input_part[g] = matmul(x, transpose(p.input_weights[g]));
    recurrent_t[g] = transpose(p.recurrent_weights[g]);
  }
  return step(input_part, prev, recurrent_t, p);
}

Tensor lstm_sequence(const Tensor& inputs, const LstmParams& p, bool reverse) {
  if (inputs.cols() != p.input_dim()) {
    throw ShapeError("lstm_sequence: inputs " + inputs.shape_string() + " for input dim " +
                     std::to_string(p.input_dim()));
  }
  const Eigen::Index T = inputs.rows();
  const Eigen::Index H = p.hidden_dim();
  // Input projections for all positions at once: T×H per gate.
  std::array<Tensor, kNumGates> projected;
  std::array<Tensor, kNumGates> recurrent_t;
  for (int g = 0; g < kNumGates; ++g) {
    projected[g] = matmul(inputs, transpose(p.input_weights[g]));
    recurrent_t[g] = transpose(p.recurrent_weights[g]);
  }
  LstmState state{Tensor::constant(Matrix::Zero(1, H)), Tensor::constant(Matrix::Zero(1, H))};
  std::vector<Tensor> outputs(static_cast<std::size_t>(T));
  for (Eigen::Index k = 0; k < T; ++k) {
    const Eigen::Index t = reverse ? T - 1 - k : k;
    std::array<Tensor, kNumGates> input_part;
    for (int g = 0; g < kNumGates; ++g) input_part[g] = row(projected[g], t);
    state = step(input_part, state, recurrent_t, p);
    outputs[static_cast<std::size_t>(t)] = state.h;
  }
  return concat_rows(outputs);
}

}  // namespace mwetag
