#include <doctest.h>

#include <cmath>

#include "mwetag/bilstm_crf.hpp"
#include "mwetag/grad_check.hpp"
#include "mwetag/optim.hpp"
#include "test_util.hpp"

using namespace mwetag;
using testing::random_matrix;

namespace {

double scalar_sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Gate equations evaluated one scalar at a time.
std::pair<std::vector<double>, std::vector<double>> scalar_cell(const Matrix& x, const Matrix& h, const Matrix& c,
                                                                const LstmParams& p) {
  const Eigen::Index H = p.hidden_dim();
  const Eigen::Index D = p.input_dim();
  std::vector<double> h_out(static_cast<std::size_t>(H));
  std::vector<double> c_out(static_cast<std::size_t>(H));
  for (Eigen::Index k = 0; k < H; ++k) {
    double pre[kNumGates];
    for (int g = 0; g < kNumGates; ++g) {
      double s = p.biases[g].value()(0, k);
      for (Eigen::Index d = 0; d < D; ++d) s += p.input_weights[g].value()(k, d) * x(0, d);
      for (Eigen::Index j = 0; j < H; ++j) s += p.recurrent_weights[g].value()(k, j) * h(0, j);
      pre[g] = s;
    }
    const double cell = scalar_sigmoid(pre[kForgetGate]) * c(0, k) +
                        scalar_sigmoid(pre[kInputGate]) * std::tanh(pre[kCellGate]);
    c_out[static_cast<std::size_t>(k)] = cell;
    h_out[static_cast<std::size_t>(k)] = scalar_sigmoid(pre[kOutputGate]) * std::tanh(cell);
  }
  return {h_out, c_out};
}

Vocabulary small_vocab() { return Vocabulary(false, {"Pink", "Shirley", "Alliance", "blooms", "in", "June"}); }

BiLstmCrfModel small_model(int D, int H, Rng& rng, double range = 0.5) {
  BiLstmConfig cfg;
  cfg.embed_dim = D;
  cfg.hidden_dim = H;
  cfg.init_range = range;
  cfg.dropout = 0.0;
  return make_bilstm_crf(small_vocab(), cfg, rng);
}

std::vector<Tensor> params_of(const BiLstmCrfModel& m) {
  std::vector<Tensor> out;
  for (auto& [name, t] : m.named_parameters()) out.push_back(t);
  return out;
}

}  // namespace

TEST_CASE("lstm_cell analytic cases") {
  LstmParams zero;
  for (int g = 0; g < kNumGates; ++g) {
    zero.input_weights[g] = Tensor::parameter(Matrix::Zero(3, 2));
    zero.recurrent_weights[g] = Tensor::parameter(Matrix::Zero(3, 3));
    zero.biases[g] = Tensor::parameter(Matrix::Zero(1, 3));
  }
  const LstmState s0{Tensor::constant(Matrix::Zero(1, 3)), Tensor::constant(Matrix::Zero(1, 3))};
  const LstmState out = lstm_cell(Tensor::constant(Matrix::Zero(1, 2)), s0, zero);
  CHECK(out.h.value() == Matrix::Zero(1, 3));

  // Forget gate saturated open, input gate shut: the cell carries over.
  LstmParams carry = zero;
  carry.biases[kForgetGate] = Tensor::parameter(Matrix::Constant(1, 3, 40.0));
  carry.biases[kInputGate] = Tensor::parameter(Matrix::Constant(1, 3, -40.0));
  Rng rng(1);
  const Matrix c_prev = random_matrix(1, 3, rng);
  const LstmState kept = lstm_cell(Tensor::constant(random_matrix(1, 2, rng)),
                                   {Tensor::constant(random_matrix(1, 3, rng)), Tensor::constant(c_prev)}, carry);
  CHECK((kept.c.value() - c_prev).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS(lstm_cell(Tensor::constant(Matrix::Zero(1, 5)), s0, zero));
}

TEST_CASE("lstm_cell matches scalar recomputation") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const LstmParams p = LstmParams::uniform(4, 5, rng, 0.8);
    const Matrix x = random_matrix(1, 4, rng);
    const Matrix h = random_matrix(1, 5, rng);
    const Matrix c = random_matrix(1, 5, rng);
    const LstmState out = lstm_cell(Tensor::constant(x), {Tensor::constant(h), Tensor::constant(c)}, p);
    const auto [h_ref, c_ref] = scalar_cell(x, h, c, p);
    for (Eigen::Index k = 0; k < 5; ++k) {
      REQUIRE(std::abs(out.h.value()(0, k) - h_ref[static_cast<std::size_t>(k)]) <= 1e-12);
      REQUIRE(std::abs(out.c.value()(0, k) - c_ref[static_cast<std::size_t>(k)]) <= 1e-12);
    }
  }
}

TEST_CASE("lstm_cell gradient") {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const LstmParams p = LstmParams::uniform(5, 5, rng, 0.8);
    Tensor x = Tensor::parameter(random_matrix(1, 5, rng));
    Tensor h = Tensor::parameter(random_matrix(1, 5, rng));
    Tensor c = Tensor::parameter(random_matrix(1, 5, rng));
    const Matrix proj = random_matrix(2, 5, rng);
    std::vector<Tensor> params = {x, h, c};
    for (auto& [name, t] : p.named_parameters("cell")) params.push_back(t);
    auto loss = [&] {
      const LstmState s = lstm_cell(x, {h, c}, p);
      return add(sum(mul(s.h, Tensor::constant(proj.row(0)))), sum(mul(s.c, Tensor::constant(proj.row(1)))));
    };
    REQUIRE(grad_check(loss, params) <= 1e-6);
  }
}

TEST_CASE("lstm_sequence equals repeated cells") {
  Rng rng(4);
  const LstmParams p = LstmParams::uniform(3, 4, rng, 0.5);
  const Matrix xs = random_matrix(5, 3, rng);
  const Matrix seq = lstm_sequence(Tensor::constant(xs), p, false).value();
  LstmState s{Tensor::constant(Matrix::Zero(1, 4)), Tensor::constant(Matrix::Zero(1, 4))};
  for (Eigen::Index t = 0; t < 5; ++t) {
    s = lstm_cell(Tensor::constant(xs.row(t)), s, p);
    REQUIRE((s.h.value() - seq.row(t)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("encode_bidirectional") {
  Rng rng(5);
  const BiLstmCrfModel m = small_model(4, 3, rng);
  const std::vector<int> one = {3};
  CHECK(encode_bidirectional(one, m).rows() == 1);
  CHECK(encode_bidirectional(one, m).cols() == 6);

  const std::vector<int> ids = {2, 5, 3, 7, 1};
  const Matrix out = encode_bidirectional(ids, m).value();

  // Swapping direction parameters and reversing the input swaps the halves.
  BiLstmCrfModel swapped = m;
  std::swap(swapped.forward_lstm, swapped.backward_lstm);
  const std::vector<int> reversed(ids.rbegin(), ids.rend());
  const Matrix rev = encode_bidirectional(reversed, swapped).value();
  for (Eigen::Index t = 0; t < 5; ++t) {
    REQUIRE((rev.row(t).leftCols(3) - out.row(4 - t).rightCols(3)).cwiseAbs().maxCoeff() <= 1e-12);
    REQUIRE((rev.row(t).rightCols(3) - out.row(4 - t).leftCols(3)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  // Right context reaches the first position.
  std::vector<int> changed = ids;
  changed.back() = 6;
  const Matrix out2 = encode_bidirectional(changed, m).value();
  CHECK((out2.row(0) - out.row(0)).cwiseAbs().maxCoeff() > 0.0);
  CHECK((out2.row(0).leftCols(3) - out.row(0).leftCols(3)).cwiseAbs().maxCoeff() == 0.0);

  const std::vector<int> bad = {2, 99};
  CHECK_THROWS(encode_bidirectional(bad, m));
}

TEST_CASE("bilstm_crf_loss gradient and sanity") {
  Rng rng(6);
  const BiLstmCrfModel m = small_model(4, 4, rng);
  const TaggedSentence s({"Pink", "Shirley", "blooms"}, {IobTag::B, IobTag::I, IobTag::O});
  auto params = params_of(m);
  CHECK(grad_check([&] { return bilstm_crf_loss(s, m, nullptr); }, params) <= 1e-6);

  const double loss = bilstm_crf_loss(s, m, nullptr).item();
  CHECK(loss > 0.0);
  CHECK(loss < 3.0 * std::log(3.0) + 1.0);

  // Only rows of tokens present in the sentence get embedding gradient.
  m.embedding.zero_grad();
  bilstm_crf_loss(s, m, nullptr).backward();
  const Matrix g = m.embedding.grad();
  for (int id = 0; id < static_cast<int>(m.vocab.size()); ++id) {
    const bool present = id == m.vocab.id("Pink") || id == m.vocab.id("Shirley") || id == m.vocab.id("blooms");
    CAPTURE(id);
    CHECK((g.row(id).cwiseAbs().maxCoeff() > 0.0) == present);
  }

  // Unknown words route to UNK instead of failing.
  const TaggedSentence unknown({"Zinnia", "blooms"}, {IobTag::B, IobTag::O});
  CHECK(bilstm_crf_loss(unknown, m, nullptr).item() > 0.0);
}

TEST_CASE("bilstm_crf memorizes one sentence") {
  Rng rng(7);
  BiLstmConfig cfg;  // full-size defaults
  BiLstmCrfModel m = make_bilstm_crf(small_vocab(), cfg, rng);
  const TaggedSentence s({"Pink", "Shirley", "Alliance", "blooms"}, {IobTag::B, IobTag::I, IobTag::I, IobTag::O});
  auto params = params_of(m);
  AdamState adam = make_adam_state(params);
  Rng dropout_rng(8);
  std::vector<Matrix> grads(params.size());
  for (int step = 0; step < 200; ++step) {
    for (Tensor& p : params) p.zero_grad();
    bilstm_crf_loss(s, m, &dropout_rng).backward();
    for (std::size_t i = 0; i < params.size(); ++i) grads[i] = params[i].grad();
    adam_step(params, grads, adam, 1e-3);
  }
  const double final_loss = bilstm_crf_loss(s, m, nullptr).item();
  CHECK(final_loss < 0.01);
  CHECK(bilstm_crf_predict(s.tokens(), m) == s.tags());
}

TEST_CASE("bilstm_crf_predict contract") {
  Rng rng(9);
  const BiLstmCrfModel m = small_model(6, 5, rng, 1.0);
  const std::vector<std::string> words = {"Pink", "Shirley", "x", "in", "June", "Alliance"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> tokens;
    for (std::size_t i = 0; i < 1 + rng.below(9); ++i) tokens.push_back(words[rng.below(words.size())]);
    const TagSequence a = bilstm_crf_predict(tokens, m);
    REQUIRE(a.size() == tokens.size());
    REQUIRE(is_valid_iob(a));
    REQUIRE(bilstm_crf_predict(tokens, m) == a);
  }
}
