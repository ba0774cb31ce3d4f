#include <doctest.h>

#include <cmath>

#include "mwetag/errors.hpp"
#include "mwetag/grad_check.hpp"
#include "mwetag/optim.hpp"
#include "mwetag/transformer.hpp"
#include "test_util.hpp"

using namespace mwetag;
using testing::random_matrix;

namespace {

Vocabulary small_vocab() {
  return Vocabulary(false, {"Pink", "Shirley", "Alliance", "blooms", "in", "June", "Rosa", "canina", "grows"});
}

EncoderConfig tiny_config() {
  EncoderConfig c;
  c.d_model = 8;
  c.n_heads = 2;
  c.n_layers = 1;
  c.d_ff = 16;
  c.dropout = 0.0;
  c.max_len = 16;
  return c;
}

AttentionParams random_attention(Eigen::Index d, Rng& rng) {
  auto m = [&](Eigen::Index r, Eigen::Index c) { return Tensor::parameter(random_matrix(r, c, rng, 0.7)); };
  return {m(d, d), m(1, d), m(d, d), m(1, d), m(d, d), m(1, d), m(d, d), m(1, d)};
}

std::vector<Tensor> params_of(const TransformerTagger& m) {
  std::vector<Tensor> out;
  for (auto& [name, t] : m.named_parameters()) out.push_back(t);
  return out;
}

}  // namespace

TEST_CASE("positional_encoding") {
  const Matrix pe = positional_encoding(50, 16);
  for (Eigen::Index i = 0; i < 8; ++i) {
    CHECK(pe(0, 2 * i) == 0.0);
    CHECK(pe(0, 2 * i + 1) == 1.0);
  }
  CHECK(pe.cwiseAbs().maxCoeff() <= 1.0);
  CHECK(pe(1, 0) == doctest::Approx(0.841471).epsilon(1e-6));
  CHECK(pe(1, 0) == std::sin(1.0));
  CHECK(pe(3, 5) == doctest::Approx(std::cos(3.0 / std::pow(10000.0, 4.0 / 16.0))));
}

TEST_CASE("multi_head_attention singleton and row sums") {
  Rng rng(1);
  const AttentionParams p = random_attention(4, rng);
  const Matrix x = random_matrix(1, 4, rng);
  std::vector<Matrix> weights;
  const Matrix out = multi_head_attention(Tensor::constant(x), p, 2, BatchLayout::single(1), &weights).value();
  REQUIRE(weights.size() == 2);
  for (const Matrix& w : weights) CHECK(w(0, 0) == 1.0);
  const Matrix v = x * p.value_w.value() + p.value_b.value();
  const Matrix expected = v * p.out_w.value() + p.out_b.value();
  CHECK((out - expected).cwiseAbs().maxCoeff() <= 1e-12);

  weights.clear();
  multi_head_attention(Tensor::constant(random_matrix(6, 4, rng)), p, 2, BatchLayout::single(6), &weights);
  for (const Matrix& w : weights) CHECK((w.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("multi_head_attention hand computation, one head, T=2, d=2") {
  auto t = [](std::initializer_list<double> v, Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    std::copy(v.begin(), v.end(), m.data());
    return Tensor::constant(m);
  };
  const AttentionParams p = {t({1, 0, 0, 1}, 2, 2),    t({0, 0}, 1, 2),   t({0.5, 0, 0, 2}, 2, 2),
                             t({0.1, 0}, 1, 2),         t({1, 1, 0, 1}, 2, 2), t({0, 0}, 1, 2),
                             t({1, 0, 0, 1}, 2, 2),    t({0, 0.5}, 1, 2)};
  const Tensor x = t({1, 2, 3, -1}, 2, 2);
  const Matrix out = multi_head_attention(x, p, 1, BatchLayout::single(2)).value();

  // q = x, k = [[0.6, 4], [1.6, -2]], v = [[1, 3], [3, 2]], scale 1/√2.
  const double s00 = (1 * 0.6 + 2 * 4) / std::sqrt(2.0);
  const double s01 = (1 * 1.6 + 2 * -2) / std::sqrt(2.0);
  const double s10 = (3 * 0.6 + -1 * 4) / std::sqrt(2.0);
  const double s11 = (3 * 1.6 + -1 * -2) / std::sqrt(2.0);
  const double a00 = std::exp(s00) / (std::exp(s00) + std::exp(s01));
  const double a10 = std::exp(s10) / (std::exp(s10) + std::exp(s11));
  const double r0c0 = a00 * 1 + (1 - a00) * 3;
  const double r0c1 = a00 * 3 + (1 - a00) * 2;
  const double r1c0 = a10 * 1 + (1 - a10) * 3;
  const double r1c1 = a10 * 3 + (1 - a10) * 2;
  CHECK(std::abs(out(0, 0) - r0c0) <= 1e-9);
  CHECK(std::abs(out(0, 1) - (r0c1 + 0.5)) <= 1e-9);
  CHECK(std::abs(out(1, 0) - r1c0) <= 1e-9);
  CHECK(std::abs(out(1, 1) - (r1c1 + 0.5)) <= 1e-9);
}

TEST_CASE("encoder_block") {
  Rng rng(2);
  const EncoderConfig cfg = tiny_config();
  const EncoderLayer layer = make_encoder_layer(cfg, rng);
  const Matrix x = random_matrix(5, 8, rng);
  const Matrix y = encoder_block(Tensor::constant(x), layer, cfg, BatchLayout::single(5), nullptr).value();
  CHECK(y.rows() == 5);
  CHECK(y.cols() == 8);
  // Fresh layers have unit gain and zero bias, so rows come out normalized.
  for (Eigen::Index r = 0; r < 5; ++r) {
    CHECK(std::abs(y.row(r).mean()) <= 1e-9);
    CHECK(std::abs((y.row(r).array() - y.row(r).mean()).square().mean() - 1.0) <= 1e-9);
  }

  Tensor xp = Tensor::parameter(x);
  const Matrix proj = random_matrix(5, 8, rng);
  std::vector<Tensor> params = {xp, layer.attention.query_w, layer.attention.key_w, layer.attention.value_w,
                                layer.attention.out_w, layer.ff1_w, layer.ff2_w, layer.norm1_gain,
                                layer.norm2_bias, layer.attention.key_b};
  auto loss = [&] {
    return sum(mul(encoder_block(xp, layer, cfg, BatchLayout::single(5), nullptr), Tensor::constant(proj)));
  };
  CHECK(grad_check(loss, params) <= 1e-6);
}

TEST_CASE("classify_tokens shapes and sanity") {
  Rng rng(3);
  const TransformerTagger m = make_transformer(small_vocab(), EncoderConfig{}, rng);
  const std::vector<std::string> tokens = {"Rosa", "canina", "grows", "in", "June"};
  const Tensor logits = classify_tokens(tokens, m, nullptr);
  CHECK(logits.rows() == 5);
  CHECK(logits.cols() == 3);

  double total = 0.0;
  Rng pick(4);
  for (int trial = 0; trial < 20; ++trial) {
    const TaggedSentence s = testing::random_sentence(pick);
    total += transformer_loss(s, m, nullptr).item();
  }
  CHECK(std::abs(total / 20.0 - std::log(3.0)) <= 0.5);

  std::vector<std::string> too_long(129, "Rosa");
  CHECK_THROWS_AS(classify_tokens(too_long, m, nullptr), LengthError);
  CHECK_THROWS(make_transformer(small_vocab(), EncoderConfig{.d_model = 10, .n_heads = 4}, rng));
}

TEST_CASE("full transformer gradient") {
  Rng rng(5);
  const TransformerTagger m = make_transformer(small_vocab(), tiny_config(), rng);
  const TaggedSentence s({"Pink", "Shirley", "grows"}, {IobTag::B, IobTag::I, IobTag::O});
  auto params = params_of(m);
  CHECK(grad_check([&] { return transformer_loss(s, m, nullptr); }, params) <= 1e-6);
}

TEST_CASE("position handling") {
  Rng rng(6);
  const std::vector<std::string> tokens = {"Pink", "Shirley", "Alliance", "blooms", "in"};
  const std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
  std::vector<std::string> permuted;
  for (std::size_t i : perm) permuted.push_back(tokens[i]);

  const TransformerTagger with_pe = make_transformer(small_vocab(), tiny_config(), rng);
  const Matrix a = classify_tokens(tokens, with_pe, nullptr).value();
  const Matrix b = classify_tokens(permuted, with_pe, nullptr).value();
  double diff = 0.0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    diff = std::max(diff, (b.row(static_cast<Eigen::Index>(i)) - a.row(static_cast<Eigen::Index>(perm[i])))
                              .cwiseAbs()
                              .maxCoeff());
  }
  CHECK(diff > 1e-6);

  EncoderConfig no_pe = tiny_config();
  no_pe.positional = false;
  const TransformerTagger bag = make_transformer(small_vocab(), no_pe, rng);
  const Matrix c = classify_tokens(tokens, bag, nullptr).value();
  const Matrix d = classify_tokens(permuted, bag, nullptr).value();
  for (std::size_t i = 0; i < perm.size(); ++i) {
    CHECK((d.row(static_cast<Eigen::Index>(i)) - c.row(static_cast<Eigen::Index>(perm[i]))).cwiseAbs().maxCoeff() <=
          1e-9);
  }
}

TEST_CASE("padding does not leak into real positions") {
  Rng rng(7);
  const TransformerTagger m = make_transformer(small_vocab(), tiny_config(), rng);
  const std::vector<int> shorter = {2, 3, 4};
  const std::vector<int> longer = {5, 6, 7, 8, 9, 10, 2};
  const Matrix alone = batch_logits({shorter}, m, nullptr).value();
  BatchLayout layout;
  const Matrix batched = batch_logits({shorter, longer}, m, nullptr, &layout).value();
  CHECK(layout.padded_len == 7);
  CHECK((batched.topRows(3) - alone).cwiseAbs().maxCoeff() <= 1e-9);

  const TaggedSentence s1({"Pink", "Shirley"}, {IobTag::B, IobTag::I});
  const TaggedSentence s2({"Rosa", "canina", "grows", "in", "June", "in", "June"},
                          {IobTag::B, IobTag::I, IobTag::O, IobTag::O, IobTag::O, IobTag::O, IobTag::O});
  const TaggedSentence* batch[] = {&s1, &s2};
  const auto losses = transformer_sentence_losses(batch, m, nullptr);
  CHECK(std::abs(losses[0].item() - transformer_loss(s1, m, nullptr).item()) <= 1e-9);
  CHECK(std::abs(losses[1].item() - transformer_loss(s2, m, nullptr).item()) <= 1e-9);
}

TEST_CASE("transformer memorizes one sentence") {
  Rng rng(8);
  TransformerTagger m = make_transformer(small_vocab(), EncoderConfig{}, rng);
  const TaggedSentence s({"Pink", "Shirley", "Alliance", "blooms", "in", "June"},
                         {IobTag::B, IobTag::I, IobTag::I, IobTag::O, IobTag::O, IobTag::O});
  auto params = params_of(m);
  AdamState adam = make_adam_state(params);
  Rng dropout_rng(9);
  std::vector<Matrix> grads(params.size());
  int steps = 0;
  double loss = 1.0;
  for (; steps < 300 && loss >= 0.01; ++steps) {
    for (Tensor& p : params) p.zero_grad();
    transformer_loss(s, m, &dropout_rng).backward();
    for (std::size_t i = 0; i < params.size(); ++i) grads[i] = params[i].grad();
    adam_step(params, grads, adam, 1e-3);
    loss = transformer_loss(s, m, nullptr).item();
  }
  MESSAGE("memorized after " << steps << " steps");
  CHECK(loss < 0.01);
  CHECK(transformer_predict(s.tokens(), m) == s.tags());
  CHECK(transformer_predict(s.tokens(), m) == transformer_predict(s.tokens(), m));
}
