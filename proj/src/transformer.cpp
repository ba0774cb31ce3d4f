#include "mwetag/transformer.hpp"

#include <cmath>
#include <stdexcept>

#include "mwetag/errors.hpp"

namespace mwetag {
namespace {

Tensor xavier(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(fan_in, fan_out);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-r, r);
  return Tensor::parameter(std::move(m));
}

Tensor zeros(Eigen::Index cols) { return Tensor::parameter(Matrix::Zero(1, cols)); }
Tensor ones(Eigen::Index cols) { return Tensor::parameter(Matrix::Ones(1, cols)); }

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) { return add_row(matmul(x, w), b); }

// Additive key mask for one sequence block: 0 for real keys, the mask score
// for padded ones. Returns an empty matrix when nothing is padded.
Matrix key_mask(Eigen::Index padded_len, Eigen::Index length) {
  if (length == padded_len) return {};
  Matrix m = Matrix::Zero(padded_len, padded_len);
  m.rightCols(padded_len - length).setConstant(kAttentionMaskScore);
  return m;
}

}  // namespace

void EncoderConfig::validate() const {
  if (d_model < 1 || n_heads < 1 || n_layers < 1 || d_ff < 1 || max_len < 1) {
    throw std::invalid_argument("encoder dimensions must be positive");
  }
  if (d_model % n_heads != 0) throw std::invalid_argument("d_model must be divisible by n_heads");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
}

void to_json(nlohmann::json& j, const EncoderConfig& c) {
  j = {{"d_model", c.d_model},     {"n_heads", c.n_heads}, {"n_layers", c.n_layers},
       {"d_ff", c.d_ff},           {"dropout", c.dropout}, {"max_len", c.max_len},
       {"positional", c.positional}, {"layer_norm_eps", c.layer_norm_eps}};
}

void from_json(const nlohmann::json& j, EncoderConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("transformer config must be a JSON object");
  const nlohmann::json known = c;
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) throw std::invalid_argument("unknown transformer config key '" + item.key() + "'");
  }
  c.d_model = j.value("d_model", c.d_model);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.dropout = j.value("dropout", c.dropout);
  c.max_len = j.value("max_len", c.max_len);
  c.positional = j.value("positional", c.positional);
  c.layer_norm_eps = j.value("layer_norm_eps", c.layer_norm_eps);
}

Matrix positional_encoding(Eigen::Index length, Eigen::Index d_model) {
  Matrix pe(length, d_model);
  for (Eigen::Index t = 0; t < length; ++t) {
    for (Eigen::Index k = 0; k < d_model; ++k) {
      const Eigen::Index pair = k / 2;
      const double angle =
          static_cast<double>(t) / std::pow(10000.0, static_cast<double>(2 * pair) / static_cast<double>(d_model));
      pe(t, k) = (k % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

Tensor multi_head_attention(const Tensor& x, const AttentionParams& p, int n_heads, const BatchLayout& layout,
                            std::vector<Matrix>* weights) {
  if (x.rows() != layout.total_rows()) {
    throw ShapeError("multi_head_attention: input " + x.shape_string() + " does not match batch layout of " +
                     std::to_string(layout.total_rows()) + " rows");
  }
  const Eigen::Index d = x.cols();
  if (n_heads < 1 || d % n_heads != 0) throw ShapeError("multi_head_attention: d_model not divisible by heads");
  if (p.query_w.rows() != d) {
    throw ShapeError("multi_head_attention: projection " + p.query_w.shape_string() + " for input " +
                     x.shape_string());
  }
  const Eigen::Index dh = d / n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  const Tensor q = linear(x, p.query_w, p.query_b);
  const Tensor k = linear(x, p.key_w, p.key_b);
  const Tensor v = linear(x, p.value_w, p.value_b);
  const Eigen::Index P = layout.padded_len;

  std::vector<Tensor> sequences;
  sequences.reserve(layout.lengths.size());
  for (std::size_t s = 0; s < layout.lengths.size(); ++s) {
    const Eigen::Index r0 = static_cast<Eigen::Index>(s) * P;
    const Matrix mask = key_mask(P, layout.lengths[s]);
    std::vector<Tensor> heads;
    heads.reserve(static_cast<std::size_t>(n_heads));
    for (int h = 0; h < n_heads; ++h) {
      const Eigen::Index c0 = h * dh;
      Tensor scores = scale(matmul(slice(q, r0, P, c0, dh), transpose(slice(k, r0, P, c0, dh))), inv_sqrt);
      if (mask.size() != 0) scores = add(scores, Tensor::constant(mask));
      Tensor attn = softmax(scores, 1);
      if (weights != nullptr) weights->push_back(attn.value());
      heads.push_back(matmul(attn, slice(v, r0, P, c0, dh)));
    }
    sequences.push_back(n_heads == 1 ? heads.front() : concat_cols(heads));
  }
  Tensor merged = sequences.size() == 1 ? sequences.front() : concat_rows(sequences);
  return linear(merged, p.out_w, p.out_b);
}

Tensor encoder_block(const Tensor& x, const EncoderLayer& layer, const EncoderConfig& config,
                     const BatchLayout& layout, Rng* dropout_rng) {
  const double eps = config.layer_norm_eps;
  Tensor attended = multi_head_attention(x, layer.attention, config.n_heads, layout);
  Tensor y = layer_norm(add(x, dropout(attended, config.dropout, dropout_rng)), layer.norm1_gain, layer.norm1_bias,
                        eps);
  Tensor ff = linear(relu(linear(y, layer.ff1_w, layer.ff1_b)), layer.ff2_w, layer.ff2_b);
  return layer_norm(add(y, dropout(ff, config.dropout, dropout_rng)), layer.norm2_gain, layer.norm2_bias, eps);
}

EncoderLayer make_encoder_layer(const EncoderConfig& config, Rng& rng) {
  const Eigen::Index d = config.d_model;
  EncoderLayer l;
  l.attention = {xavier(d, d, rng), zeros(d), xavier(d, d, rng), zeros(d),
                 xavier(d, d, rng), zeros(d), xavier(d, d, rng), zeros(d)};
  l.norm1_gain = ones(d);
  l.norm1_bias = zeros(d);
  l.ff1_w = xavier(d, config.d_ff, rng);
  l.ff1_b = zeros(config.d_ff);
  l.ff2_w = xavier(config.d_ff, d, rng);
  l.ff2_b = zeros(d);
  l.norm2_gain = ones(d);
  l.norm2_bias = zeros(d);
  return l;
}

TransformerTagger make_transformer(Vocabulary vocab, const EncoderConfig& config, Rng& rng) {
  config.validate();
  TransformerTagger m;
  m.config = config;
  Matrix emb(static_cast<Eigen::Index>(vocab.size()), config.d_model);
  for (Eigen::Index i = 0; i < emb.size(); ++i) emb.data()[i] = rng.uniform(-1.0, 1.0);
  m.embedding = Tensor::parameter(std::move(emb));
  m.vocab = std::move(vocab);
  for (int i = 0; i < config.n_layers; ++i) m.layers.push_back(make_encoder_layer(config, rng));
  m.head_w = xavier(config.d_model, kNumTags, rng);
  m.head_b = zeros(kNumTags);
  return m;
}

std::vector<std::pair<std::string, Tensor>> TransformerTagger::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("embedding", embedding);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const std::string p = "layer" + std::to_string(i) + ".";
    const EncoderLayer& l = layers[i];
    out.emplace_back(p + "attn.q.W", l.attention.query_w);
    out.emplace_back(p + "attn.q.b", l.attention.query_b);
    out.emplace_back(p + "attn.k.W", l.attention.key_w);
    out.emplace_back(p + "attn.k.b", l.attention.key_b);
    out.emplace_back(p + "attn.v.W", l.attention.value_w);
    out.emplace_back(p + "attn.v.b", l.attention.value_b);
    out.emplace_back(p + "attn.out.W", l.attention.out_w);
    out.emplace_back(p + "attn.out.b", l.attention.out_b);
    out.emplace_back(p + "norm1.gain", l.norm1_gain);
    out.emplace_back(p + "norm1.bias", l.norm1_bias);
    out.emplace_back(p + "ff1.W", l.ff1_w);
    out.emplace_back(p + "ff1.b", l.ff1_b);
    out.emplace_back(p + "ff2.W", l.ff2_w);
    out.emplace_back(p + "ff2.b", l.ff2_b);
    out.emplace_back(p + "norm2.gain", l.norm2_gain);
    out.emplace_back(p + "norm2.bias", l.norm2_bias);
  }
  out.emplace_back("head.W", head_w);
  out.emplace_back("head.b", head_b);
  return out;
}

Tensor batch_logits(const std::vector<std::vector<int>>& ids, const TransformerTagger& model, Rng* dropout_rng,
                    BatchLayout* layout_out) {
  if (ids.empty()) throw ShapeError("batch_logits: empty batch");
  BatchLayout layout;
  for (const auto& seq : ids) {
    const auto n = static_cast<Eigen::Index>(seq.size());
    if (n < 1) throw ShapeError("batch_logits: empty sentence");
    if (n > model.config.max_len) {
      throw LengthError("sentence of " + std::to_string(n) + " tokens exceeds max_len " +
                        std::to_string(model.config.max_len));
    }
    layout.lengths.push_back(n);
    layout.padded_len = std::max(layout.padded_len, n);
  }
  std::vector<int> flat;
  flat.reserve(static_cast<std::size_t>(layout.total_rows()));
  for (const auto& seq : ids) {
    flat.insert(flat.end(), seq.begin(), seq.end());
    flat.insert(flat.end(), static_cast<std::size_t>(layout.padded_len) - seq.size(), Vocabulary::kPad);
  }
  Tensor x = gather_rows(model.embedding, flat);
  if (model.config.positional) {
    const Matrix pe = positional_encoding(layout.padded_len, model.config.d_model);
    x = add(x, Tensor::constant(pe.replicate(static_cast<Eigen::Index>(ids.size()), 1)));
  }
  x = dropout(x, model.config.dropout, dropout_rng);
  for (const EncoderLayer& layer : model.layers) x = encoder_block(x, layer, model.config, layout, dropout_rng);
  if (layout_out != nullptr) *layout_out = layout;
  return linear(x, model.head_w, model.head_b);
}

Tensor classify_tokens(const std::vector<std::string>& tokens, const TransformerTagger& model, Rng* dropout_rng) {
  return batch_logits({model.vocab.ids(tokens)}, model, dropout_rng);
}

std::vector<Tensor> transformer_sentence_losses(std::span<const TaggedSentence* const> batch,
                                                const TransformerTagger& model, Rng* dropout_rng) {
  std::vector<std::vector<int>> ids;
  ids.reserve(batch.size());
  for (const TaggedSentence* s : batch) ids.push_back(model.vocab.ids(s->tokens()));
  BatchLayout layout;
  const Tensor logits = batch_logits(ids, model, dropout_rng, &layout);
  const Tensor lse = logsumexp(logits, 1);

  std::vector<Tensor> losses;
  losses.reserve(batch.size());
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto& tags = batch[s]->tags();
    std::vector<int> rows(tags.size());
    std::vector<int> cols(tags.size());
    const std::vector<int> zero(tags.size(), 0);
    for (std::size_t t = 0; t < tags.size(); ++t) {
      rows[t] = static_cast<int>(static_cast<Eigen::Index>(s) * layout.padded_len + static_cast<Eigen::Index>(t));
      cols[t] = tag_index(tags[t]);
    }
    Tensor nll = sub(sum(pick(lse, rows, zero)), sum(pick(logits, rows, cols)));
    losses.push_back(scale(nll, 1.0 / static_cast<double>(tags.size())));
  }
  return losses;
}

Tensor transformer_loss(const TaggedSentence& sentence, const TransformerTagger& model, Rng* dropout_rng) {
  const TaggedSentence* one[] = {&sentence};
  return transformer_sentence_losses(one, model, dropout_rng).front();
}

TagSequence transformer_predict(const std::vector<std::string>& tokens, const TransformerTagger& model) {
  NoGradGuard no_grad;
  const Matrix logits = classify_tokens(tokens, model, nullptr).value();
  TagSequence tags;
  tags.reserve(tokens.size());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index best = 0;
    logits.row(t).maxCoeff(&best);  // first maximum on ties
    tags.push_back(tag_from_index(static_cast<int>(best)));
  }
  return repair_tags(tags);
}

}  // namespace mwetag
