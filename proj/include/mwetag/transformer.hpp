#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mwetag/corpus.hpp"
#include "mwetag/ops.hpp"
#include "mwetag/vocabulary.hpp"

namespace mwetag {

/// Added to attention scores of padded key positions.
inline constexpr double kAttentionMaskScore = -10000.0;

struct EncoderConfig {
  int d_model = 64;
  int n_heads = 4;
  int n_layers = 2;
  int d_ff = 256;
  double dropout = 0.1;
  int max_len = 128;
  /// Add sinusoidal position encodings to the embeddings.
  bool positional = true;
  double layer_norm_eps = 1e-12;

  /// Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

void to_json(nlohmann::json& j, const EncoderConfig& c);
void from_json(const nlohmann::json& j, EncoderConfig& c);

/// T×d table with PE[t,2i] = sin(t/10000^(2i/d)) and PE[t,2i+1] = cos(·).
Matrix positional_encoding(Eigen::Index length, Eigen::Index d_model);

/// Projections in input-major orientation: y = x·W + b.
struct AttentionParams {
  Tensor query_w, query_b;
  Tensor key_w, key_b;
  Tensor value_w, value_b;
  Tensor out_w, out_b;
};

struct EncoderLayer {
  AttentionParams attention;
  Tensor norm1_gain, norm1_bias;
  Tensor ff1_w, ff1_b;  // d_model×d_ff, 1×d_ff
  Tensor ff2_w, ff2_b;  // d_ff×d_model, 1×d_model
  Tensor norm2_gain, norm2_bias;
};

/// Row blocks of a stacked batch: sequence s occupies rows
/// [s·padded_len, (s+1)·padded_len) and only its first lengths[s] rows are
/// real. Padded key positions are masked out of attention.
struct BatchLayout {
  Eigen::Index padded_len = 0;
  std::vector<Eigen::Index> lengths;

  Eigen::Index total_rows() const { return padded_len * static_cast<Eigen::Index>(lengths.size()); }
  static BatchLayout single(Eigen::Index length) { return {length, {length}}; }
};

/// Self-attention over each sequence block: per head
/// softmax(Q Kᵀ/√d_head + mask)·V, heads concatenated and projected. Masked
/// keys get kAttentionMaskScore added before the softmax. When `weights` is given
/// it receives one T×T attention matrix per (sequence, head).
Tensor multi_head_attention(const Tensor& x, const AttentionParams& p, int n_heads, const BatchLayout& layout,
                            std::vector<Matrix>* weights = nullptr);

/// Post-norm block: y = LN(x + drop(MHA(x))); out = LN(y + drop(FFN(y))) with
/// FFN = relu(y W₁ + b₁) W₂ + b₂.
Tensor encoder_block(const Tensor& x, const EncoderLayer& layer, const EncoderConfig& config,
                     const BatchLayout& layout, Rng* dropout_rng);

/// Encoder stack plus a linear token head over {B, I, O}.
struct TransformerTagger {
  Vocabulary vocab;
  EncoderConfig config;
  Tensor embedding;  // V×d_model
  std::vector<EncoderLayer> layers;
  Tensor head_w;     // d_model×K
  Tensor head_b;     // 1×K

  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
};

TransformerTagger make_transformer(Vocabulary vocab, const EncoderConfig& config, Rng& rng);

EncoderLayer make_encoder_layer(const EncoderConfig& config, Rng& rng);

/// Logits for a padded batch of id sequences, (B·padded_len)×K. Throws
/// LengthError if any sequence exceeds max_len.
Tensor batch_logits(const std::vector<std::vector<int>>& ids, const TransformerTagger& model, Rng* dropout_rng,
                    BatchLayout* layout_out = nullptr);

/// T×K logits for one sentence.
Tensor classify_tokens(const std::vector<std::string>& tokens, const TransformerTagger& model, Rng* dropout_rng);

/// Mean token cross-entropy of each sentence, computed on one padded batch.
std::vector<Tensor> transformer_sentence_losses(std::span<const TaggedSentence* const> batch,
                                                const TransformerTagger& model, Rng* dropout_rng);

/// Mean cross-entropy for a single sentence.
Tensor transformer_loss(const TaggedSentence& sentence, const TransformerTagger& model, Rng* dropout_rng);

/// Per-position argmax followed by repair_tags.
TagSequence transformer_predict(const std::vector<std::string>& tokens, const TransformerTagger& model);

}  // namespace mwetag
