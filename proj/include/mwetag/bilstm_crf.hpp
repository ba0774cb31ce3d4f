#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mwetag/corpus.hpp"
#include "mwetag/crf.hpp"
#include "mwetag/lstm.hpp"
#include "mwetag/vocabulary.hpp"

namespace mwetag {

struct BiLstmConfig {
  int embed_dim = 100;
  int hidden_dim = 128;  // per direction
  double dropout = 0.5;  // on the concatenated BiLSTM output
  double init_range = 0.1;
  bool structural_mask = false;
};

void to_json(nlohmann::json& j, const BiLstmConfig& c);
void from_json(const nlohmann::json& j, BiLstmConfig& c);

/// embedding → forward/backward LSTM → linear emission projection → CRF.
struct BiLstmCrfModel {
  Vocabulary vocab;
  BiLstmConfig config;
  Tensor embedding;        // V×D
  LstmParams forward_lstm;
  LstmParams backward_lstm;
  Tensor emission_proj;    // 2H×K
  Tensor emission_bias;    // 1×K
  CrfParams crf;

  /// Stable names in a fixed order; used by the optimizer and checkpoints.
  std::vector<std::pair<std::string, Tensor>> named_parameters() const;
};

BiLstmCrfModel make_bilstm_crf(Vocabulary vocab, const BiLstmConfig& config, Rng& rng);

/// T×2H; row t is [forward hₜ, backward hₜ]. Throws ShapeError for ids
/// outside the embedding table.
Tensor encode_bidirectional(std::span<const int> word_ids, const BiLstmCrfModel& model);

/// T×K emission scores. Dropout on the encoder output is active only when
/// `dropout_rng` is non-null.
Tensor bilstm_emissions(std::span<const int> word_ids, const BiLstmCrfModel& model, Rng* dropout_rng);

/// CRF negative log-likelihood of the gold tags; tokens are mapped through
/// the model vocabulary with unknown words sent to UNK.
Tensor bilstm_crf_loss(const TaggedSentence& sentence, const BiLstmCrfModel& model, Rng* dropout_rng);

/// Viterbi decode followed by repair_tags; always IOB-valid.
TagSequence bilstm_crf_predict(const std::vector<std::string>& tokens, const BiLstmCrfModel& model);

}  // namespace mwetag
