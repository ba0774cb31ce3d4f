#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mwetag/corpus.hpp"
#include "mwetag/model.hpp"

namespace mwetag {

enum class DecaySchedule { kLinear, kConstant };

struct TrainConfig {
  ModelKind model_kind = ModelKind::kTransformer;
  double lr = 4e-5;
  std::size_t batch_size = 32;
  std::size_t epochs = 3;
  /// Fraction of all optimizer steps spent in linear warmup.
  double warmup_fraction = 0.10;
  DecaySchedule decay = DecaySchedule::kLinear;
  std::uint64_t seed = 1;
  std::optional<double> clip_norm;
  bool lowercase = false;
  std::size_t min_count = 1;
  BiLstmConfig bilstm;
  EncoderConfig transformer;

  /// Recipe defaults per model kind: transformer lr 4e-5, batch 32, 3 epochs,
  /// 10% warmup, linear decay; BiLSTM-CRF lr 1e-3, batch 1, 60 epochs, no
  /// warmup, constant rate, clip norm 1.
  static TrainConfig defaults(ModelKind kind);

  /// Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
/// Starts from `base` and overrides every key present in `j`. Unknown keys
/// are rejected with std::invalid_argument.
TrainConfig apply_json(TrainConfig base, const nlohmann::json& j);

/// Warmup over W = round(warmup_fraction·total_steps) steps as lr·(step+1)/W,
/// then either constant or linear decay lr·(total−step)/(total−W).
double lr_at_step(std::size_t step, std::size_t total_steps, const TrainConfig& cfg);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double lr_end = 0.0;
  double seconds = 0.0;
};

nlohmann::json to_json(const EpochRecord& r);

struct TrainResult {
  Model model;
  std::vector<EpochRecord> trace;
  /// Sentences left out for exceeding the transformer's max_len.
  std::size_t skipped = 0;
};

using EpochCallback = std::function<void(const EpochRecord&, const Model&)>;

/// Builds the vocabulary from `corpus`, initializes the configured model and
/// trains it with Adam. Fully determined by cfg.seed. Throws
/// std::invalid_argument for an empty corpus or when every sentence is
/// skipped.
TrainResult train(const std::vector<TaggedSentence>& corpus, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// Freshly initialized model for `cfg` (used by train and the checkpoint loader).
Model init_model(Vocabulary vocab, const TrainConfig& cfg, Rng& rng);

/// Loss of one sentence under `model` (eval mode when `dropout_rng` is null).
Tensor sentence_loss(const Model& model, const TaggedSentence& sentence, Rng* dropout_rng);

}  // namespace mwetag
