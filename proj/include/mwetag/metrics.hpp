#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "mwetag/corpus.hpp"
#include "mwetag/iob.hpp"

namespace mwetag {

/// Rows are gold tags, columns predicted tags, both in B, I, O order.
using ConfusionMatrix = Eigen::Matrix<std::int64_t, kNumTags, kNumTags, Eigen::RowMajor>;

/// Throws std::invalid_argument naming the first sentence whose gold and
/// predicted lengths differ (or if the sentence counts differ).
ConfusionMatrix confusion(const std::vector<TagSequence>& gold, const std::vector<TagSequence>& pred);

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MacroF1 {
  std::array<ClassScores, kNumTags> per_class;
  double macro = 0.0;
};

/// Per-class precision, recall and F1 with 0/0 taken as 0, and their
/// unweighted mean F1. With `include_outside == false` the mean covers B and I
/// only.
MacroF1 macro_f1(const ConfusionMatrix& cm, bool include_outside = true);

struct SpanScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t true_positives = 0;
  std::int64_t predicted = 0;
  std::int64_t gold = 0;
};

/// Exact-boundary span matching, micro-aggregated over the corpus.
/// Predictions are repaired before decoding.
SpanScores span_f1(const std::vector<TagSequence>& gold, const std::vector<TagSequence>& pred);

struct EvalReport {
  ConfusionMatrix confusion = ConfusionMatrix::Zero();
  std::array<ClassScores, kNumTags> per_class{};
  double macro_f1 = 0.0;
  double span_precision = 0.0;
  double span_recall = 0.0;
  double span_f1 = 0.0;
  std::size_t n_sentences = 0;
  std::size_t n_tokens = 0;
};

EvalReport make_report(const std::vector<TagSequence>& gold, const std::vector<TagSequence>& pred,
                       bool include_outside = true);
nlohmann::json to_json(const EvalReport& report);

/// Predicts every sentence with `predict(tokens) -> TagSequence` and scores
/// the result against the gold tags.
template <class Predict>
EvalReport evaluate(Predict&& predict, const std::vector<TaggedSentence>& corpus, bool include_outside = true) {
  std::vector<TagSequence> gold;
  std::vector<TagSequence> pred;
  gold.reserve(corpus.size());
  pred.reserve(corpus.size());
  for (const auto& s : corpus) {
    gold.push_back(s.tags());
    pred.push_back(predict(s.tokens()));
  }
  return make_report(gold, pred, include_outside);
}

}  // namespace mwetag
