#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mwetag/bilstm_crf.hpp"
#include "mwetag/transformer.hpp"

namespace mwetag {

enum class ModelKind { kBiLstmCrf, kTransformer };

std::string_view to_string(ModelKind kind);
/// Accepts "bilstm-crf" and "transformer"; throws std::invalid_argument otherwise.
ModelKind parse_model_kind(std::string_view text);

using Model = std::variant<BiLstmCrfModel, TransformerTagger>;

inline ModelKind kind_of(const Model& m) {
  return std::holds_alternative<BiLstmCrfModel>(m) ? ModelKind::kBiLstmCrf : ModelKind::kTransformer;
}

inline std::vector<std::pair<std::string, Tensor>> named_parameters(const Model& m) {
  return std::visit([](const auto& model) { return model.named_parameters(); }, m);
}

inline const Vocabulary& vocabulary(const Model& m) {
  return std::visit([](const auto& model) -> const Vocabulary& { return model.vocab; }, m);
}

/// Eval-mode tags for one sentence; always IOB-valid.
inline TagSequence predict(const Model& m, const std::vector<std::string>& tokens) {
  if (const auto* b = std::get_if<BiLstmCrfModel>(&m)) return bilstm_crf_predict(tokens, *b);
  return transformer_predict(tokens, std::get<TransformerTagger>(m));
}

}  // namespace mwetag
