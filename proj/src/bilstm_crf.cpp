#include "mwetag/bilstm_crf.hpp"

#include <stdexcept>

#include "mwetag/errors.hpp"
#include "mwetag/ops.hpp"

namespace mwetag {

void to_json(nlohmann::json& j, const BiLstmConfig& c) {
  j = {{"embed_dim", c.embed_dim},
       {"hidden_dim", c.hidden_dim},
       {"dropout", c.dropout},
       {"init_range", c.init_range},
       {"structural_mask", c.structural_mask}};
}

void from_json(const nlohmann::json& j, BiLstmConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("bilstm config must be a JSON object");
  const nlohmann::json known = c;
  for (const auto& item : j.items()) {
    if (!known.contains(item.key())) throw std::invalid_argument("unknown bilstm config key '" + item.key() + "'");
  }
  c.embed_dim = j.value("embed_dim", c.embed_dim);
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.dropout = j.value("dropout", c.dropout);
  c.init_range = j.value("init_range", c.init_range);
  c.structural_mask = j.value("structural_mask", c.structural_mask);
}

std::vector<std::pair<std::string, Tensor>> BiLstmCrfModel::named_parameters() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("embedding", embedding);
  for (auto& p : forward_lstm.named_parameters("lstm_fwd")) out.push_back(std::move(p));
  for (auto& p : backward_lstm.named_parameters("lstm_bwd")) out.push_back(std::move(p));
  out.emplace_back("emission.W", emission_proj);
  out.emplace_back("emission.b", emission_bias);
  out.emplace_back("crf.transitions", crf.transitions);
  out.emplace_back("crf.start", crf.start);
  out.emplace_back("crf.stop", crf.stop);
  return out;
}

BiLstmCrfModel make_bilstm_crf(Vocabulary vocab, const BiLstmConfig& config, Rng& rng) {
  if (config.embed_dim < 1 || config.hidden_dim < 1) throw std::invalid_argument("BiLSTM dimensions must be positive");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  const double r = config.init_range;
  auto uniform = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-r, r);
    return Tensor::parameter(std::move(m));
  };
  BiLstmCrfModel m;
  m.config = config;
  m.embedding = uniform(static_cast<Eigen::Index>(vocab.size()), config.embed_dim);
  m.vocab = std::move(vocab);
  m.forward_lstm = LstmParams::uniform(config.embed_dim, config.hidden_dim, rng, r);
  m.backward_lstm = LstmParams::uniform(config.embed_dim, config.hidden_dim, rng, r);
  m.emission_proj = uniform(2 * config.hidden_dim, kNumTags);
  m.emission_bias = Tensor::parameter(Matrix::Zero(1, kNumTags));
  m.crf = CrfParams::uniform(kNumTags, rng, r, config.structural_mask);
  return m;
}

Tensor encode_bidirectional(std::span<const int> word_ids, const BiLstmCrfModel& model) {
  if (word_ids.empty()) throw ShapeError("encode_bidirectional: empty sentence");
  Tensor x = gather_rows(model.embedding, word_ids);
  const Tensor halves[] = {lstm_sequence(x, model.forward_lstm, false), lstm_sequence(x, model.backward_lstm, true)};
  return concat_cols(halves);
}

Tensor bilstm_emissions(std::span<const int> word_ids, const BiLstmCrfModel& model, Rng* dropout_rng) {
  Tensor h = dropout(encode_bidirectional(word_ids, model), model.config.dropout, dropout_rng);
  return add_row(matmul(h, model.emission_proj), model.emission_bias);
}

Tensor bilstm_crf_loss(const TaggedSentence& sentence, const BiLstmCrfModel& model, Rng* dropout_rng) {
  const std::vector<int> ids = model.vocab.ids(sentence.tokens());
  return nll_loss(bilstm_emissions(ids, model, dropout_rng), std::span<const IobTag>(sentence.tags()), model.crf);
}

TagSequence bilstm_crf_predict(const std::vector<std::string>& tokens, const BiLstmCrfModel& model) {
  NoGradGuard no_grad;
  const std::vector<int> ids = model.vocab.ids(tokens);
  const Tensor em = bilstm_emissions(ids, model, nullptr);
  const auto best = viterbi(em.value(), model.crf);
  return repair_tags(from_indices(best.tags));
}

}  // namespace mwetag
