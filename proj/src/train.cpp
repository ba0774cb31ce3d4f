#include "mwetag/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mwetag/errors.hpp"
#include "mwetag/optim.hpp"

namespace mwetag {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::kBiLstmCrf ? "bilstm-crf" : "transformer";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "bilstm-crf") return ModelKind::kBiLstmCrf;
  if (text == "transformer") return ModelKind::kTransformer;
  throw std::invalid_argument("unknown model kind '" + std::string(text) + "' (expected bilstm-crf or transformer)");
}

TrainConfig TrainConfig::defaults(ModelKind kind) {
  TrainConfig c;
  c.model_kind = kind;
  if (kind == ModelKind::kBiLstmCrf) {
    c.lr = 1e-3;
    c.batch_size = 1;
    c.epochs = 60;
    c.warmup_fraction = 0.0;
    c.decay = DecaySchedule::kConstant;
    c.clip_norm = 1.0;
  }
  return c;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) throw std::invalid_argument("warmup_fraction must lie in [0, 1)");
  if (clip_norm && !(*clip_norm > 0.0)) throw std::invalid_argument("clip_norm must be positive");
  if (min_count < 1) throw std::invalid_argument("min_count must be at least 1");
  if (model_kind == ModelKind::kTransformer) transformer.validate();
}

nlohmann::json to_json(const TrainConfig& cfg) {
  nlohmann::json j;
  j["model_kind"] = std::string(to_string(cfg.model_kind));
  j["lr"] = cfg.lr;
  j["batch_size"] = cfg.batch_size;
  j["epochs"] = cfg.epochs;
  j["warmup_fraction"] = cfg.warmup_fraction;
  j["decay"] = cfg.decay == DecaySchedule::kLinear ? "linear" : "constant";
  j["seed"] = cfg.seed;
  j["clip_norm"] = cfg.clip_norm ? nlohmann::json(*cfg.clip_norm) : nlohmann::json(nullptr);
  j["lowercase"] = cfg.lowercase;
  j["min_count"] = cfg.min_count;
  j["bilstm"] = cfg.bilstm;
  j["transformer"] = cfg.transformer;
  return j;
}

TrainConfig apply_json(TrainConfig c, const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const nlohmann::json& v = it.value();
    if (key == "model_kind") {
      c.model_kind = parse_model_kind(v.get<std::string>());
    } else if (key == "lr") {
      c.lr = v.get<double>();
    } else if (key == "batch_size") {
      c.batch_size = v.get<std::size_t>();
    } else if (key == "epochs") {
      c.epochs = v.get<std::size_t>();
    } else if (key == "warmup_fraction") {
      c.warmup_fraction = v.get<double>();
    } else if (key == "decay") {
      const auto s = v.get<std::string>();
      if (s == "linear") {
        c.decay = DecaySchedule::kLinear;
      } else if (s == "constant") {
        c.decay = DecaySchedule::kConstant;
      } else {
        throw std::invalid_argument("decay must be 'linear' or 'constant'");
      }
    } else if (key == "seed") {
      c.seed = v.get<std::uint64_t>();
    } else if (key == "clip_norm") {
      c.clip_norm = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
    } else if (key == "lowercase") {
      c.lowercase = v.get<bool>();
    } else if (key == "min_count") {
      c.min_count = v.get<std::size_t>();
    } else if (key == "bilstm") {
      from_json(v, c.bilstm);
    } else if (key == "transformer") {
      from_json(v, c.transformer);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }
  return c;
}

double lr_at_step(std::size_t step, std::size_t total_steps, const TrainConfig& cfg) {
  const auto warmup = static_cast<std::size_t>(std::llround(cfg.warmup_fraction * static_cast<double>(total_steps)));
  if (step < warmup) return cfg.lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
  if (cfg.decay == DecaySchedule::kConstant) return cfg.lr;
  return cfg.lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - warmup);
}

nlohmann::json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch}, {"mean_loss", r.mean_loss}, {"lr_end", r.lr_end}, {"seconds", r.seconds}};
}

Model init_model(Vocabulary vocab, const TrainConfig& cfg, Rng& rng) {
  if (cfg.model_kind == ModelKind::kBiLstmCrf) return make_bilstm_crf(std::move(vocab), cfg.bilstm, rng);
  return make_transformer(std::move(vocab), cfg.transformer, rng);
}

Tensor sentence_loss(const Model& model, const TaggedSentence& sentence, Rng* dropout_rng) {
  if (const auto* b = std::get_if<BiLstmCrfModel>(&model)) return bilstm_crf_loss(sentence, *b, dropout_rng);
  return transformer_loss(sentence, std::get<TransformerTagger>(model), dropout_rng);
}

TrainResult train(const std::vector<TaggedSentence>& corpus, const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (corpus.empty()) throw std::invalid_argument("training corpus is empty");

  Rng root(cfg.seed);
  Rng init_rng = root.fork();
  Rng shuffle_rng = root.fork();
  Rng dropout_rng = root.fork();

  TrainResult result{init_model(build_vocabulary(corpus, cfg.lowercase, cfg.min_count), cfg, init_rng), {}, 0};

  std::vector<const TaggedSentence*> usable;
  usable.reserve(corpus.size());
  for (const auto& s : corpus) {
    if (cfg.model_kind == ModelKind::kTransformer &&
        s.size() > static_cast<std::size_t>(cfg.transformer.max_len)) {
      ++result.skipped;
      continue;
    }
    usable.push_back(&s);
  }
  if (usable.empty()) throw std::invalid_argument("every training sentence exceeds max_len");

  auto named = named_parameters(result.model);
  std::vector<Tensor> params;
  params.reserve(named.size());
  for (auto& [name, t] : named) params.push_back(t);
  AdamState adam = make_adam_state(params);

  const std::size_t n = usable.size();
  const std::size_t batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t total_steps = batches_per_epoch * cfg.epochs;
  std::size_t step = 0;
  std::vector<std::size_t> order(n);
  std::vector<Matrix> grads(params.size());

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    double lr = 0.0;
    for (std::size_t b = 0; b < batches_per_epoch; ++b) {
      const std::size_t lo = b * cfg.batch_size;
      const std::size_t hi = std::min(n, lo + cfg.batch_size);
      std::vector<const TaggedSentence*> batch;
      for (std::size_t i = lo; i < hi; ++i) batch.push_back(usable[order[i]]);

      for (Tensor& p : params) p.zero_grad();
      std::vector<Tensor> losses;
      if (const auto* tf = std::get_if<TransformerTagger>(&result.model)) {
        losses = transformer_sentence_losses(batch, *tf, &dropout_rng);
      } else {
        for (const TaggedSentence* s : batch) losses.push_back(sentence_loss(result.model, *s, &dropout_rng));
      }
      Tensor batch_loss = losses.size() == 1 ? losses.front() : concat_rows(losses);
      batch_loss = mean(batch_loss);
      for (const Tensor& l : losses) loss_sum += l.item();
      batch_loss.backward();

      for (std::size_t i = 0; i < params.size(); ++i) grads[i] = params[i].grad();
      if (cfg.clip_norm) clip_global_norm(grads, *cfg.clip_norm);
      lr = lr_at_step(step, total_steps, cfg);
      adam_step(params, grads, adam, lr);
      ++step;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_sum / static_cast<double>(n);
    rec.lr_end = lr;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.trace.push_back(rec);
    if (on_epoch) on_epoch(rec, result.model);
  }
  for (Tensor& p : params) p.zero_grad();
  return result;
}

}  // namespace mwetag
