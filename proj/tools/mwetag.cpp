// mwetag: generate synthetic corpora, train taggers, evaluate and tag text.
//
// Exit codes: 0 on success, 1 for data or model errors, 2 for usage errors.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mwetag/checkpoint.hpp"
#include "mwetag/corpus.hpp"
#include "mwetag/metrics.hpp"
#include "mwetag/synthetic.hpp"
#include "mwetag/train.hpp"

namespace fs = std::filesystem;
using namespace mwetag;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw std::runtime_error("no such file: " + path.string());
}

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

void write_text(const fs::path& path, const std::string& text) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

fs::path sibling(fs::path path, const std::string& suffix) { return path.replace_extension(suffix); }

std::vector<TaggedSentence> read_corpus(const fs::path& path) {
  require_file(path);
  LoadedCorpus loaded = load_corpus(path);
  if (loaded.repaired > 0) {
    std::cerr << "warning: " << loaded.repaired << " sentence(s) in " << path.string()
              << " had invalid IOB tags and were repaired\n";
  }
  return std::move(loaded.sentences);
}

std::string fixed(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(6) << v;
  return s.str();
}

struct GenerateArgs {
  std::uint64_t seed = 1;
  std::size_t sentences = 1000;
  fs::path out;
};

void run_generate(const GenerateArgs& a) {
  const auto corpus = generate_synthetic_corpus(a.seed, a.sentences);
  ensure_parent(a.out);
  save_corpus(corpus, a.out);
  const fs::path stats = sibling(a.out, ".stats.json");
  write_text(stats, to_json(corpus_stats(corpus)).dump(2) + "\n");
  std::cout << "wrote " << corpus.size() << " sentences to " << a.out.string() << "\n";
  std::cout << "wrote stats to " << stats.string() << "\n";
}

struct TrainArgs {
  std::optional<std::string> model;
  fs::path train;
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<double> lr;
  std::optional<std::size_t> batch_size;
  std::optional<double> warmup;
};

TrainConfig resolve_config(const TrainArgs& a) {
  nlohmann::json file = nlohmann::json::object();
  if (a.config) {
    require_file(*a.config);
    std::ifstream in(*a.config);
    try {
      file = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("cannot parse config " + a.config->string() + ": " + e.what());
    }
    if (!file.is_object()) throw std::runtime_error("config " + a.config->string() + " must hold a JSON object");
  }

  ModelKind kind;
  if (a.model) {
    kind = parse_model_kind(*a.model);
  } else if (file.contains("model_kind")) {
    kind = parse_model_kind(file["model_kind"].get<std::string>());
  } else {
    throw UsageError("--model is required unless the config file sets model_kind");
  }

  TrainConfig cfg = apply_json(TrainConfig::defaults(kind), file);
  cfg.model_kind = kind;
  if (a.seed) cfg.seed = *a.seed;
  if (a.epochs) cfg.epochs = *a.epochs;
  if (a.lr) cfg.lr = *a.lr;
  if (a.batch_size) cfg.batch_size = *a.batch_size;
  if (a.warmup) cfg.warmup_fraction = *a.warmup;
  cfg.validate();
  return cfg;
}

void run_train(const TrainArgs& a) {
  const TrainConfig cfg = resolve_config(a);
  const auto corpus = read_corpus(a.train);
  std::cout << "resolved config:\n" << to_json(cfg).dump(2) << "\n" << std::flush;

  const fs::path trace_path = sibling(a.out, ".trace.jsonl");
  ensure_parent(a.out);
  std::ofstream trace(trace_path);
  if (!trace) throw std::runtime_error("cannot write " + trace_path.string());

  const TrainResult result = train(corpus, cfg, [&](const EpochRecord& r, const Model&) {
    trace << to_json(r).dump() << "\n" << std::flush;
    std::cerr << "epoch " << r.epoch << "/" << cfg.epochs << " loss=" << fixed(r.mean_loss) << " lr=" << r.lr_end
              << " (" << std::setprecision(3) << r.seconds << "s)\n";
  });
  if (result.skipped > 0) {
    std::cerr << "warning: skipped " << result.skipped << " sentence(s) longer than max_len "
              << cfg.transformer.max_len << "\n";
  }
  save_checkpoint(result.model, cfg, a.out);
  std::cout << "wrote checkpoint to " << a.out.string() << "\n";
  std::cout << "wrote loss trace to " << trace_path.string() << "\n";
  std::cout << "final_loss=" << fixed(result.trace.back().mean_loss) << "\n";
}

struct EvalArgs {
  fs::path model_path;
  fs::path test;
  fs::path out;
  bool exclude_outside = false;
};

void run_eval(const EvalArgs& a) {
  require_file(a.model_path);
  const Checkpoint ckpt = load_checkpoint(a.model_path);
  const auto corpus = read_corpus(a.test);
  const EvalReport report =
      evaluate([&](const std::vector<std::string>& t) { return predict(ckpt.model, t); }, corpus, !a.exclude_outside);
  write_text(a.out, to_json(report).dump(2) + "\n");
  std::cout << "model=" << to_string(kind_of(ckpt.model)) << " sentences=" << report.n_sentences
            << " tokens=" << report.n_tokens << "\n";
  std::cout << "span_f1=" << fixed(report.span_f1) << "\n";
  std::cout << "macro_f1=" << fixed(report.macro_f1) << "\n";
}

struct TagArgs {
  fs::path model_path;
  std::optional<fs::path> in;
  std::optional<fs::path> out;
};

void run_tag(const TagArgs& a) {
  require_file(a.model_path);
  const Checkpoint ckpt = load_checkpoint(a.model_path);

  std::ifstream file;
  if (a.in) {
    require_file(*a.in);
    file.open(*a.in, std::ios::binary);
  }
  std::istream& in = a.in ? static_cast<std::istream&>(file) : std::cin;

  std::vector<TaggedSentence> tagged;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    std::istringstream words(line);
    std::vector<std::string> tokens;
    for (std::string w; words >> w;) tokens.push_back(std::move(w));
    if (tokens.empty()) {
      std::cerr << "warning: line " << number << " is empty, skipped\n";
      continue;
    }
    TagSequence tags = predict(ckpt.model, tokens);
    tagged.emplace_back(std::move(tokens), std::move(tags));
  }

  const std::string text = format_corpus(tagged);
  if (a.out) {
    write_text(*a.out, text);
  } else {
    std::cout << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiword expression tagging with BiLSTM-CRF and transformer models"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic plant-name corpus and its stats");
  generate->add_option("--seed", gen.seed, "Generator seed");
  generate->add_option("--sentences", gen.sentences, "Number of sentences")->check(CLI::PositiveNumber);
  generate->add_option("--out", gen.out, "Corpus file to write")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train a tagger and write a checkpoint");
  train_cmd->add_option("--model", tr.model, "bilstm-crf or transformer")
      ->check(CLI::IsMember({"bilstm-crf", "transformer"}));
  train_cmd->add_option("--train", tr.train, "Training corpus")->required();
  train_cmd->add_option("--config", tr.config, "JSON config file; flags override it");
  train_cmd->add_option("--out", tr.out, "Checkpoint file to write")->required();
  train_cmd->add_option("--seed", tr.seed, "Seed for initialization, shuffling and dropout");
  train_cmd->add_option("--epochs", tr.epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--lr", tr.lr)->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch-size", tr.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--warmup", tr.warmup, "Fraction of steps spent warming up")->check(CLI::Range(0.0, 0.999999));

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Score a checkpoint on a tagged corpus");
  eval_cmd->add_option("--model-path", ev.model_path, "Checkpoint file")->required();
  eval_cmd->add_option("--test", ev.test, "Gold corpus")->required();
  eval_cmd->add_option("--out", ev.out, "Report JSON to write")->required();
  eval_cmd->add_flag("--exclude-outside", ev.exclude_outside, "Average macro F1 over B and I only");

  TagArgs tg;
  auto* tag_cmd = app.add_subcommand("tag", "Tag whitespace-tokenized text, one sentence per line");
  tag_cmd->add_option("--model-path", tg.model_path, "Checkpoint file")->required();
  tag_cmd->add_option("--in", tg.in, "Input text (default stdin)");
  tag_cmd->add_option("--out", tg.out, "Output corpus file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) run_generate(gen);
    if (train_cmd->parsed()) run_train(tr);
    if (eval_cmd->parsed()) run_eval(ev);
    if (tag_cmd->parsed()) run_tag(tg);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
