#include "mwetag/corpus.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mwetag/errors.hpp"

namespace mwetag {
namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) fields.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

}  // namespace

bool is_valid_surface(const std::string& surface) {
  if (surface.empty()) return false;
  for (char c : surface) {
    if (is_space(c)) return false;
  }
  return true;
}

TaggedSentence::TaggedSentence(std::vector<std::string> tokens, TagSequence tags)
    : tokens_(std::move(tokens)), tags_(std::move(tags)) {
  if (tokens_.empty()) throw std::invalid_argument("sentence has no tokens");
  if (tokens_.size() != tags_.size()) {
    throw std::invalid_argument("sentence has " + std::to_string(tokens_.size()) + " tokens but " +
                                std::to_string(tags_.size()) + " tags");
  }
  for (const auto& t : tokens_) {
    if (!is_valid_surface(t)) throw std::invalid_argument("invalid token surface '" + t + "'");
  }
  if (!is_valid_iob(tags_)) throw IobError("sentence tag sequence is not IOB-valid");
}

LoadedCorpus parse_corpus(const std::string& text) {
  LoadedCorpus out;
  std::vector<std::string> tokens;
  TagSequence tags;

  auto flush = [&] {
    if (tokens.empty()) return;
    TagSequence fixed = repair_tags(tags);
    if (fixed != tags) ++out.repaired;
    out.sentences.emplace_back(std::move(tokens), std::move(fixed));
    tokens.clear();
    tags.clear();
  };

  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_fields(line);
    if (fields.empty()) {
      flush();
      continue;
    }
    if (fields.size() != 2) {
      throw ParseError(lineno, "expected 2 columns (surface, tag), found " +
                                   std::to_string(fields.size()));
    }
    auto tag = parse_tag(fields[1]);
    if (!tag) throw ParseError(lineno, "unknown tag '" + fields[1] + "'");
    tokens.push_back(std::move(fields[0]));
    tags.push_back(*tag);
  }
  flush();
  return out;
}

LoadedCorpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str());
}

std::string format_corpus(const std::vector<TaggedSentence>& sentences) {
  std::string out;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (s > 0) out += '\n';
    const auto& sent = sentences[s];
    for (std::size_t i = 0; i < sent.size(); ++i) {
      out += sent.tokens()[i];
      out += '\t';
      out += tag_char(sent.tags()[i]);
      out += '\n';
    }
  }
  return out;
}

void save_corpus(const std::vector<TaggedSentence>& sentences, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write corpus file " + path.string());
  out << format_corpus(sentences);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

CorpusStats corpus_stats(const std::vector<TaggedSentence>& sentences) {
  CorpusStats stats;
  stats.n_sentences = sentences.size();
  for (const auto& s : sentences) {
    stats.n_tokens += s.size();
    for (IobTag t : s.tags()) {
      ++stats.tag_counts[tag_index(t)];
      if (t == IobTag::B) ++stats.n_mwe_spans;
    }
  }
  return stats;
}

nlohmann::json to_json(const CorpusStats& stats) {
  nlohmann::json counts = nlohmann::json::object();
  for (IobTag t : kAllTags) counts[std::string(1, tag_char(t))] = stats.tag_counts[tag_index(t)];
  return {{"n_sentences", stats.n_sentences},
          {"n_tokens", stats.n_tokens},
          {"tag_counts", counts},
          {"n_mwe_spans", stats.n_mwe_spans}};
}

}  // namespace mwetag
