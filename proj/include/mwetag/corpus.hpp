#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwetag/iob.hpp"

namespace mwetag {

/// A whitespace-free, non-empty word paired with its IOB tag, one per token.
/// Construction validates every invariant; instances are immutable afterwards.
class TaggedSentence {
 public:
  /// Throws std::invalid_argument for empty sentences, length mismatch or bad
  /// surfaces, and IobError for an invalid tag sequence.
  TaggedSentence(std::vector<std::string> tokens, TagSequence tags);

  const std::vector<std::string>& tokens() const { return tokens_; }
  const TagSequence& tags() const { return tags_; }
  std::size_t size() const { return tokens_.size(); }

  bool operator==(const TaggedSentence&) const = default;

 private:
  std::vector<std::string> tokens_;
  TagSequence tags_;
};

/// True if `surface` is non-empty and holds no ASCII whitespace.
bool is_valid_surface(const std::string& surface);

struct LoadedCorpus {
  std::vector<TaggedSentence> sentences;
  /// Number of sentences whose tags needed repair_tags.
  std::size_t repaired = 0;
};

/// Reads the two-column `<surface>\t<tag>` format. Blank lines separate
/// sentences. Throws ParseError (with line number) on malformed lines and
/// std::runtime_error if the file cannot be opened.
LoadedCorpus load_corpus(const std::filesystem::path& path);
LoadedCorpus parse_corpus(const std::string& text);

void save_corpus(const std::vector<TaggedSentence>& sentences, const std::filesystem::path& path);
std::string format_corpus(const std::vector<TaggedSentence>& sentences);

struct CorpusStats {
  std::size_t n_sentences = 0;
  std::size_t n_tokens = 0;
  std::array<std::size_t, kNumTags> tag_counts{};
  std::size_t n_mwe_spans = 0;

  bool operator==(const CorpusStats&) const = default;
};

CorpusStats corpus_stats(const std::vector<TaggedSentence>& sentences);
nlohmann::json to_json(const CorpusStats& stats);

}  // namespace mwetag
