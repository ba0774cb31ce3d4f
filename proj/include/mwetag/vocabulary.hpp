#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mwetag/corpus.hpp"

namespace mwetag {

/// Dense word index. Ids 0 and 1 are reserved for padding and unknown words.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary() : Vocabulary(false, {}) {}
  /// `words` are the entries for ids 2, 3, ... in order. Throws on duplicates.
  Vocabulary(bool lowercase, std::vector<std::string> words);

  int id(std::string_view surface) const;
  std::vector<int> ids(const std::vector<std::string>& tokens) const;
  const std::string& word(int id) const { return words_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return words_.size(); }
  bool lowercase() const { return lowercase_; }

  /// Entries in id order, excluding the two reserved ids.
  std::vector<std::string> entries() const { return {words_.begin() + 2, words_.end()}; }

  std::string normalize(std::string_view surface) const;

 private:
  bool lowercase_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

/// ASCII case folding; multi-byte UTF-8 sequences pass through unchanged.
std::string fold_case(std::string_view s);

/// Counts (optionally case-folded) surfaces and keeps those with count >=
/// min_count, ordered by descending frequency then lexicographically.
Vocabulary build_vocabulary(const std::vector<TaggedSentence>& sentences, bool lowercase,
                            std::size_t min_count);

}  // namespace mwetag
