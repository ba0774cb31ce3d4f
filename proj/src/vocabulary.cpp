#include "mwetag/vocabulary.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace mwetag {

std::string fold_case(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

Vocabulary::Vocabulary(bool lowercase, std::vector<std::string> words) : lowercase_(lowercase) {
  words_.reserve(words.size() + 2);
  words_.emplace_back("<pad>");
  words_.emplace_back("<unk>");
  for (auto& w : words) {
    const int id = static_cast<int>(words_.size());
    if (!index_.emplace(w, id).second) throw std::invalid_argument("duplicate vocabulary entry '" + w + "'");
    words_.push_back(std::move(w));
  }
}

std::string Vocabulary::normalize(std::string_view surface) const {
  return lowercase_ ? fold_case(surface) : std::string(surface);
}

int Vocabulary::id(std::string_view surface) const {
  auto it = index_.find(normalize(surface));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::ids(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

Vocabulary build_vocabulary(const std::vector<TaggedSentence>& sentences, bool lowercase,
                            std::size_t min_count) {
  if (min_count < 1) throw std::invalid_argument("min_count must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& s : sentences) {
    for (const auto& t : s.tokens()) ++counts[lowercase ? fold_case(t) : t];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [w, c] : counts) {
    if (c >= min_count) kept.emplace_back(w, c);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [w, c] : kept) words.push_back(w);
  return Vocabulary(lowercase, std::move(words));
}

}  // namespace mwetag
