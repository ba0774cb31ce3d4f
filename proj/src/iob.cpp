#include "mwetag/iob.hpp"

#include <string>

#include "mwetag/errors.hpp"

namespace mwetag {

IobTag tag_from_index(int index) {
  if (index < 0 || index >= kNumTags) {
    throw IobError("tag index out of range: " + std::to_string(index));
  }
  return static_cast<IobTag>(index);
}

char tag_char(IobTag t) {
  switch (t) {
    case IobTag::B:
      return 'B';
    case IobTag::I:
      return 'I';
    case IobTag::O:
      return 'O';
  }
  return '?';
}

std::optional<IobTag> parse_tag(std::string_view text) {
  if (text == "B") return IobTag::B;
  if (text == "I") return IobTag::I;
  if (text == "O") return IobTag::O;
  return std::nullopt;
}

bool is_valid_iob(std::span<const IobTag> tags) {
  IobTag prev = IobTag::O;
  for (IobTag t : tags) {
    if (t == IobTag::I && prev == IobTag::O) return false;
    prev = t;
  }
  return true;
}

TagSequence encode_iob(std::size_t n_tokens, std::span<const Span> spans) {
  TagSequence tags(n_tokens, IobTag::O);
  std::size_t floor = 0;
  for (const Span& s : spans) {
    if (s.start >= s.end || s.end > n_tokens) {
      throw IobError("span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                     ") is empty or out of bounds for " + std::to_string(n_tokens) + " tokens");
    }
    if (s.start < floor) {
      throw IobError("spans overlap or are unsorted at start " + std::to_string(s.start));
    }
    tags[s.start] = IobTag::B;
    for (std::size_t i = s.start + 1; i < s.end; ++i) tags[i] = IobTag::I;
    floor = s.end;
  }
  return tags;
}

std::vector<Span> decode_iob(std::span<const IobTag> tags) {
  std::vector<Span> spans;
  IobTag prev = IobTag::O;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    switch (tags[i]) {
      case IobTag::B:
        spans.push_back({i, i + 1});
        break;
      case IobTag::I:
        if (prev == IobTag::O) {
          throw IobError("I tag at position " + std::to_string(i) +
                         (i == 0 ? " starts the sequence" : " follows O"));
        }
        spans.back().end = i + 1;
        break;
      case IobTag::O:
        break;
    }
    prev = tags[i];
  }
  return spans;
}

TagSequence repair_tags(std::span<const IobTag> tags) {
  TagSequence out(tags.begin(), tags.end());
  IobTag prev = IobTag::O;
  for (IobTag& t : out) {
    if (t == IobTag::I && prev == IobTag::O) t = IobTag::B;
    prev = t;
  }
  return out;
}

std::vector<int> to_indices(std::span<const IobTag> tags) {
  std::vector<int> out;
  out.reserve(tags.size());
  for (IobTag t : tags) out.push_back(tag_index(t));
  return out;
}

TagSequence from_indices(std::span<const int> indices) {
  TagSequence out;
  out.reserve(indices.size());
  for (int i : indices) out.push_back(tag_from_index(i));
  return out;
}

}  // namespace mwetag
