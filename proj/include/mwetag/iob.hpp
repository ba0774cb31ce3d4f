#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mwetag {

/// Single-category IOB tag. The underlying value doubles as the class index
/// used by every model and metric (B=0, I=1, O=2).
enum class IobTag : std::uint8_t { B = 0, I = 1, O = 2 };

inline constexpr int kNumTags = 3;
inline constexpr std::array<IobTag, kNumTags> kAllTags = {IobTag::B, IobTag::I, IobTag::O};

using TagSequence = std::vector<IobTag>;

constexpr int tag_index(IobTag t) { return static_cast<int>(t); }
IobTag tag_from_index(int index);

char tag_char(IobTag t);
std::optional<IobTag> parse_tag(std::string_view text);

/// Half-open token range [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  auto operator<=>(const Span&) const = default;
};

/// True when no I appears at position 0 or directly after an O.
bool is_valid_iob(std::span<const IobTag> tags);

/// Tags for a sentence of `n_tokens` tokens. Spans must be sorted, disjoint and
/// in bounds; otherwise throws IobError.
TagSequence encode_iob(std::size_t n_tokens, std::span<const Span> spans);

/// One span per B, extended through the following run of I. Throws IobError
/// on an invalid sequence.
std::vector<Span> decode_iob(std::span<const IobTag> tags);

/// Rewrites every I that starts the sequence or follows an O to B.
TagSequence repair_tags(std::span<const IobTag> tags);

std::vector<int> to_indices(std::span<const IobTag> tags);
TagSequence from_indices(std::span<const int> indices);

}  // namespace mwetag
