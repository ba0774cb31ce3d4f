#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mwetag/corpus.hpp"

namespace mwetag {

/// Deterministic plant-name corpus. Each sentence comes from a small template
/// grammar with zero to two embedded names (Latin binomials, cultivar phrases,
/// and longer trade names) whose gold tags are produced with encode_iob.
/// Name lengths 2, 3 and 4 all occur.
std::vector<TaggedSentence> generate_synthetic_corpus(std::uint64_t seed, std::size_t n_sentences);

}  // namespace mwetag
