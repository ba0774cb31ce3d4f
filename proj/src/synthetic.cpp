#include "mwetag/synthetic.hpp"

#include <array>
#include <sstream>
#include <string>
#include <string_view>

#include "mwetag/rng.hpp"

namespace mwetag {
namespace {

constexpr std::array<std::string_view, 40> kGenera = {
    "Leontopodium", "Acer",      "Rosa",       "Quercus",    "Lavandula",  "Digitalis",
    "Helleborus",   "Magnolia",  "Clematis",   "Primula",    "Salvia",     "Papaver",
    "Campanula",    "Allium",    "Geranium",   "Hydrangea",  "Camellia",   "Rhododendron",
    "Viburnum",     "Cornus",    "Betula",     "Prunus",     "Malus",      "Fagus",
    "Tilia",        "Crocus",    "Narcissus",  "Tulipa",     "Lilium",     "Dianthus",
    "Aquilegia",    "Eryngium",  "Verbascum",  "Echinacea",  "Rudbeckia",  "Sedum",
    "Euphorbia",    "Hosta",     "Astrantia",  "Paeonia"};

constexpr std::array<std::string_view, 36> kEpithets = {
    "alpinum",    "palmatum",  "canina",     "robur",       "angustifolia", "purpurea",
    "niger",      "grandiflora", "montana",  "vulgaris",    "officinalis",  "orientale",
    "lactiflora", "persicifolia", "giganteum", "macrophylla", "japonica",    "ponticum",
    "opulus",     "kousa",     "pendula",    "avium",       "sylvestris",   "cordata",
    "poeticus",   "regale",    "barbatus",   "thapsus",     "fulgida",      "spectabile",
    "characias",  "sieboldii", "major",      "alba",        "rubra",        "elegans"};

constexpr std::array<std::string_view, 12> kColours = {
    "Pink", "White", "Red", "Blue", "Golden", "Purple",
    "Yellow", "Scarlet", "Silver", "Crimson", "Ivory", "Violet"};

constexpr std::array<std::string_view, 16> kCultivars = {
    "Shirley", "Moonlight", "Queen",  "Princess", "Dawn",    "Star",   "Glory",  "Beauty",
    "Charm",   "Lady",      "Emperor", "Sunset",  "Velvet",  "Cascade", "Jewel", "Spire"};

constexpr std::array<std::string_view, 12> kHeads = {
    "Alliance", "Rose", "Lily", "Bell", "Poppy", "Daisy",
    "Tulip",    "Pearl", "Flame", "Orchid", "Violet", "Aster"};

constexpr std::array<std::string_view, 8> kSizes = {
    "Great", "Dwarf", "Giant", "Lesser", "Common", "Early", "Tall", "Creeping"};

constexpr std::array<std::string_view, 8> kHabitats = {
    "Water", "Mountain", "Meadow", "Marsh", "Rock", "Wood", "Desert", "Alpine"};

// Lowercase words reused in filler so colour and habitat terms also occur as O.
constexpr std::array<std::string_view, 14> kAdjectives = {
    "glossy", "narrow", "pink", "white", "silver", "downy", "red",
    "broad",  "toothed", "golden", "blue", "rounded", "purple", "evergreen"};

// `#` marks a name slot and `@` an adjective slot.
constexpr std::array<std::string_view, 22> kTemplates = {
    "# grows best in full sun .",
    "Plant # in moist , well-drained soil .",
    "The flowers of # appear in early summer .",
    "# is a hardy perennial with @ leaves .",
    "Cut back # after flowering .",
    "# and # make good companions in a border .",
    "This cultivar is often confused with # .",
    "Water regularly during dry spells .",
    "Leaves are @ and @ , often with a @ tinge .",
    "Propagate by seed in autumn or by division in spring .",
    "Sow # under glass in early spring .",
    "# , also known as # , tolerates light shade .",
    "In the rock garden # forms @ mats .",
    "Few plants rival # for autumn colour .",
    "Flowers are @ , borne on @ stems in late spring .",
    "Grow # in a sheltered position away from cold winds .",
    "The @ foliage of # contrasts well with # .",
    "Mulch annually with well-rotted manure .",
    "# was introduced to gardens in the nineteenth century .",
    "Deadhead # regularly to prolong flowering .",
    "# bears @ flowers above @ leaves .",
    "Protect young shoots from slugs ."};

template <std::size_t N>
std::string_view pick(Rng& rng, const std::array<std::string_view, N>& options) {
  return options[rng.below(N)];
}

std::vector<std::string> make_name(Rng& rng) {
  switch (rng.below(6)) {
    case 0:
    case 1:  // Latin binomial
      return {std::string(pick(rng, kGenera)), std::string(pick(rng, kEpithets))};
    case 2:  // short cultivar, e.g. "White Moonlight"
      return {std::string(pick(rng, kColours)), std::string(pick(rng, kCultivars))};
    case 3:  // cultivar phrase, e.g. "Pink Shirley Alliance"
      return {std::string(pick(rng, kColours)), std::string(pick(rng, kCultivars)),
              std::string(pick(rng, kHeads))};
    case 4:  // binomial with cultivar
      return {std::string(pick(rng, kGenera)), std::string(pick(rng, kEpithets)),
              std::string(pick(rng, kColours)), std::string(pick(rng, kCultivars))};
    default:  // descriptive common name
      return {std::string(pick(rng, kSizes)), std::string(pick(rng, kColours)),
              std::string(pick(rng, kHabitats)), std::string(pick(rng, kHeads))};
  }
}

TaggedSentence make_sentence(Rng& rng) {
  const std::string_view tmpl = pick(rng, kTemplates);
  std::vector<std::string> tokens;
  std::vector<Span> spans;
  std::istringstream words{std::string(tmpl)};
  std::string w;
  while (words >> w) {
    if (w == "#") {
      auto name = make_name(rng);
      spans.push_back({tokens.size(), tokens.size() + name.size()});
      for (auto& n : name) tokens.push_back(std::move(n));
    } else if (w == "@") {
      tokens.emplace_back(pick(rng, kAdjectives));
    } else {
      tokens.push_back(w);
    }
  }
  TagSequence tags = encode_iob(tokens.size(), spans);
  return TaggedSentence(std::move(tokens), std::move(tags));
}

}  // namespace

std::vector<TaggedSentence> generate_synthetic_corpus(std::uint64_t seed, std::size_t n_sentences) {
  Rng rng(seed);
  std::vector<TaggedSentence> out;
  out.reserve(n_sentences);
  for (std::size_t i = 0; i < n_sentences; ++i) out.push_back(make_sentence(rng));
  return out;
}

}  // namespace mwetag
