#include "mwetag/metrics.hpp"

#include <stdexcept>
#include <string>

namespace mwetag {
namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

void require_aligned(const std::vector<TagSequence>& gold, const std::vector<TagSequence>& pred) {
  if (gold.size() != pred.size()) {
    throw std::invalid_argument("alignment: " + std::to_string(gold.size()) + " gold sentences vs " +
                                std::to_string(pred.size()) + " predicted");
  }
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i].size() != pred[i].size()) {
      throw std::invalid_argument("alignment: sentence " + std::to_string(i) + " has " +
                                  std::to_string(gold[i].size()) + " gold tags but " +
                                  std::to_string(pred[i].size()) + " predicted");
    }
  }
}

}  // namespace

ConfusionMatrix confusion(const std::vector<TagSequence>& gold, const std::vector<TagSequence>& pred) {
  require_aligned(gold, pred);
  ConfusionMatrix cm = ConfusionMatrix::Zero();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t t = 0; t < gold[i].size(); ++t) ++cm(tag_index(gold[i][t]), tag_index(pred[i][t]));
  }
  return cm;
}

MacroF1 macro_f1(const ConfusionMatrix& cm, bool include_outside) {
  MacroF1 out;
  double total = 0.0;
  for (int c = 0; c < kNumTags; ++c) {
    ClassScores& s = out.per_class[c];
    s.precision = ratio(cm(c, c), cm.col(c).sum());
    s.recall = ratio(cm(c, c), cm.row(c).sum());
    s.f1 = harmonic(s.precision, s.recall);
    if (include_outside || c != tag_index(IobTag::O)) total += s.f1;
  }
  out.macro = total / (include_outside ? 3.0 : 2.0);
  return out;
}

SpanScores span_f1(const std::vector<TagSequence>& gold, const std::vector<TagSequence>& pred) {
  require_aligned(gold, pred);
  SpanScores out;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = decode_iob(gold[i]);
    const auto p = decode_iob(repair_tags(pred[i]));
    out.gold += static_cast<std::int64_t>(g.size());
    out.predicted += static_cast<std::int64_t>(p.size());
    // Both lists are sorted and disjoint; merge-walk for exact matches.
    std::size_t a = 0;
    std::size_t b = 0;
    while (a < g.size() && b < p.size()) {
      if (g[a] == p[b]) {
        ++out.true_positives;
        ++a;
        ++b;
      } else if (g[a] < p[b]) {
        ++a;
      } else {
        ++b;
      }
    }
  }
  out.precision = ratio(out.true_positives, out.predicted);
  out.recall = ratio(out.true_positives, out.gold);
  out.f1 = harmonic(out.precision, out.recall);
  return out;
}

EvalReport make_report(const std::vector<TagSequence>& gold, const std::vector<TagSequence>& pred,
                       bool include_outside) {
  EvalReport r;
  r.confusion = confusion(gold, pred);
  const MacroF1 m = macro_f1(r.confusion, include_outside);
  r.per_class = m.per_class;
  r.macro_f1 = m.macro;
  const SpanScores s = span_f1(gold, pred);
  r.span_precision = s.precision;
  r.span_recall = s.recall;
  r.span_f1 = s.f1;
  r.n_sentences = gold.size();
  r.n_tokens = static_cast<std::size_t>(r.confusion.sum());
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json cm = nlohmann::json::array();
  for (int g = 0; g < kNumTags; ++g) {
    nlohmann::json row = nlohmann::json::array();
    for (int p = 0; p < kNumTags; ++p) row.push_back(r.confusion(g, p));
    cm.push_back(row);
  }
  nlohmann::json per_class = nlohmann::json::object();
  for (IobTag t : kAllTags) {
    const ClassScores& s = r.per_class[tag_index(t)];
    per_class[std::string(1, tag_char(t))] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
  }
  return {{"confusion", cm},
          {"per_class", per_class},
          {"macro_f1", r.macro_f1},
          {"span_precision", r.span_precision},
          {"span_recall", r.span_recall},
          {"span_f1", r.span_f1},
          {"n_sentences", r.n_sentences},
          {"n_tokens", r.n_tokens}};
}

}  // namespace mwetag
