#include "mwetag/crf.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "mwetag/errors.hpp"

namespace mwetag {
namespace {

constexpr std::size_t kMaxEnumeration = 100000;

// 1 where a score is learned, 0 where it is pinned.
struct Masks {
  Matrix keep_transitions;
  Matrix pinned_transitions;
  Matrix keep_start;
  Matrix pinned_start;
};

Masks structural_masks(int K) {
  if (K != kNumTags) throw std::invalid_argument("structural CRF masking needs exactly 3 tags");
  Masks m{Matrix::Ones(K, K), Matrix::Zero(K, K), Matrix::Ones(1, K), Matrix::Zero(1, K)};
  const int o = tag_index(IobTag::O);
  const int i = tag_index(IobTag::I);
  m.keep_transitions(o, i) = 0.0;
  m.pinned_transitions(o, i) = kForbiddenScore;
  m.keep_start(0, i) = 0.0;
  m.pinned_start(0, i) = kForbiddenScore;
  return m;
}

Tensor pinned(const Tensor& t, const Matrix& keep, const Matrix& value) {
  return add(mul(t, Tensor::constant(keep)), Tensor::constant(value));
}

struct EffectiveTensors {
  Tensor transitions;
  Tensor start;
  Tensor stop;
};

EffectiveTensors effective_tensors(const CrfParams& p) {
  if (!p.structural_mask) return {p.transitions, p.start, p.stop};
  const Masks m = structural_masks(p.num_tags());
  return {pinned(p.transitions, m.keep_transitions, m.pinned_transitions),
          pinned(p.start, m.keep_start, m.pinned_start), p.stop};
}

void require_emissions(const Matrix& em, const CrfParams& p) {
  if (em.rows() < 1) throw ShapeError("CRF: emissions need at least one row");
  if (em.cols() != p.num_tags()) {
    throw ShapeError("CRF: emissions have " + std::to_string(em.cols()) + " columns for " +
                     std::to_string(p.num_tags()) + " tags");
  }
}

std::size_t count_paths(Eigen::Index T, Eigen::Index K) {
  std::size_t n = 1;
  for (Eigen::Index t = 0; t < T; ++t) {
    n *= static_cast<std::size_t>(K);
    if (n > kMaxEnumeration) {
      throw std::length_error("brute-force CRF enumeration limited to " + std::to_string(kMaxEnumeration) +
                              " paths");
    }
  }
  return n;
}

// Visits every path with position 0 as the fastest-changing digit, so the
// first path seen among equals is the smallest compared from the end.
template <class Visit>
void for_each_path(Eigen::Index T, Eigen::Index K, Visit&& visit) {
  const std::size_t n = count_paths(T, K);
  std::vector<int> tags(static_cast<std::size_t>(T), 0);
  for (std::size_t p = 0; p < n; ++p) {
    visit(std::as_const(tags));
    for (auto& t : tags) {
      if (++t < K) break;
      t = 0;
    }
  }
}

// Independent direct summation, kept separate from path_score on purpose.
double enumerate_score(const Matrix& em, const CrfWeights& w, const std::vector<int>& y) {
  double s = w.start(0, y[0]) + em(0, y[0]);
  for (std::size_t i = 1; i < y.size(); ++i) s += w.transitions(y[i - 1], y[i]) + em(static_cast<Eigen::Index>(i), y[i]);
  return s + w.stop(0, y.back());
}

}  // namespace

CrfParams CrfParams::zeros(int num_tags, bool structural_mask) {
  return {Tensor::parameter(Matrix::Zero(num_tags, num_tags)), Tensor::parameter(Matrix::Zero(1, num_tags)),
          Tensor::parameter(Matrix::Zero(1, num_tags)), structural_mask};
}

CrfParams CrfParams::uniform(int num_tags, Rng& rng, double range, bool structural_mask) {
  auto draw = [&](Eigen::Index r, Eigen::Index c) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-range, range);
    return Tensor::parameter(std::move(m));
  };
  Tensor trans = draw(num_tags, num_tags);
  Tensor start = draw(1, num_tags);
  Tensor stop = draw(1, num_tags);
  return {trans, start, stop, structural_mask};
}

CrfWeights effective_weights(const CrfParams& params) {
  CrfWeights w{params.transitions.value(), params.start.value(), params.stop.value()};
  if (params.structural_mask) {
    const Masks m = structural_masks(params.num_tags());
    w.transitions = w.transitions.cwiseProduct(m.keep_transitions) + m.pinned_transitions;
    w.start = w.start.cwiseProduct(m.keep_start) + m.pinned_start;
  }
  return w;
}

ScoredPath<double> viterbi(const Matrix& emissions, const CrfParams& params) {
  require_emissions(emissions, params);
  const CrfWeights w = effective_weights(params);
  return viterbi(emissions, w.transitions, w.start, w.stop);
}

Tensor score_sequence(const Tensor& emissions, std::span<const int> tags, const CrfParams& params) {
  require_emissions(emissions.value(), params);
  if (static_cast<Eigen::Index>(tags.size()) != emissions.rows()) {
    throw ShapeError("score_sequence: " + std::to_string(tags.size()) + " tags for " +
                     std::to_string(emissions.rows()) + " positions");
  }
  const EffectiveTensors w = effective_tensors(params);
  std::vector<int> positions(tags.size());
  for (std::size_t i = 0; i < tags.size(); ++i) positions[i] = static_cast<int>(i);
  const int first[] = {tags.front()};
  const int last[] = {tags.back()};
  const int zero[] = {0};
  Tensor s = add(pick(w.start, zero, first), sum(pick(emissions, positions, tags)));
  if (tags.size() > 1) {
    s = add(s, sum(pick(w.transitions, tags.first(tags.size() - 1), tags.subspan(1))));
  }
  return add(s, pick(w.stop, zero, last));
}

Tensor log_partition(const Tensor& emissions, const CrfParams& params) {
  require_emissions(emissions.value(), params);
  const EffectiveTensors w = effective_tensors(params);
  const Eigen::Index T = emissions.rows();
  const Eigen::Index K = emissions.cols();
  // alpha is a 1×K row of log forward scores.
  Tensor alpha = add(w.start, row(emissions, 0));
  for (Eigen::Index t = 1; t < T; ++t) {
    Tensor from = broadcast_cols(transpose(alpha), K);  // from[i][j] = alpha[i]
    alpha = add(logsumexp(add(from, w.transitions), 0), row(emissions, t));
  }
  return logsumexp(add(alpha, w.stop), 1);
}

Tensor nll_loss(const Tensor& emissions, std::span<const int> gold, const CrfParams& params) {
  return sub(log_partition(emissions, params), score_sequence(emissions, gold, params));
}

Tensor nll_loss(const Tensor& emissions, std::span<const IobTag> gold, const CrfParams& params) {
  const std::vector<int> idx = to_indices(gold);
  return nll_loss(emissions, idx, params);
}

double brute_force_log_partition(const Matrix& emissions, const CrfParams& params) {
  require_emissions(emissions, params);
  const CrfWeights w = effective_weights(params);
  std::vector<double> scores;
  for_each_path(emissions.rows(), emissions.cols(),
                [&](const std::vector<int>& y) { scores.push_back(enumerate_score(emissions, w, y)); });
  double m = -std::numeric_limits<double>::infinity();
  for (double s : scores) m = std::max(m, s);
  double total = 0.0;
  for (double s : scores) total += std::exp(s - m);
  return m + std::log(total);
}

ScoredPath<double> brute_force_best_path(const Matrix& emissions, const CrfParams& params) {
  require_emissions(emissions, params);
  const CrfWeights w = effective_weights(params);
  ScoredPath<double> best;
  best.score = -std::numeric_limits<double>::infinity();
  for_each_path(emissions.rows(), emissions.cols(), [&](const std::vector<int>& y) {
    const double s = enumerate_score(emissions, w, y);
    if (s > best.score) {
      best.score = s;
      best.tags = y;
    }
  });
  return best;
}

Matrix brute_force_marginals(const Matrix& emissions, const CrfParams& params) {
  const double log_z = brute_force_log_partition(emissions, params);
  const CrfWeights w = effective_weights(params);
  Matrix marginals = Matrix::Zero(emissions.rows(), emissions.cols());
  for_each_path(emissions.rows(), emissions.cols(), [&](const std::vector<int>& y) {
    const double p = std::exp(enumerate_score(emissions, w, y) - log_z);
    for (std::size_t t = 0; t < y.size(); ++t) marginals(static_cast<Eigen::Index>(t), y[t]) += p;
  });
  return marginals;
}

}  // namespace mwetag
