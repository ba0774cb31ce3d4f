#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "mwetag/iob.hpp"
#include "mwetag/ops.hpp"
#include "mwetag/rng.hpp"
#include "mwetag/tensor.hpp"

namespace mwetag {

/// Score pinned onto structurally impossible IOB moves when masking is on.
inline constexpr double kForbiddenScore = -10000.0;

/// Linear-chain CRF weights over K tags. `transitions(i, j)` scores moving
/// from tag i to tag j; `start` and `stop` are 1×K rows.
struct CrfParams {
  Tensor transitions;
  Tensor start;
  Tensor stop;
  /// Pins O→I and start→I to kForbiddenScore (requires K == 3).
  bool structural_mask = false;

  int num_tags() const { return static_cast<int>(start.cols()); }
  std::vector<Tensor> parameters() const { return {transitions, start, stop}; }

  static CrfParams zeros(int num_tags, bool structural_mask = false);
  /// Entries uniform in [-range, range].
  static CrfParams uniform(int num_tags, Rng& rng, double range, bool structural_mask = false);
};

/// Plain-value view of CrfParams with any structural mask applied.
struct CrfWeights {
  Matrix transitions;
  Matrix start;
  Matrix stop;
};
CrfWeights effective_weights(const CrfParams& params);

template <class Scalar>
struct ScoredPath {
  std::vector<int> tags;
  Scalar score{};
};

/// start[y₀] + em[0,y₀] + Σᵢ (trans[yᵢ₋₁,yᵢ] + em[i,yᵢ]) + stop[y_T−1].
template <class Em, class Tr, class St, class Sp>
typename Em::Scalar path_score(const Eigen::MatrixBase<Em>& em, const Eigen::MatrixBase<Tr>& transitions,
                               const Eigen::MatrixBase<St>& start, const Eigen::MatrixBase<Sp>& stop,
                               std::span<const int> tags) {
  using Scalar = typename Em::Scalar;
  Scalar s = start(0, tags[0]) + em(0, tags[0]);
  for (std::size_t i = 1; i < tags.size(); ++i) {
    s += transitions(tags[i - 1], tags[i]) + em(static_cast<Eigen::Index>(i), tags[i]);
  }
  return s + stop(0, tags.back());
}

/// Max-scoring path in O(T·K²). Ties resolve to the lowest tag index at the
/// final position and at every backtrack step. The returned score is
/// path_score of the returned path.
template <class Em, class Tr, class St, class Sp>
ScoredPath<typename Em::Scalar> viterbi(const Eigen::MatrixBase<Em>& em, const Eigen::MatrixBase<Tr>& transitions,
                                        const Eigen::MatrixBase<St>& start, const Eigen::MatrixBase<Sp>& stop) {
  using Scalar = typename Em::Scalar;
  const Eigen::Index T = em.rows();
  const Eigen::Index K = em.cols();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> delta(T, K);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> back(T, K);
  delta.row(0) = start.row(0) + em.row(0);
  for (Eigen::Index t = 1; t < T; ++t) {
    for (Eigen::Index j = 0; j < K; ++j) {
      int best = 0;
      Scalar best_score = delta(t - 1, 0) + transitions(0, j);
      for (Eigen::Index i = 1; i < K; ++i) {
        const Scalar s = delta(t - 1, i) + transitions(i, j);
        if (s > best_score) {
          best_score = s;
          best = static_cast<int>(i);
        }
      }
      delta(t, j) = best_score + em(t, j);
      back(t, j) = best;
    }
  }
  int last = 0;
  Scalar last_score = delta(T - 1, 0) + stop(0, 0);
  for (Eigen::Index j = 1; j < K; ++j) {
    const Scalar s = delta(T - 1, j) + stop(0, j);
    if (s > last_score) {
      last_score = s;
      last = static_cast<int>(j);
    }
  }
  ScoredPath<Scalar> out;
  out.tags.resize(static_cast<std::size_t>(T));
  out.tags.back() = last;
  for (Eigen::Index t = T - 1; t > 0; --t) {
    out.tags[static_cast<std::size_t>(t - 1)] = back(t, out.tags[static_cast<std::size_t>(t)]);
  }
  out.score = path_score(em, transitions, start, stop, out.tags);
  return out;
}

ScoredPath<double> viterbi(const Matrix& emissions, const CrfParams& params);

/// Differentiable score of one tag path.
Tensor score_sequence(const Tensor& emissions, std::span<const int> tags, const CrfParams& params);

/// log Σ_paths exp(score) via the log-space forward recursion, expressed in
/// differentiable ops.
Tensor log_partition(const Tensor& emissions, const CrfParams& params);

/// log_partition − score_sequence(gold).
Tensor nll_loss(const Tensor& emissions, std::span<const int> gold, const CrfParams& params);
Tensor nll_loss(const Tensor& emissions, std::span<const IobTag> gold, const CrfParams& params);

/// Exhaustive-enumeration oracles for small instances. Both throw
/// std::length_error when K^T exceeds 100000.
double brute_force_log_partition(const Matrix& emissions, const CrfParams& params);
/// Same tie rule as viterbi: among equal scores the path that is smallest when
/// compared from the last position backwards wins.
ScoredPath<double> brute_force_best_path(const Matrix& emissions, const CrfParams& params);
/// Per-position tag marginals P(yₜ = k), T×K.
Matrix brute_force_marginals(const Matrix& emissions, const CrfParams& params);

}  // namespace mwetag
