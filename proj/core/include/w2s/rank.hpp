#pragma once

#include <array>
#include <span>
#include <vector>

#include "w2s/annotate.hpp"

namespace w2s {

/// Probabilities over the five comparative tokens, indexed by ordinal-1.
struct TokenDistribution {
  std::array<double, 5> probs{0.2, 0.2, 0.2, 0.2, 0.2};

  double of(RankLabel label) const { return probs[static_cast<std::size_t>(ordinal(label) - 1)]; }
  void validate() const;  // simplex within 1e-9

  /// The same comparison seen from the other side: token k becomes 6-k.
  TokenDistribution mirrored() const;
};

/// Numerically stable softmax over the five token logits.
TokenDistribution token_probs(const std::array<double, 5>& logits);

/// Fixed comparative-level weights {0, 0.25, 0.5, 0.75, 1}.
inline constexpr std::array<double, 5> kSoftScoreWeights = {0.0, 0.25, 0.5, 0.75, 1.0};

/// Weighted token mass in [0,1] favoring the evaluated (second) video.
double soft_score(const TokenDistribution& dist);

/// Square pairwise-preference matrix: entry (i,j) is the probability that
/// item i is preferred over item j. Reciprocity P(i,j) = 1 - P(j,i) within
/// 1e-9 and an exact 0.5 diagonal are enforced.
class ProbabilityMatrix {
 public:
  explicit ProbabilityMatrix(std::size_t items);
  static ProbabilityMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t items() const { return items_; }
  double at(std::size_t i, std::size_t j) const { return entries_[i * items_ + j]; }

  /// Sets (i,j) and its reciprocal entry (j,i) = 1 - p.
  void set_pair(std::size_t i, std::size_t j, double p);

  void validate() const;

 private:
  std::size_t items_;
  std::vector<double> entries_;
};

/// Extends an n x n anchor block by a test item as the last row/column.
/// `comparisons[i]` is the probability that anchor i is preferred over the
/// test item; the last row receives the complements.
ProbabilityMatrix assemble_matrix(const ProbabilityMatrix& anchor_block,
                                  std::span<const double> comparisons);

/// Latent Thurstone Case V qualities, constrained to sum to zero.
struct LatentScores {
  std::vector<double> scores;
};

enum class ScorePrior {
  none,       // pure likelihood; exact recovery of generating scores
  quadratic,  // standard Gaussian MAP prior -sum(q^2)/2
};

struct MapOptions {
  double clamp = 1e-4;  // entries pulled into [clamp, 1-clamp] before the log
  ScorePrior prior = ScorePrior::none;
  double gradient_tolerance = 1e-8;
  int max_iterations = 10000;
};

/// The (clamped) MAP objective at `scores`; exposed for diagnostics.
double map_objective(const ProbabilityMatrix& m, std::span<const double> scores,
                     const MapOptions& options = {});

/// Maximum a posteriori scores under Thurstone Case V: maximizes
/// sum_{i != j} M_ij log Phi(q_i - q_j) (plus the optional prior) over the
/// sum-zero hyperplane by projected gradient ascent with backtracking.
/// Throws ConvergenceError with the last iterate on non-convergence.
LatentScores map_scores(const ProbabilityMatrix& m, const MapOptions& options = {});

/// Full calibration of one test video: soft-score each comparison (test
/// evaluated against each anchor), assemble the matrix, run map_scores and
/// return the test item's score. The soft scores favor the test video, so
/// the anchor-side probabilities entering the matrix are their complements.
double calibrate(std::span<const TokenDistribution> test_vs_anchors,
                 const ProbabilityMatrix& anchor_block, const MapOptions& options = {});

/// Standard normal CDF used by the Case V model.
double normal_cdf(double x);

}  // namespace w2s
