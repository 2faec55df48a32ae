#include "w2s/rank.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace w2s {

namespace {

constexpr double kReciprocityTol = 1e-9;

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

void TokenDistribution::validate() const {
  double sum = 0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("token probability outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw DomainError("token probabilities sum to " + std::to_string(sum));
  }
}

TokenDistribution TokenDistribution::mirrored() const {
  TokenDistribution out;
  for (std::size_t k = 0; k < 5; ++k) out.probs[k] = probs[4 - k];
  return out;
}

TokenDistribution token_probs(const std::array<double, 5>& logits) {
  double max_logit = logits[0];
  for (double l : logits) {
    if (!std::isfinite(l)) throw DomainError("non-finite logit");
    max_logit = std::max(max_logit, l);
  }
  TokenDistribution out;
  double sum = 0;
  for (std::size_t k = 0; k < 5; ++k) {
    out.probs[k] = std::exp(logits[k] - max_logit);
    sum += out.probs[k];
  }
  for (double& p : out.probs) p /= sum;
  return out;
}

double soft_score(const TokenDistribution& dist) {
  dist.validate();
  double score = 0;
  for (std::size_t k = 0; k < 5; ++k) score += kSoftScoreWeights[k] * dist.probs[k];
  return score;
}

ProbabilityMatrix::ProbabilityMatrix(std::size_t items)
    : items_(items), entries_(items * items, 0.5) {
  if (items < 2) throw DomainError("probability matrix needs at least 2 items");
}

ProbabilityMatrix ProbabilityMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  ProbabilityMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.size()) {
      throw DomainError("probability matrix rows must be square");
    }
    for (std::size_t j = 0; j < rows.size(); ++j) {
      m.entries_[i * m.items_ + j] = rows[i][j];
    }
  }
  m.validate();
  return m;
}

void ProbabilityMatrix::set_pair(std::size_t i, std::size_t j, double p) {
  if (i == j) throw DomainError("cannot set a diagonal preference entry");
  if (!(p >= 0.0 && p <= 1.0)) {
    throw DomainError("preference probability " + std::to_string(p) + " outside [0,1]");
  }
  entries_[i * items_ + j] = p;
  entries_[j * items_ + i] = 1.0 - p;
}

void ProbabilityMatrix::validate() const {
  for (std::size_t i = 0; i < items_; ++i) {
    if (at(i, i) != 0.5) {
      throw DomainError("diagonal entry (" + std::to_string(i) + "," + std::to_string(i) +
                        ") must be exactly 0.5");
    }
    for (std::size_t j = i + 1; j < items_; ++j) {
      const double a = at(i, j);
      const double b = at(j, i);
      if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0)) {
        throw DomainError("preference entry outside [0,1] at (" + std::to_string(i) + "," +
                          std::to_string(j) + ")");
      }
      if (std::abs(a + b - 1.0) > kReciprocityTol) {
        throw DomainError("reciprocity violated at (" + std::to_string(i) + "," +
                          std::to_string(j) + "): " + std::to_string(a) + " + " +
                          std::to_string(b) + " != 1");
      }
    }
  }
}

ProbabilityMatrix assemble_matrix(const ProbabilityMatrix& anchor_block,
                                  std::span<const double> comparisons) {
  anchor_block.validate();
  if (comparisons.size() != anchor_block.items()) {
    throw DomainError("comparison vector length " + std::to_string(comparisons.size()) +
                      " does not match anchor count " + std::to_string(anchor_block.items()));
  }
  const std::size_t n = anchor_block.items();
  ProbabilityMatrix m(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      m.set_pair(i, j, anchor_block.at(i, j));
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!(comparisons[i] >= 0.0 && comparisons[i] <= 1.0)) {
      throw DomainError("comparison probability " + std::to_string(comparisons[i]) +
                        " outside [0,1] at anchor " + std::to_string(i));
    }
    m.set_pair(i, n, comparisons[i]);
  }
  m.validate();
  return m;
}

namespace {

struct ClampedMatrix {
  std::size_t n;
  std::vector<double> m;  // entries clamped into [eps, 1-eps], diagonal untouched

  ClampedMatrix(const ProbabilityMatrix& src, double eps) : n(src.items()), m(n * n) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        m[i * n + j] = std::clamp(src.at(i, j), eps, 1.0 - eps);
      }
    }
  }
  double at(std::size_t i, std::size_t j) const { return m[i * n + j]; }
};

double objective(const ClampedMatrix& cm, std::span<const double> q, ScorePrior prior) {
  double f = 0;
  for (std::size_t i = 0; i < cm.n; ++i) {
    for (std::size_t j = 0; j < cm.n; ++j) {
      if (i == j) continue;
      f += cm.at(i, j) * std::log(normal_cdf(q[i] - q[j]));
    }
  }
  if (prior == ScorePrior::quadratic) {
    for (double v : q) f -= 0.5 * v * v;
  }
  return f;
}

// d/dx log Phi(x) = phi(x) / Phi(x)
double log_cdf_slope(double x) { return normal_pdf(x) / normal_cdf(x); }

std::vector<double> gradient(const ClampedMatrix& cm, std::span<const double> q,
                             ScorePrior prior) {
  std::vector<double> g(cm.n, 0.0);
  for (std::size_t i = 0; i < cm.n; ++i) {
    for (std::size_t j = 0; j < cm.n; ++j) {
      if (i == j) continue;
      const double slope = log_cdf_slope(q[i] - q[j]);
      g[i] += cm.at(i, j) * slope;
      g[j] -= cm.at(i, j) * slope;
    }
  }
  if (prior == ScorePrior::quadratic) {
    for (std::size_t i = 0; i < cm.n; ++i) g[i] -= q[i];
  }
  return g;
}

void project_to_sum_zero(std::vector<double>& v) {
  double mean = 0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

double norm2(std::span<const double> v) {
  double acc = 0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

double map_objective(const ProbabilityMatrix& m, std::span<const double> scores,
                     const MapOptions& options) {
  if (scores.size() != m.items()) throw DomainError("score length does not match matrix");
  return objective(ClampedMatrix(m, options.clamp), scores, options.prior);
}

LatentScores map_scores(const ProbabilityMatrix& m, const MapOptions& options) {
  m.validate();
  if (!(options.clamp > 0.0 && options.clamp < 0.5)) {
    throw DomainError("clamp must lie in (0, 0.5)");
  }
  const ClampedMatrix cm(m, options.clamp);
  const std::size_t n = cm.n;

  std::vector<double> q(n, 0.0);
  double f = objective(cm, q, options.prior);

  double grad_norm = 0;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    std::vector<double> g = gradient(cm, q, options.prior);
    project_to_sum_zero(g);
    grad_norm = norm2(g);
    if (grad_norm < options.gradient_tolerance) {
      project_to_sum_zero(q);
      return LatentScores{std::move(q)};
    }

    // backtracking line search along the projected gradient
    double step = 1.0;
    bool moved = false;
    for (int back = 0; back < 60; ++back) {
      std::vector<double> trial(n);
      for (std::size_t i = 0; i < n; ++i) trial[i] = q[i] + step * g[i];
      project_to_sum_zero(trial);
      const double f_trial = objective(cm, trial, options.prior);
      if (f_trial > f + 1e-4 * step * grad_norm * grad_norm) {
        q = std::move(trial);
        f = f_trial;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // Step collapsed below representable progress; accept if the gradient
      // is already tiny, otherwise report non-convergence.
      if (grad_norm < 1e-6) {
        project_to_sum_zero(q);
        return LatentScores{std::move(q)};
      }
      throw ConvergenceError("map_scores line search stalled (gradient norm " +
                                 std::to_string(grad_norm) + ")",
                             q, grad_norm);
    }
  }
  throw ConvergenceError("map_scores did not converge within " +
                             std::to_string(options.max_iterations) +
                             " iterations (gradient norm " + std::to_string(grad_norm) + ")",
                         q, grad_norm);
}

double calibrate(std::span<const TokenDistribution> test_vs_anchors,
                 const ProbabilityMatrix& anchor_block, const MapOptions& options) {
  if (test_vs_anchors.size() != anchor_block.items()) {
    throw DomainError("need one comparison distribution per anchor");
  }
  std::vector<double> anchor_over_test(test_vs_anchors.size());
  for (std::size_t i = 0; i < test_vs_anchors.size(); ++i) {
    anchor_over_test[i] = 1.0 - soft_score(test_vs_anchors[i]);
  }
  const ProbabilityMatrix m = assemble_matrix(anchor_block, anchor_over_test);
  const LatentScores scores = map_scores(m, options);
  return scores.scores.back();
}

}  // namespace w2s
