#pragma once

#include <map>
#include <span>
#include <string>

namespace w2s {

/// Spearman rank correlation with average-rank tie handling.
/// Requires equal lengths >= 3; a constant vector is an error.
double srcc(std::span<const double> a, std::span<const double> b);

/// Pearson linear correlation; no nonlinear pre-mapping.
double plcc(std::span<const double> a, std::span<const double> b);

struct EvalReport {
  std::string dataset;
  std::size_t n = 0;
  double srcc = 0;
  double plcc = 0;
};

/// Correlations over the id intersection of predictions and ground truth;
/// the intersection must hold at least 3 videos.
EvalReport benchmark(const std::map<std::string, double>& predictions,
                     const std::map<std::string, double>& ground_truth,
                     const std::string& dataset);

}  // namespace w2s
