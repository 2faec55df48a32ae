#include "w2s/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "w2s/error.hpp"

namespace w2s {

namespace {

void check_inputs(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DomainError("correlation inputs differ in length");
  if (a.size() < 3) throw DomainError("correlation needs at least 3 observations");
  for (double v : a) {
    if (!std::isfinite(v)) throw DomainError("non-finite value in first vector");
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw DomainError("non-finite value in second vector");
  }
}

// Fractional (average) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0, var_a = 0, var_b = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  if (var_a == 0.0 || var_b == 0.0) {
    throw DomainError("correlation undefined: an input vector has zero variance");
  }
  return cov / std::sqrt(var_a * var_b);
}

}  // namespace

double srcc(std::span<const double> a, std::span<const double> b) {
  check_inputs(a, b);
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  return pearson(ra, rb);
}

double plcc(std::span<const double> a, std::span<const double> b) {
  check_inputs(a, b);
  return pearson(a, b);
}

EvalReport benchmark(const std::map<std::string, double>& predictions,
                     const std::map<std::string, double>& ground_truth,
                     const std::string& dataset) {
  std::vector<double> pred, truth;
  for (const auto& [id, p] : predictions) {
    const auto it = ground_truth.find(id);
    if (it == ground_truth.end()) continue;
    pred.push_back(p);
    truth.push_back(it->second);
  }
  if (pred.size() < 3) {
    throw DomainError("benchmark overlap of " + std::to_string(pred.size()) +
                      " video(s) is below the minimum of 3");
  }
  EvalReport report;
  report.dataset = dataset;
  report.n = pred.size();
  report.srcc = srcc(pred, truth);
  report.plcc = plcc(pred, truth);
  return report;
}

}  // namespace w2s
