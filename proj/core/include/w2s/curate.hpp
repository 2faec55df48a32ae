#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "w2s/metrics.hpp"

namespace w2s {

/// Normalized histogram of one metric: bins+1 monotone edges, bins masses
/// summing to 1. Values outside the edge range fall into the end bins.
struct MetricHistogram {
  std::vector<double> edges;
  std::vector<double> masses;
};

/// One histogram per metric, all with the same bin count.
struct HistogramSet {
  int bins = 10;
  std::array<MetricHistogram, MetricVector::kCount> per_metric;

  void validate() const;  // mass nonnegativity and sum-to-1 within 1e-9
};

/// Builds per-metric histograms. Without `shared_edges` the edges span the
/// 1st..99th percentiles of the inputs; comparisons require shared edges.
HistogramSet build_histograms(std::span<const MetricVector> vectors, int bins = 10,
                              const std::optional<HistogramSet>& shared_edges = std::nullopt);

/// Sum over metrics of the L1 distance between mass vectors. The two sets
/// must share edges.
double histogram_distance(const HistogramSet& a, const HistogramSet& b);

enum class MatchMode { exact, greedy };

struct CurationPlan {
  std::vector<std::string> selected;
  std::array<double, MetricVector::kCount> per_metric_distance{};
  double objective = 0;
};

/// Maximum pool size accepted by the exact branch-and-bound solver.
inline constexpr std::size_t kExactModePoolCap = 25;

/// Selects k videos whose histogram (binned on the target's edges) is
/// closest to the target in summed per-metric L1 distance. Exact mode
/// solves the binary program by branch-and-bound and is capped at
/// kExactModePoolCap videos; greedy adds the video with the greatest
/// marginal reduction, ties broken by lowest id.
CurationPlan match_subset(const std::map<std::string, MetricVector>& pool,
                          const HistogramSet& target, std::size_t k, MatchMode mode);

}  // namespace w2s
