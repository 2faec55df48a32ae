#include "w2s/curate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "w2s/error.hpp"

namespace w2s {

namespace {

constexpr std::size_t kMetrics = MetricVector::kCount;

double percentile(std::vector<double> sorted, double p) {
  // linear interpolation between closest ranks; `sorted` must be ascending
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

std::size_t bin_index(const MetricHistogram& hist, double value) {
  const auto& e = hist.edges;
  if (value <= e.front()) return 0;
  if (value >= e.back()) return hist.masses.size() - 1;
  const auto it = std::upper_bound(e.begin(), e.end(), value);
  return static_cast<std::size_t>(it - e.begin()) - 1;
}

void require_same_edges(const HistogramSet& a, const HistogramSet& b) {
  if (a.bins != b.bins) throw DomainError("histogram bin counts differ");
  for (std::size_t m = 0; m < kMetrics; ++m) {
    const auto& ea = a.per_metric[m].edges;
    const auto& eb = b.per_metric[m].edges;
    if (ea.size() != eb.size()) throw DomainError("histogram edge counts differ");
    for (std::size_t i = 0; i < ea.size(); ++i) {
      if (std::abs(ea[i] - eb[i]) > 1e-12) {
        throw DomainError("histogram edges differ for metric '" +
                          MetricVector::column_names()[m] + "'");
      }
    }
  }
}

// Bin index per metric for one video, on the target's edges.
using BinSignature = std::array<std::size_t, kMetrics>;

BinSignature signature_of(const MetricVector& v, const HistogramSet& target) {
  BinSignature sig{};
  const auto values = v.values();
  for (std::size_t m = 0; m < kMetrics; ++m) {
    sig[m] = bin_index(target.per_metric[m], values[m]);
  }
  return sig;
}

struct SelectionState {
  // counts[m][b] = number of chosen videos falling in bin b of metric m
  std::vector<std::vector<int>> counts;
  std::size_t chosen = 0;

  explicit SelectionState(int bins)
      : counts(kMetrics, std::vector<int>(static_cast<std::size_t>(bins), 0)) {}

  void add(const BinSignature& sig, int delta) {
    for (std::size_t m = 0; m < kMetrics; ++m) {
      counts[m][sig[m]] += delta;
    }
    chosen = static_cast<std::size_t>(static_cast<long long>(chosen) + delta);
  }
};

std::array<double, kMetrics> per_metric_l1(const SelectionState& state,
                                           const HistogramSet& target, std::size_t denom) {
  std::array<double, kMetrics> out{};
  for (std::size_t m = 0; m < kMetrics; ++m) {
    const auto& masses = target.per_metric[m].masses;
    double acc = 0;
    for (std::size_t b = 0; b < masses.size(); ++b) {
      const double got =
          denom == 0 ? 0.0 : static_cast<double>(state.counts[m][b]) / static_cast<double>(denom);
      acc += std::abs(got - masses[b]);
    }
    out[m] = acc;
  }
  return out;
}

double total_of(const std::array<double, kMetrics>& d) {
  double t = 0;
  for (double v : d) t += v;
  return t;
}

// Exact branch-and-bound over the binary selection vector. The bound
// relaxes the remaining picks to freely placeable mass of 1/k each.
class ExactSolver {
 public:
  ExactSolver(const std::vector<BinSignature>& signatures, const HistogramSet& target,
              std::size_t k)
      : signatures_(signatures), target_(target), k_(k), state_(target.bins) {}

  std::vector<std::size_t> solve(double incumbent_objective,
                                 std::vector<std::size_t> incumbent) {
    best_objective_ = incumbent_objective;
    best_ = std::move(incumbent);
    descend(0);
    return best_;
  }

 private:
  double lower_bound() const {
    const double remaining =
        static_cast<double>(k_ - state_.chosen) / static_cast<double>(k_);
    double bound = 0;
    for (std::size_t m = 0; m < kMetrics; ++m) {
      const auto& masses = target_.per_metric[m].masses;
      double deficit = 0, surplus = 0;
      for (std::size_t b = 0; b < masses.size(); ++b) {
        const double got =
            static_cast<double>(state_.counts[m][b]) / static_cast<double>(k_);
        if (got < masses[b]) {
          deficit += masses[b] - got;
        } else {
          surplus += got - masses[b];
        }
      }
      bound += remaining <= deficit ? (deficit - remaining) + surplus
                                    : surplus + (remaining - deficit);
    }
    return bound;
  }

  void descend(std::size_t index) {
    if (state_.chosen == k_) {
      const double objective = total_of(per_metric_l1(state_, target_, k_));
      if (objective < best_objective_ - 1e-15) {
        best_objective_ = objective;
        best_ = picked_;
      }
      return;
    }
    if (index >= signatures_.size()) return;
    if (signatures_.size() - index < k_ - state_.chosen) return;  // cannot fill k
    if (lower_bound() >= best_objective_ - 1e-15) return;

    // include signatures_[index]
    state_.add(signatures_[index], +1);
    picked_.push_back(index);
    descend(index + 1);
    picked_.pop_back();
    state_.add(signatures_[index], -1);

    // exclude it
    descend(index + 1);
  }

  const std::vector<BinSignature>& signatures_;
  const HistogramSet& target_;
  const std::size_t k_;
  SelectionState state_;
  std::vector<std::size_t> picked_;
  std::vector<std::size_t> best_;
  double best_objective_ = std::numeric_limits<double>::infinity();
};

std::vector<std::size_t> greedy_select(const std::vector<BinSignature>& signatures,
                                       const HistogramSet& target, std::size_t k) {
  SelectionState state(target.bins);
  std::vector<bool> used(signatures.size(), false);
  std::vector<std::size_t> picked;
  picked.reserve(k);
  while (picked.size() < k) {
    double best_distance = std::numeric_limits<double>::infinity();
    std::size_t best_index = signatures.size();
    for (std::size_t i = 0; i < signatures.size(); ++i) {
      if (used[i]) continue;
      state.add(signatures[i], +1);
      const double d = total_of(per_metric_l1(state, target, state.chosen));
      state.add(signatures[i], -1);
      if (d < best_distance - 1e-15) {  // ties keep the earlier (lowest) id
        best_distance = d;
        best_index = i;
      }
    }
    used[best_index] = true;
    state.add(signatures[best_index], +1);
    picked.push_back(best_index);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace

void HistogramSet::validate() const {
  for (std::size_t m = 0; m < kMetrics; ++m) {
    const auto& hist = per_metric[m];
    if (hist.edges.size() != static_cast<std::size_t>(bins) + 1 ||
        hist.masses.size() != static_cast<std::size_t>(bins)) {
      throw DomainError("histogram for metric '" + MetricVector::column_names()[m] +
                        "' has inconsistent bin count");
    }
    if (!std::is_sorted(hist.edges.begin(), hist.edges.end())) {
      throw DomainError("histogram edges must be monotone");
    }
    double sum = 0;
    for (double mass : hist.masses) {
      if (mass < 0) throw DomainError("negative histogram mass");
      sum += mass;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw DomainError("histogram masses for metric '" + MetricVector::column_names()[m] +
                        "' sum to " + std::to_string(sum));
    }
  }
}

HistogramSet build_histograms(std::span<const MetricVector> vectors, int bins,
                              const std::optional<HistogramSet>& shared_edges) {
  if (vectors.empty()) throw DomainError("cannot build histograms from an empty input");
  if (bins < 1) throw DomainError("bin count must be positive");
  if (shared_edges.has_value()) bins = shared_edges->bins;

  HistogramSet out;
  out.bins = bins;
  for (std::size_t m = 0; m < kMetrics; ++m) {
    MetricHistogram& hist = out.per_metric[m];
    if (shared_edges.has_value()) {
      hist.edges = shared_edges->per_metric[m].edges;
    } else {
      std::vector<double> values;
      values.reserve(vectors.size());
      for (const auto& v : vectors) values.push_back(v.values()[m]);
      std::sort(values.begin(), values.end());
      double lo = percentile(values, 1.0);
      double hi = percentile(values, 99.0);
      if (hi - lo < 1e-12) {  // degenerate spread: open up a unit-ish span
        const double pad = std::max(0.5, std::abs(lo) * 1e-6);
        lo -= pad;
        hi += pad;
      }
      hist.edges.resize(static_cast<std::size_t>(bins) + 1);
      for (int b = 0; b <= bins; ++b) {
        hist.edges[static_cast<std::size_t>(b)] = lo + (hi - lo) * b / bins;
      }
    }
    hist.masses.assign(static_cast<std::size_t>(bins), 0.0);
    for (const auto& v : vectors) {
      hist.masses[bin_index(hist, v.values()[m])] += 1.0;
    }
    for (double& mass : hist.masses) mass /= static_cast<double>(vectors.size());
  }
  out.validate();
  return out;
}

double histogram_distance(const HistogramSet& a, const HistogramSet& b) {
  require_same_edges(a, b);
  double total = 0;
  for (std::size_t m = 0; m < kMetrics; ++m) {
    for (std::size_t bin = 0; bin < a.per_metric[m].masses.size(); ++bin) {
      total += std::abs(a.per_metric[m].masses[bin] - b.per_metric[m].masses[bin]);
    }
  }
  return total;
}

CurationPlan match_subset(const std::map<std::string, MetricVector>& pool,
                          const HistogramSet& target, std::size_t k, MatchMode mode) {
  target.validate();
  if (k == 0) throw DomainError("subset size k must be positive");
  if (k > pool.size()) {
    throw DomainError("k = " + std::to_string(k) + " exceeds pool size " +
                      std::to_string(pool.size()));
  }
  if (mode == MatchMode::exact && pool.size() > kExactModePoolCap) {
    throw DomainError("exact mode supports pools of up to " +
                      std::to_string(kExactModePoolCap) +
                      " videos; use greedy mode for larger pools");
  }

  std::vector<std::string> ids;
  std::vector<BinSignature> signatures;
  ids.reserve(pool.size());
  signatures.reserve(pool.size());
  for (const auto& [id, vec] : pool) {  // std::map iteration = ascending id order
    ids.push_back(id);
    signatures.push_back(signature_of(vec, target));
  }

  std::vector<std::size_t> picked = greedy_select(signatures, target, k);
  if (mode == MatchMode::exact) {
    SelectionState greedy_state(target.bins);
    for (std::size_t i : picked) greedy_state.add(signatures[i], +1);
    const double greedy_objective = total_of(per_metric_l1(greedy_state, target, k));
    ExactSolver solver(signatures, target, k);
    picked = solver.solve(greedy_objective, std::move(picked));
  }

  CurationPlan plan;
  SelectionState state(target.bins);
  for (std::size_t i : picked) {
    plan.selected.push_back(ids[i]);
    state.add(signatures[i], +1);
  }
  plan.per_metric_distance = per_metric_l1(state, target, k);
  plan.objective = total_of(plan.per_metric_distance);
  return plan;
}

}  // namespace w2s
