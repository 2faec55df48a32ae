#include "w2s/gmad.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace w2s {

void ScoredPool::validate() const {
  if (videos.empty()) throw DomainError("scored pool is empty");
  std::set<std::string> seen;
  for (const auto& v : videos) {
    if (!std::isfinite(v.weak_score) || !std::isfinite(v.student_score)) {
      throw DomainError("non-finite score for video '" + v.id + "'");
    }
    if (!seen.insert(v.id).second) {
      throw DomainError("duplicate video id '" + v.id + "' in scored pool");
    }
  }
}

std::string to_string(ScoreAxis axis) {
  return axis == ScoreAxis::weak ? "weak" : "student";
}

namespace {

double score_on(const ScoredVideo& v, ScoreAxis axis) {
  return axis == ScoreAxis::weak ? v.weak_score : v.student_score;
}

}  // namespace

LevelAssignment partition_levels(const ScoredPool& pool, ScoreAxis axis, int k_levels) {
  pool.validate();
  if (k_levels < 2) throw DomainError("k_levels must be at least 2");

  LevelAssignment out;
  out.k_levels = k_levels;
  out.lo = score_on(pool.videos.front(), axis);
  out.hi = out.lo;
  for (const auto& v : pool.videos) {
    out.lo = std::min(out.lo, score_on(v, axis));
    out.hi = std::max(out.hi, score_on(v, axis));
  }
  if (out.hi == out.lo) {
    out.degenerate = true;
    out.width = 0;
    for (const auto& v : pool.videos) out.level_of[v.id] = 0;
    return out;
  }
  out.width = (out.hi - out.lo) / static_cast<double>(k_levels);
  for (const auto& v : pool.videos) {
    const double s = score_on(v, axis);
    int level = static_cast<int>(std::floor((s - out.lo) / out.width));
    level = std::clamp(level, 0, k_levels - 1);  // closes the last bin
    out.level_of[v.id] = level;
  }
  return out;
}

namespace {

void mine_one_role(const ScoredPool& pool, ScoreAxis fixed_axis, int k_levels, int per_level,
                   MiningReport& report) {
  const ScoreAxis free_axis =
      fixed_axis == ScoreAxis::weak ? ScoreAxis::student : ScoreAxis::weak;
  const LevelAssignment levels = partition_levels(pool, fixed_axis, k_levels);
  const int level_count = levels.degenerate ? 1 : levels.k_levels;

  std::vector<std::vector<const ScoredVideo*>> members(
      static_cast<std::size_t>(level_count));
  for (const auto& v : pool.videos) {
    members[static_cast<std::size_t>(levels.level(v.id))].push_back(&v);
  }

  for (int level = 0; level < level_count; ++level) {
    auto& group = members[static_cast<std::size_t>(level)];
    if (group.size() < 2) {
      report.skipped_levels[to_string(fixed_axis)].push_back(level);
      continue;
    }
    std::sort(group.begin(), group.end(),
              [](const ScoredVideo* a, const ScoredVideo* b) { return a->id < b->id; });

    struct Candidate {
      double disagreement;
      std::string first, second;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(group.size() * (group.size() - 1) / 2);
    for (std::size_t a = 0; a < group.size(); ++a) {
      for (std::size_t b = a + 1; b < group.size(); ++b) {
        const double fa = score_on(*group[a], free_axis);
        const double fb = score_on(*group[b], free_axis);
        // orient the pair so `first` carries the larger free-axis score
        if (fa >= fb) {
          candidates.push_back({fa - fb, group[a]->id, group[b]->id});
        } else {
          candidates.push_back({fb - fa, group[b]->id, group[a]->id});
        }
      }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
      if (a.disagreement != b.disagreement) return a.disagreement > b.disagreement;
      if (a.first != b.first) return a.first < b.first;
      return a.second < b.second;
    });

    const std::size_t take = std::min<std::size_t>(candidates.size(),
                                                   static_cast<std::size_t>(per_level));
    for (std::size_t i = 0; i < take; ++i) {
      MinedPair mined;
      mined.first = candidates[i].first;
      mined.second = candidates[i].second;
      mined.fixed_axis = fixed_axis;
      mined.level = level;
      mined.disagreement = candidates[i].disagreement;
      mined.low_value = candidates[i].disagreement <= levels.width + 1e-12;
      report.pairs.push_back(std::move(mined));
    }
  }
}

}  // namespace

MiningReport mine_gmad(const ScoredPool& pool, int k_levels, int per_level) {
  if (per_level < 1) throw DomainError("per_level budget must be positive");
  MiningReport report;
  mine_one_role(pool, ScoreAxis::weak, k_levels, per_level, report);
  mine_one_role(pool, ScoreAxis::student, k_levels, per_level, report);
  return report;
}

std::vector<std::string> misclassified_synthetic(std::span<const std::string> pair_ids,
                                                 std::span<const RankLabel> predicted,
                                                 std::span<const RankLabel> truth) {
  if (pair_ids.size() != predicted.size() || predicted.size() != truth.size()) {
    throw DomainError("misclassified_synthetic inputs are misaligned: " +
                      std::to_string(pair_ids.size()) + " ids, " +
                      std::to_string(predicted.size()) + " predictions, " +
                      std::to_string(truth.size()) + " truths");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < pair_ids.size(); ++i) {
    if (predicted[i] != truth[i]) out.push_back(pair_ids[i]);
  }
  return out;
}

}  // namespace w2s
