#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "w2s/annotate.hpp"

namespace w2s {

/// One video with its weak-teacher and student scores.
struct ScoredVideo {
  std::string id;
  double weak_score = 0;
  double student_score = 0;
};

struct ScoredPool {
  std::vector<ScoredVideo> videos;

  void validate() const;  // finite scores, non-empty, unique ids
};

enum class ScoreAxis { weak, student };
std::string to_string(ScoreAxis axis);

/// Uniform-width quality levels over the observed range of one score axis.
/// Bins are half-open with the last bin closed, so a value exactly on an
/// interior boundary goes to the upper level.
struct LevelAssignment {
  int k_levels = 0;
  double lo = 0;
  double hi = 0;
  double width = 0;
  bool degenerate = false;  // all scores identical: single level 0
  std::map<std::string, int> level_of;

  int level(const std::string& id) const { return level_of.at(id); }
};

LevelAssignment partition_levels(const ScoredPool& pool, ScoreAxis axis, int k_levels);

/// A mined pair. `first` carries the larger free-axis score; `disagreement`
/// is that score difference. `low_value` marks pairs whose disagreement does
/// not exceed the fixed axis's level width (student and teacher effectively
/// agree there).
struct MinedPair {
  std::string first;
  std::string second;
  ScoreAxis fixed_axis = ScoreAxis::weak;
  int level = 0;
  double disagreement = 0;
  bool low_value = false;
};

struct MiningReport {
  std::vector<MinedPair> pairs;
  /// Levels skipped for holding fewer than two videos, per fixed axis.
  std::map<std::string, std::vector<int>> skipped_levels;
};

/// Within each level of one model's partition, selects the pairs maximizing
/// the other model's score difference, for both role orders (weak fixed and
/// student fixed). At most `per_level` pairs per level per role order;
/// deterministic, ties broken by lexicographically smallest id pair.
MiningReport mine_gmad(const ScoredPool& pool, int k_levels, int per_level = 1);

/// Pair ids whose predicted label differs from the severity ground truth.
/// All three spans must be aligned and of equal length.
std::vector<std::string> misclassified_synthetic(std::span<const std::string> pair_ids,
                                                 std::span<const RankLabel> predicted,
                                                 std::span<const RankLabel> truth);

}  // namespace w2s
