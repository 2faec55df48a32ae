#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "w2s/error.hpp"

namespace w2s {

/// Ordinal five-level comparison. The ordinal index k runs 1..5 and
/// mirroring maps k to 6-k.
enum class RankLabel : int {
  inferior = 1,
  worse = 2,
  similar = 3,
  better = 4,
  superior = 5,
};

inline int ordinal(RankLabel label) { return static_cast<int>(label); }
RankLabel rank_label_from_ordinal(int k);
inline RankLabel mirror(RankLabel label) { return rank_label_from_ordinal(6 - ordinal(label)); }
std::string to_string(RankLabel label);
RankLabel rank_label_from_string(const std::string& token);

/// One teacher's score for one video on the shared teacher scale.
struct ScorerPrediction {
  std::string model_id;
  std::string video_id;
  double score = 0;
};

enum class AnnotationSource { ensemble, severity, gmad };
std::string to_string(AnnotationSource source);
AnnotationSource annotation_source_from_string(const std::string& token);

/// A labeled pair. `label` describes the quality of `second` relative to
/// `first` (the dual-video prompt convention), for every source.
struct PairAnnotation {
  std::string first;
  std::string second;
  RankLabel label = RankLabel::similar;
  AnnotationSource source = AnnotationSource::ensemble;
  int stage = 1;

  /// Identity used for cross-stage disjointness bookkeeping.
  std::string pair_id() const { return first + "|" + second; }
};

struct EnsembleStats {
  double mean = 0;
  double variance = 0;  // population variance (divide by n)
};

/// Mean and population variance of one video's ensemble scores.
/// Throws DomainError with fewer than two predictions or mixed video ids.
EnsembleStats ensemble_stats(std::span<const ScorerPrediction> predictions);

/// Significance-threshold label for video A relative to B:
/// delta = meanA - meanB, sigma = sqrt(varA + varB);
/// |delta| <= sigma -> similar, sigma < |delta| <= 2 sigma -> better/worse,
/// |delta| > 2 sigma -> superior/inferior, sign of delta picks the side.
/// sigma == 0 with delta != 0 raises a degenerate-variance DomainError.
RankLabel label_first_relative(double mean_a, double var_a, double mean_b, double var_b);

/// Same rule, mirrored into the stored second-relative-to-first convention.
RankLabel label_pair(double mean_a, double var_a, double mean_b, double var_b);

/// Severity-ladder label of the second clip relative to the first; lower
/// level index means higher quality. |i-j| == 1 -> better/worse, > 1 ->
/// superior/inferior. i == j is a domain error ("similar" is excluded).
RankLabel severity_label(int level_first, int level_second);

/// Per-video prediction store keyed by video id.
class PredictionStore {
 public:
  void add(ScorerPrediction prediction);
  bool has(const std::string& video_id) const;
  std::span<const ScorerPrediction> of(const std::string& video_id) const;
  EnsembleStats stats(const std::string& video_id) const;
  std::size_t video_count() const { return by_video_.size(); }

 private:
  std::map<std::string, std::vector<ScorerPrediction>> by_video_;
};

struct AnnotationFailure {
  std::size_t pair_index = 0;
  std::string first;
  std::string second;
  std::string reason;
};

struct AnnotationBatch {
  std::vector<PairAnnotation> annotations;
  std::vector<AnnotationFailure> failures;
};

/// Labels every pair from ensemble statistics. Pairs with missing or
/// degenerate predictions are itemized in `failures`; the rest are
/// unaffected. Deterministic.
AnnotationBatch annotate_corpus(std::span<const std::pair<std::string, std::string>> pairs,
                                const PredictionStore& predictions, int stage,
                                AnnotationSource source = AnnotationSource::ensemble);

}  // namespace w2s
