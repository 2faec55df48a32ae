#include "w2s/annotate.hpp"

#include <cmath>

namespace w2s {

RankLabel rank_label_from_ordinal(int k) {
  if (k < 1 || k > 5) throw DomainError("rank ordinal " + std::to_string(k) + " outside 1..5");
  return static_cast<RankLabel>(k);
}

std::string to_string(RankLabel label) {
  switch (label) {
    case RankLabel::inferior: return "inferior";
    case RankLabel::worse: return "worse";
    case RankLabel::similar: return "similar";
    case RankLabel::better: return "better";
    case RankLabel::superior: return "superior";
  }
  throw DomainError("invalid rank label");
}

RankLabel rank_label_from_string(const std::string& token) {
  for (int k = 1; k <= 5; ++k) {
    if (to_string(static_cast<RankLabel>(k)) == token) return static_cast<RankLabel>(k);
  }
  throw DomainError("unknown rank label '" + token + "'");
}

std::string to_string(AnnotationSource source) {
  switch (source) {
    case AnnotationSource::ensemble: return "ensemble";
    case AnnotationSource::severity: return "severity";
    case AnnotationSource::gmad: return "gmad";
  }
  throw DomainError("invalid annotation source");
}

AnnotationSource annotation_source_from_string(const std::string& token) {
  if (token == "ensemble") return AnnotationSource::ensemble;
  if (token == "severity") return AnnotationSource::severity;
  if (token == "gmad") return AnnotationSource::gmad;
  throw DomainError("unknown annotation source '" + token + "'");
}

EnsembleStats ensemble_stats(std::span<const ScorerPrediction> predictions) {
  if (predictions.size() < 2) {
    throw DomainError("ensemble needs at least 2 predictions, got " +
                      std::to_string(predictions.size()));
  }
  const std::string& video = predictions.front().video_id;
  double sum = 0;
  for (const auto& p : predictions) {
    if (p.video_id != video) {
      throw DomainError("ensemble_stats saw predictions for '" + video + "' and '" +
                        p.video_id + "'");
    }
    if (!std::isfinite(p.score)) {
      throw DomainError("non-finite score from model '" + p.model_id + "' for '" + video +
                        "'");
    }
    sum += p.score;
  }
  EnsembleStats stats;
  stats.mean = sum / static_cast<double>(predictions.size());
  double acc = 0;
  for (const auto& p : predictions) {
    acc += (p.score - stats.mean) * (p.score - stats.mean);
  }
  stats.variance = acc / static_cast<double>(predictions.size());
  return stats;
}

RankLabel label_first_relative(double mean_a, double var_a, double mean_b, double var_b) {
  if (var_a < 0 || var_b < 0) throw DomainError("negative variance");
  const double delta = mean_a - mean_b;
  const double sigma = std::sqrt(var_a + var_b);
  if (sigma == 0.0) {
    if (delta == 0.0) return RankLabel::similar;
    throw DomainError("degenerate variance: sigma_delta = 0 with delta = " +
                      std::to_string(delta));
  }
  const double mag = std::abs(delta);
  if (mag <= sigma) return RankLabel::similar;
  if (mag <= 2.0 * sigma) {
    return delta > 0 ? RankLabel::better : RankLabel::worse;
  }
  return delta > 0 ? RankLabel::superior : RankLabel::inferior;
}

RankLabel label_pair(double mean_a, double var_a, double mean_b, double var_b) {
  return mirror(label_first_relative(mean_a, var_a, mean_b, var_b));
}

RankLabel severity_label(int level_first, int level_second) {
  if (level_first == level_second) {
    throw DomainError("severity pair with equal levels (" + std::to_string(level_first) +
                      ", " + std::to_string(level_second) + "); identical videos carry no "
                      "rank information");
  }
  const int gap = std::abs(level_first - level_second);
  const bool second_better = level_second < level_first;
  if (gap > 1) return second_better ? RankLabel::superior : RankLabel::inferior;
  return second_better ? RankLabel::better : RankLabel::worse;
}

void PredictionStore::add(ScorerPrediction prediction) {
  by_video_[prediction.video_id].push_back(std::move(prediction));
}

bool PredictionStore::has(const std::string& video_id) const {
  return by_video_.count(video_id) > 0;
}

std::span<const ScorerPrediction> PredictionStore::of(const std::string& video_id) const {
  const auto it = by_video_.find(video_id);
  if (it == by_video_.end()) return {};
  return it->second;
}

EnsembleStats PredictionStore::stats(const std::string& video_id) const {
  return ensemble_stats(of(video_id));
}

AnnotationBatch annotate_corpus(std::span<const std::pair<std::string, std::string>> pairs,
                                const PredictionStore& predictions, int stage,
                                AnnotationSource source) {
  AnnotationBatch batch;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [first, second] = pairs[i];
    try {
      if (first == second) throw DomainError("pair compares a video with itself");
      const EnsembleStats a = predictions.stats(first);
      const EnsembleStats b = predictions.stats(second);
      batch.annotations.push_back(PairAnnotation{
          first, second, label_pair(a.mean, a.variance, b.mean, b.variance), source, stage});
    } catch (const Error& e) {
      batch.failures.push_back(AnnotationFailure{i, first, second, e.what()});
    }
  }
  return batch;
}

}  // namespace w2s
