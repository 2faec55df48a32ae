#pragma once

#include <array>
#include <string>
#include <vector>

#include "w2s/annotate.hpp"
#include "w2s/metrics.hpp"

namespace w2s {

/// A scripted stand-in teacher: a fixed linear read of the metric vector
/// plus controlled Gaussian score noise. The noise is a pure function of
/// (seed, model_id, video_id), so predictions do not depend on call order.
struct ScriptTeacher {
  std::string model_id;
  std::array<double, MetricVector::kCount> weights{};
  double bias = 0;
  double noise_sigma = 0;
  std::uint64_t seed = 0;

  double score(const MetricVector& metrics, const std::string& video_id) const;
  ScorerPrediction predict(const MetricVector& metrics, const std::string& video_id) const;
};

/// Three teachers reading different metric subsets, sharing a rough scale.
std::vector<ScriptTeacher> default_teachers(std::uint64_t seed, double noise_sigma);

}  // namespace w2s
