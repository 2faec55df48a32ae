#include "w2s/teachers.hpp"

#include <random>

namespace w2s {

namespace {

std::uint64_t fnv1a(const std::string& text, std::uint64_t h) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

double ScriptTeacher::score(const MetricVector& metrics, const std::string& video_id) const {
  const auto v = metrics.values();
  double s = bias;
  for (std::size_t i = 0; i < MetricVector::kCount; ++i) s += weights[i] * v[i];
  if (noise_sigma > 0) {
    std::uint64_t h = fnv1a(model_id, 1469598103934665603ULL ^ seed);
    h = fnv1a(video_id, h);
    std::mt19937_64 rng(h);
    std::normal_distribution<double> noise(0.0, noise_sigma);
    s += noise(rng);
  }
  return s;
}

ScorerPrediction ScriptTeacher::predict(const MetricVector& metrics,
                                        const std::string& video_id) const {
  return ScorerPrediction{model_id, video_id, score(metrics, video_id)};
}

std::vector<ScriptTeacher> default_teachers(std::uint64_t seed, double noise_sigma) {
  // Columns: blockiness blur contrast noise flicker colourfulness luminance si ti.
  // Three deliberately partial reads of the degradation evidence; each one
  // alone is a mediocre scorer, their mean recovers most of the linear
  // signal. Coefficients target a roughly common output spread.
  std::vector<ScriptTeacher> teachers(3);

  teachers[0].model_id = "spatial-scorer";
  teachers[0].weights = {0.0, -0.06, 0.014, -0.018, 0.0, 0.0, 0.0, 0.0034, 0.0};

  teachers[1].model_id = "temporal-scorer";
  teachers[1].weights = {0.0, 0.0, 0.0, 0.0, 1.57, 0.0, -0.00085, 0.0, -0.011};

  teachers[2].model_id = "structure-scorer";
  teachers[2].weights = {0.013, -0.06, 0.010, -0.010, 0.8, 0.0, -0.0004, 0.003, -0.006};

  for (auto& t : teachers) {
    t.noise_sigma = noise_sigma;
    t.seed = seed;
  }
  return teachers;
}

}  // namespace w2s
