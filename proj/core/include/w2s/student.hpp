#pragma once

#include <array>
#include <filesystem>
#include <span>

#include "w2s/metrics.hpp"
#include "w2s/rank.hpp"

namespace w2s {

/// Pair feature layout: metrics of A, metrics of B, then A - B.
inline constexpr std::size_t kPairFeatureDim = 3 * MetricVector::kCount;

std::array<double, kPairFeatureDim> pair_features(const MetricVector& a,
                                                  const MetricVector& b);

/// Per-feature affine standardizer fitted on the training features; folded
/// into the checkpoint so inference sees the same input scale.
struct FeatureScaler {
  std::array<double, kPairFeatureDim> mean{};
  std::array<double, kPairFeatureDim> scale{};  // 1 everywhere until fitted

  FeatureScaler();
  static FeatureScaler fit(std::span<const std::array<double, kPairFeatureDim>> rows);
  std::array<double, kPairFeatureDim> apply(
      const std::array<double, kPairFeatureDim>& row) const;

  bool operator==(const FeatureScaler&) const = default;
};

/// Linear softmax ranker over pair features: 5 class logits from a 27-dim
/// input. Stands in for the heavyweight dual-video student; anything that
/// maps two feature vectors to a TokenDistribution can replace it behind
/// predict_pair.
struct StudentRanker {
  std::array<std::array<double, kPairFeatureDim>, 5> weights{};
  std::array<double, 5> bias{};
  FeatureScaler scaler;

  /// Zero-initialized model: predicts the uniform distribution everywhere.
  static StudentRanker zero();

  void validate() const;  // finite parameters

  bool operator==(const StudentRanker&) const = default;
};

std::array<double, 5> pair_logits(const StudentRanker& model, const MetricVector& a,
                                  const MetricVector& b);

/// Distribution of the second video's quality relative to the first.
TokenDistribution predict_pair(const StudentRanker& model, const MetricVector& a,
                               const MetricVector& b);

/// Versioned JSON checkpoint.
void save_checkpoint(const StudentRanker& model, const std::filesystem::path& path,
                     const std::string& config_digest = "", std::uint64_t seed = 0);
StudentRanker load_checkpoint(const std::filesystem::path& path);

}  // namespace w2s
