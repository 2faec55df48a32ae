#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "w2s/frame.hpp"

namespace w2s {

/// The nine low-level perceptual scalars for one clip.
struct MetricVector {
  double blockiness = 0;     // internal/external pixel-difference ratio, >= 0
  double blur = 0;           // CPBD sharpness probability in [0,1], higher = sharper
  double contrast = 0;       // population std of luma, >= 0
  double noise = 0;          // estimated Gaussian sigma, >= 0
  double flicker = 0;        // fraction of pixels toggling past the threshold, [0,1]
  double colourfulness = 0;  // >= 0
  double luminance = 0;      // mean per-pixel R+G+B, >= 0
  double si = 0;             // spatial information, >= 0
  double ti = 0;             // temporal information, >= 0

  static constexpr std::size_t kCount = 9;
  static const std::array<std::string, kCount>& column_names();

  std::array<double, kCount> values() const;
  static MetricVector from_values(const std::array<double, kCount>& v);

  /// Throws DomainError if any field is non-finite or out of range.
  void validate() const;

  bool operator==(const MetricVector&) const = default;
};

/// Constants of the cumulative-probability-of-blur-detection sharpness
/// metric. Pinned in one record so tests can freeze them.
struct CpbdConfig {
  int block_size = 64;
  double edge_block_min_edge_frac = 0.002;  // block participates above this edge density
  double beta = 3.6;
  double jnb_width_wide = 5.0;    // low-contrast band
  double jnb_width_narrow = 3.0;  // high-contrast band
  double contrast_band = 50.0;    // band split on block max-min contrast
  // Edge pixels need a horizontal gradient of at least
  // max(gradient_floor, gradient_rel * strongest gradient in the block);
  // the relative part keeps the strongest edges detectable after blurring.
  double gradient_floor = 2.0;
  double gradient_rel = 0.25;
  double pblur_threshold = 0.63;  // = P_BLUR at width == JNB width
};

enum class FrameSampling {
  one_fps,     // frame indices floor(k * fps), k = 0, 1, ...
  all_frames,
};

struct MetricsConfig {
  int blockiness_block = 8;
  double blockiness_cap = 100.0;  // ratio cap when the external sum is zero
  double flicker_threshold = 10.0;
  CpbdConfig cpbd;
  FrameSampling sampling = FrameSampling::one_fps;
};

/// Ratio of summed internal to summed external horizontal neighbor
/// differences; external pairs straddle a block boundary column.
/// 0/0 resolves to 1.0; x/0 with x > 0 is capped.
double blockiness(const Frame& luma, int block = 8, double cap = 100.0);

struct CpbdResult {
  double value = 1.0;
  bool no_edges = false;
};

/// Sharpness as the probability mass of edges whose blur probability stays
/// at or below the just-noticeable threshold. Higher = sharper.
CpbdResult cpbd_blur(const Frame& luma, const CpbdConfig& config = {});

/// Population standard deviation of luma intensities.
double contrast(const Frame& luma);

/// Gaussian-sigma estimate from the median absolute deviation of the
/// Laplacian-filtered frame.
double noise_estimate(const Frame& luma);

/// Mean fraction of pixels whose luma changes by more than `threshold`
/// between consecutive frames of the given clip.
double flicker(const VideoClip& clip, double threshold = 10.0);

/// Hasler-Suesstrunk colourfulness on the rg/yb opponent axes.
double colourfulness(const Frame& rgb);

/// Mean per-pixel R+G+B.
double luminance(const Frame& rgb);

/// Max over frames of the spatial std of the Sobel gradient magnitude
/// (borders excluded).
double spatial_information(const VideoClip& clip);

/// Max over time of the spatial std of the signed frame difference.
double temporal_information(const VideoClip& clip);

/// 1 fps sample positions: floor(k * num / den) for k = 0, 1, ... An index
/// for the final frame is appended when sampling would yield fewer than two
/// frames, so temporal metrics always see a successor.
std::vector<std::size_t> sample_indices(std::size_t frame_count, FrameRate fps,
                                        FrameSampling sampling);

/// Per-frame metrics averaged over the sampled frames; si/ti take their max
/// over the sampled sequence and flicker its mean over sampled pairs.
/// luma8 clips are treated as gray rgb (colourfulness 0, luminance 3*mean).
MetricVector metric_vector(const VideoClip& clip, const MetricsConfig& config = {});

}  // namespace w2s
