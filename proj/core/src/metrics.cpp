#include "w2s/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace w2s {

const std::array<std::string, MetricVector::kCount>& MetricVector::column_names() {
  static const std::array<std::string, kCount> names = {
      "blockiness", "blur",          "contrast",  "noise", "flicker",
      "colourfulness", "luminance", "si",        "ti"};
  return names;
}

std::array<double, MetricVector::kCount> MetricVector::values() const {
  return {blockiness, blur, contrast, noise, flicker, colourfulness, luminance, si, ti};
}

MetricVector MetricVector::from_values(const std::array<double, kCount>& v) {
  return MetricVector{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]};
}

void MetricVector::validate() const {
  const auto v = values();
  const auto& names = column_names();
  for (std::size_t i = 0; i < kCount; ++i) {
    if (!std::isfinite(v[i])) throw DomainError("metric " + names[i] + " is not finite");
  }
  if (blockiness < 0 || contrast < 0 || noise < 0 || colourfulness < 0 || luminance < 0 ||
      si < 0 || ti < 0) {
    throw DomainError("negative value in metric vector");
  }
  if (blur < 0 || blur > 1) throw DomainError("blur outside [0,1]");
  if (flicker < 0 || flicker > 1) throw DomainError("flicker outside [0,1]");
}

namespace {

void require_luma(const Frame& frame, const char* op) {
  if (frame.layout() != PixelLayout::luma8) {
    throw DomainError(std::string(op) + " requires a luma frame");
  }
}

void require_rgb(const Frame& frame, const char* op) {
  if (frame.layout() != PixelLayout::rgb8) {
    throw DomainError(std::string(op) + " requires an rgb frame");
  }
}

struct MeanStd {
  double mean = 0;
  double std = 0;
};

MeanStd population_stats(const std::vector<double>& values) {
  MeanStd r;
  if (values.empty()) return r;
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  double acc = 0;
  for (double v : values) acc += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(acc / static_cast<double>(values.size()));
  return r;
}

double median_inplace(std::vector<double>& values) {
  const std::size_t n = values.size();
  auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  double hi = *mid;
  if (n % 2 == 1) return hi;
  std::nth_element(values.begin(), mid - 1, mid);
  return 0.5 * (hi + *(mid - 1));
}

}  // namespace

double blockiness(const Frame& luma, int block, double cap) {
  require_luma(luma, "blockiness");
  if (block < 2) throw DomainError("block size must be >= 2");
  if (luma.width() < 2 * block || luma.height() < 2 * block) {
    throw DomainError("frame too small for blockiness with block size " +
                      std::to_string(block));
  }
  double internal = 0, external = 0;
  for (int y = 0; y < luma.height(); ++y) {
    for (int x = 0; x + 1 < luma.width(); ++x) {
      const double d = std::abs(static_cast<int>(luma.at(x, y)) -
                                static_cast<int>(luma.at(x + 1, y)));
      if ((x + 1) % block == 0) {
        external += d;
      } else {
        internal += d;
      }
    }
  }
  if (external == 0.0) return internal == 0.0 ? 1.0 : cap;
  return std::min(internal / external, cap);
}

namespace {

// Width of the luma transition through edge column x on row y: distance
// between the nearest local extrema on either side.
int edge_width_at(const Frame& luma, int x, int y) {
  const int w = luma.width();
  auto px = [&](int xx) { return static_cast<int>(luma.at(xx, y)); };

  const bool rising = px(std::min(x + 1, w - 1)) >= px(std::max(x - 1, 0));
  int left = x;
  while (left > 0) {
    const int cur = px(left), prev = px(left - 1);
    if ((rising && prev < cur) || (!rising && prev > cur)) {
      --left;
    } else {
      break;
    }
  }
  int right = x;
  while (right + 1 < w) {
    const int nxt = px(right + 1), cur = px(right);
    if ((rising && nxt > cur) || (!rising && nxt < cur)) {
      ++right;
    } else {
      break;
    }
  }
  return right - left;
}

}  // namespace

CpbdResult cpbd_blur(const Frame& luma, const CpbdConfig& config) {
  require_luma(luma, "cpbd_blur");
  const int w = luma.width();
  const int h = luma.height();
  const int bs = std::min({config.block_size, w, h});

  std::size_t edges_total = 0;
  std::size_t edges_below = 0;

  auto gradient_at = [&](int x, int y) {
    return 0.5 * std::abs(static_cast<int>(luma.at(x + 1, y)) -
                          static_cast<int>(luma.at(x - 1, y)));
  };

  for (int by = 0; by + bs <= h; by += bs) {
    for (int bx = 0; bx + bs <= w; bx += bs) {
      int block_min = 255, block_max = 0;
      double peak_gradient = 0;
      for (int y = by; y < by + bs; ++y) {
        for (int x = bx; x < bx + bs; ++x) {
          const int v = luma.at(x, y);
          block_min = std::min(block_min, v);
          block_max = std::max(block_max, v);
          if (x > 0 && x + 1 < w) peak_gradient = std::max(peak_gradient, gradient_at(x, y));
        }
      }
      const double threshold =
          std::max(config.gradient_floor, config.gradient_rel * peak_gradient);

      // Horizontal-gradient edge pixels with non-max suppression along x.
      std::vector<std::pair<int, int>> edge_pixels;
      for (int y = by; y < by + bs; ++y) {
        for (int x = bx; x < bx + bs; ++x) {
          if (x == 0 || x + 1 >= w) continue;
          const double g = gradient_at(x, y);
          if (g < threshold) continue;
          const double gl = x >= 2 ? gradient_at(x - 1, y) : 0.0;
          const double gr = x + 2 < w ? gradient_at(x + 1, y) : 0.0;
          if (g >= gl && g >= gr) edge_pixels.emplace_back(x, y);
        }
      }
      const double min_edges =
          config.edge_block_min_edge_frac * static_cast<double>(bs) * bs;
      if (static_cast<double>(edge_pixels.size()) <= min_edges) continue;

      const double block_contrast = block_max - block_min;
      const double w_jnb = block_contrast <= config.contrast_band
                               ? config.jnb_width_wide
                               : config.jnb_width_narrow;
      for (const auto& [ex, ey] : edge_pixels) {
        const double width = edge_width_at(luma, ex, ey);
        const double p_blur = 1.0 - std::exp(-std::pow(width / w_jnb, config.beta));
        ++edges_total;
        if (p_blur <= config.pblur_threshold) ++edges_below;
      }
    }
  }

  if (edges_total == 0) return CpbdResult{1.0, true};
  return CpbdResult{static_cast<double>(edges_below) / static_cast<double>(edges_total),
                    false};
}

double contrast(const Frame& luma) {
  require_luma(luma, "contrast");
  std::vector<double> values(luma.data().begin(), luma.data().end());
  return population_stats(values).std;
}

double noise_estimate(const Frame& luma) {
  require_luma(luma, "noise_estimate");
  const int w = luma.width();
  const int h = luma.height();
  // 3x3 Laplacian [0 1 0; 1 -4 1; 0 1 0]; sum of squared coefficients = 20.
  std::vector<double> response;
  response.reserve(static_cast<std::size_t>(w - 2) * (h - 2));
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const double lap = static_cast<double>(luma.at(x - 1, y)) + luma.at(x + 1, y) +
                         luma.at(x, y - 1) + luma.at(x, y + 1) -
                         4.0 * luma.at(x, y);
      response.push_back(lap);
    }
  }
  if (response.empty()) return 0.0;
  const double med = median_inplace(response);
  for (double& v : response) v = std::abs(v - med);
  const double mad = median_inplace(response);
  constexpr double kMadToStd = 1.0 / 0.674489750196082;  // normal consistency factor
  return mad * kMadToStd / std::sqrt(20.0);
}

double flicker(const VideoClip& clip, double threshold) {
  const VideoClip luma = to_luma(clip);
  double total = 0;
  for (std::size_t f = 1; f < luma.frames.size(); ++f) {
    const auto& prev = luma.frames[f - 1].data();
    const auto& cur = luma.frames[f].data();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      if (std::abs(static_cast<int>(cur[i]) - static_cast<int>(prev[i])) > threshold) {
        ++hits;
      }
    }
    total += static_cast<double>(hits) / static_cast<double>(cur.size());
  }
  return total / static_cast<double>(luma.frames.size() - 1);
}

double colourfulness(const Frame& rgb) {
  require_rgb(rgb, "colourfulness");
  const auto& d = rgb.data();
  const std::size_t pixels = d.size() / 3;
  std::vector<double> rg(pixels), yb(pixels);
  for (std::size_t i = 0; i < pixels; ++i) {
    const double r = d[i * 3 + 0], g = d[i * 3 + 1], b = d[i * 3 + 2];
    rg[i] = r - g;
    yb[i] = 0.5 * (r + g) - b;
  }
  const MeanStd srg = population_stats(rg);
  const MeanStd syb = population_stats(yb);
  return std::sqrt(srg.std * srg.std + syb.std * syb.std) +
         0.3 * std::sqrt(srg.mean * srg.mean + syb.mean * syb.mean);
}

double luminance(const Frame& rgb) {
  require_rgb(rgb, "luminance");
  const auto& d = rgb.data();
  const std::size_t pixels = d.size() / 3;
  double acc = 0;
  for (std::size_t i = 0; i < pixels; ++i) {
    acc += static_cast<double>(d[i * 3 + 0]) + d[i * 3 + 1] + d[i * 3 + 2];
  }
  return acc / static_cast<double>(pixels);
}

namespace {

double sobel_std(const Frame& luma) {
  const int w = luma.width();
  const int h = luma.height();
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(w - 2) * (h - 2));
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      auto p = [&](int dx, int dy) { return static_cast<double>(luma.at(x + dx, y + dy)); };
      const double gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) -
                        (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      const double gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) -
                        (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      mags.push_back(std::sqrt(gx * gx + gy * gy));
    }
  }
  return population_stats(mags).std;
}

}  // namespace

double spatial_information(const VideoClip& clip) {
  const VideoClip luma = to_luma(clip);
  double si = 0;
  for (const auto& frame : luma.frames) si = std::max(si, sobel_std(frame));
  return si;
}

double temporal_information(const VideoClip& clip) {
  const VideoClip luma = to_luma(clip);
  double ti = 0;
  for (std::size_t f = 1; f < luma.frames.size(); ++f) {
    const auto& prev = luma.frames[f - 1].data();
    const auto& cur = luma.frames[f].data();
    std::vector<double> diff(cur.size());
    for (std::size_t i = 0; i < cur.size(); ++i) {
      diff[i] = static_cast<double>(cur[i]) - static_cast<double>(prev[i]);
    }
    ti = std::max(ti, population_stats(diff).std);
  }
  return ti;
}

std::vector<std::size_t> sample_indices(std::size_t frame_count, FrameRate fps,
                                        FrameSampling sampling) {
  std::vector<std::size_t> indices;
  if (sampling == FrameSampling::all_frames) {
    indices.resize(frame_count);
    std::iota(indices.begin(), indices.end(), 0);
    return indices;
  }
  for (std::size_t k = 0;; ++k) {
    const std::size_t idx = static_cast<std::size_t>(
        (static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(fps.num)) /
        static_cast<std::uint64_t>(fps.den));
    if (idx >= frame_count) break;
    indices.push_back(idx);
  }
  if (indices.size() < 2 && frame_count >= 2) {
    indices.push_back(frame_count - 1);  // keep a temporal pair available
  }
  return indices;
}

MetricVector metric_vector(const VideoClip& clip, const MetricsConfig& config) {
  const auto indices = sample_indices(clip.frame_count(), clip.fps, config.sampling);

  std::vector<Frame> sampled;
  sampled.reserve(indices.size());
  for (std::size_t idx : indices) sampled.push_back(clip.frames[idx]);

  const bool has_color = clip.layout() == PixelLayout::rgb8;

  MetricVector out;
  double block_acc = 0, blur_acc = 0, contrast_acc = 0, noise_acc = 0, colour_acc = 0,
         lum_acc = 0;
  for (const auto& frame : sampled) {
    const Frame luma = to_luma(frame);
    block_acc += blockiness(luma, config.blockiness_block, config.blockiness_cap);
    blur_acc += cpbd_blur(luma, config.cpbd).value;
    contrast_acc += contrast(luma);
    noise_acc += noise_estimate(luma);
    if (has_color) {
      colour_acc += colourfulness(frame);
      lum_acc += luminance(frame);
    } else {
      // gray-equivalent rgb: zero opponent-axis spread, L = 3 * mean luma
      double mean = std::accumulate(luma.data().begin(), luma.data().end(), 0.0) /
                    static_cast<double>(luma.data().size());
      lum_acc += 3.0 * mean;
    }
  }
  const double n = static_cast<double>(sampled.size());
  out.blockiness = block_acc / n;
  out.blur = blur_acc / n;
  out.contrast = contrast_acc / n;
  out.noise = noise_acc / n;
  out.colourfulness = colour_acc / n;
  out.luminance = lum_acc / n;

  // sample_indices always yields at least two frames for a valid clip
  const VideoClip sampled_clip(sampled, clip.fps);
  out.flicker = flicker(sampled_clip, config.flicker_threshold);
  out.si = spatial_information(sampled_clip);
  out.ti = temporal_information(sampled_clip);

  out.validate();
  return out;
}

}  // namespace w2s
