#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "w2s/error.hpp"

namespace w2s {

enum class PixelLayout : std::uint8_t {
  rgb8,   // interleaved R,G,B, one byte each
  luma8,  // single plane
};

inline int channel_count(PixelLayout layout) {
  return layout == PixelLayout::rgb8 ? 3 : 1;
}

std::string to_string(PixelLayout layout);
PixelLayout pixel_layout_from_string(const std::string& token);

/// Positive rational frame rate (y4m style num:den).
struct FrameRate {
  std::int64_t num = 25;
  std::int64_t den = 1;

  double hertz() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const FrameRate&) const = default;
};

/// One immutable raster. Minimum size is 16x16 so that 8x8 block analysis
/// always sees at least two blocks per axis.
class Frame {
 public:
  static constexpr int kMinDimension = 16;

  Frame(int width, int height, PixelLayout layout, std::vector<std::uint8_t> data);

  /// Frame with every sample set to `value`.
  static Frame filled(int width, int height, PixelLayout layout, std::uint8_t value);

  int width() const { return width_; }
  int height() const { return height_; }
  PixelLayout layout() const { return layout_; }
  int channels() const { return channel_count(layout_); }
  const std::vector<std::uint8_t>& data() const { return data_; }

  std::uint8_t at(int x, int y, int channel = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels() + channel];
  }

  bool same_geometry(const Frame& other) const {
    return width_ == other.width_ && height_ == other.height_ && layout_ == other.layout_;
  }
  bool operator==(const Frame&) const = default;

 private:
  int width_;
  int height_;
  PixelLayout layout_;
  std::vector<std::uint8_t> data_;
};

/// Ordered frames plus a frame rate. At least two frames (temporal metrics
/// need a successor frame); all frames share geometry and layout.
struct VideoClip {
  std::vector<Frame> frames;
  FrameRate fps;

  VideoClip(std::vector<Frame> frames_in, FrameRate fps_in);

  int width() const { return frames.front().width(); }
  int height() const { return frames.front().height(); }
  PixelLayout layout() const { return frames.front().layout(); }
  std::size_t frame_count() const { return frames.size(); }

  bool operator==(const VideoClip&) const = default;
};

/// ITU-R BT.601 luma, rounded to nearest integer. Identity on luma8 input.
Frame to_luma(const Frame& frame);
VideoClip to_luma(const VideoClip& clip);

/// Mean-luma PSNR in dB over all frames; +infinity for identical content.
/// Clips must share geometry and frame count.
double luma_psnr(const VideoClip& reference, const VideoClip& degraded);

/// FNV-1a digest over geometry, layout, fps and all pixel bytes.
std::uint64_t clip_digest(const VideoClip& clip);
std::string clip_digest_hex(const VideoClip& clip);

}  // namespace w2s
