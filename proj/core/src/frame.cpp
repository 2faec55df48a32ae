#include "w2s/frame.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace w2s {

std::string to_string(PixelLayout layout) {
  return layout == PixelLayout::rgb8 ? "rgb8" : "luma8";
}

PixelLayout pixel_layout_from_string(const std::string& token) {
  if (token == "rgb8") return PixelLayout::rgb8;
  if (token == "luma8") return PixelLayout::luma8;
  throw DomainError("unknown pixel layout '" + token + "'");
}

Frame::Frame(int width, int height, PixelLayout layout, std::vector<std::uint8_t> data)
    : width_(width), height_(height), layout_(layout), data_(std::move(data)) {
  if (width_ < kMinDimension || height_ < kMinDimension) {
    throw DomainError("frame size " + std::to_string(width_) + "x" + std::to_string(height_) +
                      " below minimum " + std::to_string(kMinDimension) + "x" +
                      std::to_string(kMinDimension));
  }
  const std::size_t expected =
      static_cast<std::size_t>(width_) * height_ * channel_count(layout_);
  if (data_.size() != expected) {
    throw DomainError("frame data length " + std::to_string(data_.size()) +
                      " does not match " + std::to_string(width_) + "x" +
                      std::to_string(height_) + "x" +
                      std::to_string(channel_count(layout_)) + " = " +
                      std::to_string(expected));
  }
}

Frame Frame::filled(int width, int height, PixelLayout layout, std::uint8_t value) {
  std::vector<std::uint8_t> data(
      static_cast<std::size_t>(width) * height * channel_count(layout), value);
  return Frame(width, height, layout, std::move(data));
}

VideoClip::VideoClip(std::vector<Frame> frames_in, FrameRate fps_in)
    : frames(std::move(frames_in)), fps(fps_in) {
  if (fps.num <= 0 || fps.den <= 0) {
    throw DomainError("frame rate must be a positive rational, got " +
                      std::to_string(fps.num) + ":" + std::to_string(fps.den));
  }
  if (frames.size() < 2) {
    throw DomainError("clip needs at least 2 frames, got " + std::to_string(frames.size()));
  }
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!frames[i].same_geometry(frames[0])) {
      throw DomainError("frame " + std::to_string(i) + " geometry/layout differs from frame 0");
    }
  }
}

Frame to_luma(const Frame& frame) {
  if (frame.layout() == PixelLayout::luma8) return frame;
  const auto& src = frame.data();
  std::vector<std::uint8_t> out(static_cast<std::size_t>(frame.width()) * frame.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = src[i * 3 + 0];
    const double g = src[i * 3 + 1];
    const double b = src[i * 3 + 2];
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    out[i] = static_cast<std::uint8_t>(std::lround(y));
  }
  return Frame(frame.width(), frame.height(), PixelLayout::luma8, std::move(out));
}

VideoClip to_luma(const VideoClip& clip) {
  if (clip.layout() == PixelLayout::luma8) return clip;
  std::vector<Frame> frames;
  frames.reserve(clip.frames.size());
  for (const auto& f : clip.frames) frames.push_back(to_luma(f));
  return VideoClip(std::move(frames), clip.fps);
}

double luma_psnr(const VideoClip& reference, const VideoClip& degraded) {
  if (reference.frame_count() != degraded.frame_count() ||
      reference.width() != degraded.width() || reference.height() != degraded.height()) {
    throw DomainError("luma_psnr requires matching geometry and frame count");
  }
  const VideoClip a = to_luma(reference);
  const VideoClip b = to_luma(degraded);
  double sq = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 0; f < a.frames.size(); ++f) {
    const auto& da = a.frames[f].data();
    const auto& db = b.frames[f].data();
    for (std::size_t i = 0; i < da.size(); ++i) {
      const double d = static_cast<double>(da[i]) - static_cast<double>(db[i]);
      sq += d * d;
    }
    n += da.size();
  }
  const double mse = sq / static_cast<double>(n);
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace {
constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

void fnv_mix(std::uint64_t& h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (i * 8)) & 0xffULL;
    h *= kFnvPrime;
  }
}
}  // namespace

std::uint64_t clip_digest(const VideoClip& clip) {
  std::uint64_t h = kFnvOffset;
  fnv_mix(h, static_cast<std::uint64_t>(clip.width()));
  fnv_mix(h, static_cast<std::uint64_t>(clip.height()));
  fnv_mix(h, static_cast<std::uint64_t>(clip.layout() == PixelLayout::rgb8 ? 3 : 1));
  fnv_mix(h, static_cast<std::uint64_t>(clip.fps.num));
  fnv_mix(h, static_cast<std::uint64_t>(clip.fps.den));
  for (const auto& f : clip.frames) {
    for (std::uint8_t byte : f.data()) {
      h ^= byte;
      h *= kFnvPrime;
    }
  }
  return h;
}

std::string clip_digest_hex(const VideoClip& clip) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(clip_digest(clip)));
  return std::string(buf);
}

}  // namespace w2s
