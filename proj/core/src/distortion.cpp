#include "w2s/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace w2s {

namespace {

constexpr std::array<int, 5> kResizeFactors = {2, 3, 4, 8, 16};
constexpr std::array<double, 5> kGblurSigmas = {0.1, 0.5, 1.0, 2.0, 5.0};
constexpr std::array<double, 5> kGnoiseSigmas = {0.001, 0.002, 0.003, 0.005, 0.01};
constexpr std::array<double, 5> kDarken = {0.05, 0.1, 0.2, 0.4, 0.8};
constexpr std::array<double, 5> kBrighten = {0.1, 0.2, 0.4, 0.7, 1.1};
constexpr std::array<int, 3> kJitterShift = {2, 4, 8};
constexpr std::array<double, 3> kJitterCrop = {0.02, 0.04, 0.08};
constexpr std::array<double, 3> kStutterRate = {0.1, 0.25, 0.5};
constexpr std::array<int, 4> kH264Crf = {24, 36, 48, 63};
constexpr std::array<int, 4> kH265Crf = {36, 40, 44, 48};

const std::array<std::string, 9> kFamilyNames = {"resize", "gblur",   "gnoise",
                                                 "darken", "brighten", "jitter",
                                                 "stutter", "h264",    "h265"};

std::uint8_t clamp_u8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

// Planar double image used for intermediates that may be smaller than the
// Frame minimum size.
struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int w_, int h_) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_, 0.0) {}
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
};

std::vector<Plane> frame_planes(const Frame& frame) {
  std::vector<Plane> planes(frame.channels(), Plane(frame.width(), frame.height()));
  const auto& d = frame.data();
  const int c = frame.channels();
  for (int y = 0; y < frame.height(); ++y) {
    for (int x = 0; x < frame.width(); ++x) {
      for (int ch = 0; ch < c; ++ch) {
        planes[ch].at(x, y) = d[(static_cast<std::size_t>(y) * frame.width() + x) * c + ch];
      }
    }
  }
  return planes;
}

Frame planes_to_frame(const std::vector<Plane>& planes, PixelLayout layout) {
  const int w = planes[0].w, h = planes[0].h;
  const int c = channel_count(layout);
  std::vector<std::uint8_t> data(static_cast<std::size_t>(w) * h * c);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        data[(static_cast<std::size_t>(y) * w + x) * c + ch] = clamp_u8(planes[ch].at(x, y));
      }
    }
  }
  return Frame(w, h, layout, std::move(data));
}

double sample_bilinear(const Plane& p, double x, double y) {
  const double cx = std::clamp(x, 0.0, static_cast<double>(p.w - 1));
  const double cy = std::clamp(y, 0.0, static_cast<double>(p.h - 1));
  const int x0 = static_cast<int>(cx);
  const int y0 = static_cast<int>(cy);
  const int x1 = std::min(x0 + 1, p.w - 1);
  const int y1 = std::min(y0 + 1, p.h - 1);
  const double fx = cx - x0, fy = cy - y0;
  return (1 - fx) * (1 - fy) * p.at(x0, y0) + fx * (1 - fy) * p.at(x1, y0) +
         (1 - fx) * fy * p.at(x0, y1) + fx * fy * p.at(x1, y1);
}

Plane resize_plane(const Plane& src, int dst_w, int dst_h) {
  Plane dst(dst_w, dst_h);
  const double sx = static_cast<double>(src.w) / dst_w;
  const double sy = static_cast<double>(src.h) / dst_h;
  for (int y = 0; y < dst_h; ++y) {
    for (int x = 0; x < dst_w; ++x) {
      dst.at(x, y) = sample_bilinear(src, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
    }
  }
  return dst;
}

Plane gaussian_blur_plane(const Plane& src, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[static_cast<std::size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += kernel[static_cast<std::size_t>(i + radius)];
  }
  for (double& k : kernel) k /= sum;

  Plane tmp(src.w, src.h), dst(src.w, src.h);
  for (int y = 0; y < src.h; ++y) {
    for (int x = 0; x < src.w; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i + radius)] *
               src.at(std::clamp(x + i, 0, src.w - 1), y);
      }
      tmp.at(x, y) = acc;
    }
  }
  for (int y = 0; y < src.h; ++y) {
    for (int x = 0; x < src.w; ++x) {
      double acc = 0;
      for (int i = -radius; i <= radius; ++i) {
        acc += kernel[static_cast<std::size_t>(i + radius)] *
               tmp.at(x, std::clamp(y + i, 0, src.h - 1));
      }
      dst.at(x, y) = acc;
    }
  }
  return dst;
}

using FrameOp = Frame (*)(const Frame&, double, std::mt19937_64&);

VideoClip map_frames(const VideoClip& clip, double param, std::uint64_t seed, FrameOp op) {
  std::mt19937_64 rng(seed);
  std::vector<Frame> frames;
  frames.reserve(clip.frames.size());
  for (const auto& f : clip.frames) frames.push_back(op(f, param, rng));
  return VideoClip(std::move(frames), clip.fps);
}

Frame resize_frame(const Frame& frame, double factor, std::mt19937_64&) {
  auto planes = frame_planes(frame);
  const int dw = std::max(1, static_cast<int>(std::lround(frame.width() / factor)));
  const int dh = std::max(1, static_cast<int>(std::lround(frame.height() / factor)));
  for (auto& p : planes) p = resize_plane(resize_plane(p, dw, dh), frame.width(), frame.height());
  return planes_to_frame(planes, frame.layout());
}

Frame gblur_frame(const Frame& frame, double sigma, std::mt19937_64&) {
  auto planes = frame_planes(frame);
  for (auto& p : planes) p = gaussian_blur_plane(p, sigma);
  return planes_to_frame(planes, frame.layout());
}

Frame gnoise_frame(const Frame& frame, double sigma_unit, std::mt19937_64& rng) {
  auto planes = frame_planes(frame);
  std::normal_distribution<double> noise(0.0, sigma_unit);
  for (auto& p : planes) {
    for (double& v : p.v) v = std::clamp(v / 255.0 + noise(rng), 0.0, 1.0) * 255.0;
  }
  return planes_to_frame(planes, frame.layout());
}

// Full-range BT.601 luma adjustment with chroma preserved.
Frame adjust_luma(const Frame& frame, double (*curve)(double, double), double p) {
  if (frame.layout() == PixelLayout::luma8) {
    std::vector<std::uint8_t> data(frame.data().size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      data[i] = clamp_u8(curve(frame.data()[i], p));
    }
    return Frame(frame.width(), frame.height(), PixelLayout::luma8, std::move(data));
  }
  const auto& d = frame.data();
  std::vector<std::uint8_t> out(d.size());
  for (std::size_t i = 0; i < d.size(); i += 3) {
    const double r = d[i], g = d[i + 1], b = d[i + 2];
    const double y = 0.299 * r + 0.587 * g + 0.114 * b;
    const double cb = -0.168736 * r - 0.331264 * g + 0.5 * b;
    const double cr = 0.5 * r - 0.418688 * g - 0.081312 * b;
    const double y2 = curve(y, p);
    out[i] = clamp_u8(y2 + 1.402 * cr);
    out[i + 1] = clamp_u8(y2 - 0.344136 * cb - 0.714136 * cr);
    out[i + 2] = clamp_u8(y2 + 1.772 * cb);
  }
  return Frame(frame.width(), frame.height(), PixelLayout::rgb8, std::move(out));
}

double darken_curve(double y, double p) { return y * (1.0 - p); }
double brighten_curve(double y, double p) { return 255.0 - (255.0 - y) / (1.0 + p); }

Frame jitter_frame(const Frame& frame, int max_shift, double crop_margin,
                   std::mt19937_64& rng) {
  std::uniform_int_distribution<int> shift(-max_shift, max_shift);
  const int dx = shift(rng);
  const int dy = shift(rng);
  const int mx = std::max(1, static_cast<int>(std::lround(crop_margin * frame.width())));
  const int my = std::max(1, static_cast<int>(std::lround(crop_margin * frame.height())));

  auto planes = frame_planes(frame);
  for (auto& p : planes) {
    // translate with border replication
    Plane shifted(p.w, p.h);
    for (int y = 0; y < p.h; ++y) {
      for (int x = 0; x < p.w; ++x) {
        shifted.at(x, y) = p.at(std::clamp(x - dx, 0, p.w - 1), std::clamp(y - dy, 0, p.h - 1));
      }
    }
    // crop the margins and stretch back
    Plane cropped(p.w - 2 * mx, p.h - 2 * my);
    for (int y = 0; y < cropped.h; ++y) {
      for (int x = 0; x < cropped.w; ++x) {
        cropped.at(x, y) = shifted.at(x + mx, y + my);
      }
    }
    p = resize_plane(cropped, frame.width(), frame.height());
  }
  return planes_to_frame(planes, frame.layout());
}

}  // namespace

std::string to_string(DistortionFamily family) {
  return kFamilyNames[static_cast<std::size_t>(family)];
}

DistortionFamily distortion_family_from_string(const std::string& token) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
    if (kFamilyNames[i] == token) return static_cast<DistortionFamily>(i);
  }
  throw DomainError("unknown distortion family '" + token + "'");
}

int level_count(DistortionFamily family) {
  switch (family) {
    case DistortionFamily::resize:
    case DistortionFamily::gblur:
    case DistortionFamily::gnoise:
    case DistortionFamily::darken:
    case DistortionFamily::brighten:
      return 5;
    case DistortionFamily::jitter:
    case DistortionFamily::stutter:
      return 3;
    case DistortionFamily::h264:
    case DistortionFamily::h265:
      return 4;
  }
  return 0;
}

bool is_stochastic(DistortionFamily family) {
  return family == DistortionFamily::gnoise || family == DistortionFamily::jitter ||
         family == DistortionFamily::stutter;
}

std::span<const int> resize_factors() { return kResizeFactors; }
std::span<const double> gblur_sigmas() { return kGblurSigmas; }
std::span<const double> gnoise_sigmas() { return kGnoiseSigmas; }
std::span<const double> darken_strengths() { return kDarken; }
std::span<const double> brighten_strengths() { return kBrighten; }
std::span<const int> jitter_max_shifts() { return kJitterShift; }
std::span<const double> jitter_crop_margins() { return kJitterCrop; }
std::span<const double> stutter_drop_rates() { return kStutterRate; }
std::span<const int> h264_crf_grid() { return kH264Crf; }
std::span<const int> h265_crf_grid() { return kH265Crf; }

std::string codec_preset(DistortionFamily family) {
  if (family == DistortionFamily::h264) return "fast";
  if (family == DistortionFamily::h265) return "veryslow";
  throw DomainError("preset is only defined for compression families");
}

void DistortionSpec::validate() const {
  const int levels = level_count(family);
  if (level < 1 || level > levels) {
    throw DomainError("level " + std::to_string(level) + " outside grid of " +
                      to_string(family) + " (1.." + std::to_string(levels) + ")");
  }
}

DistortionSpec parse_distortion_spec(const std::string& text) {
  const auto first = text.find(':');
  if (first == std::string::npos) {
    throw DomainError("distortion spec '" + text + "' is not family:level[:seed]");
  }
  const auto second = text.find(':', first + 1);
  DistortionSpec spec;
  spec.family = distortion_family_from_string(text.substr(0, first));
  try {
    spec.level = std::stoi(text.substr(first + 1, second - first - 1));
    if (second != std::string::npos) {
      spec.seed = std::stoull(text.substr(second + 1));
    }
  } catch (const std::exception&) {
    throw DomainError("cannot parse level/seed in distortion spec '" + text + "'");
  }
  spec.validate();
  return spec;
}

std::string to_string(const DistortionSpec& spec) {
  return to_string(spec.family) + ":" + std::to_string(spec.level) + ":" +
         std::to_string(spec.seed);
}

VideoClip apply_stutter(const VideoClip& clip, double drop_rate, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<Frame> frames;
  frames.reserve(clip.frames.size());
  frames.push_back(clip.frames[0]);
  for (std::size_t t = 1; t < clip.frames.size(); ++t) {
    if (uniform(rng) < drop_rate) {
      frames.push_back(frames[t - 1]);  // freeze: carry the previous output frame
    } else {
      frames.push_back(clip.frames[t]);
    }
  }
  return VideoClip(std::move(frames), clip.fps);
}

VideoClip apply(const VideoClip& clip, const DistortionSpec& spec,
                const DistortionContext* ctx) {
  spec.validate();
  const std::size_t idx = static_cast<std::size_t>(spec.level - 1);
  switch (spec.family) {
    case DistortionFamily::resize:
      return map_frames(clip, kResizeFactors[idx], spec.seed, &resize_frame);
    case DistortionFamily::gblur:
      return map_frames(clip, kGblurSigmas[idx], spec.seed, &gblur_frame);
    case DistortionFamily::gnoise:
      return map_frames(clip, kGnoiseSigmas[idx], spec.seed, &gnoise_frame);
    case DistortionFamily::darken: {
      std::vector<Frame> frames;
      frames.reserve(clip.frames.size());
      for (const auto& f : clip.frames) {
        frames.push_back(adjust_luma(f, &darken_curve, kDarken[idx]));
      }
      return VideoClip(std::move(frames), clip.fps);
    }
    case DistortionFamily::brighten: {
      std::vector<Frame> frames;
      frames.reserve(clip.frames.size());
      for (const auto& f : clip.frames) {
        frames.push_back(adjust_luma(f, &brighten_curve, kBrighten[idx]));
      }
      return VideoClip(std::move(frames), clip.fps);
    }
    case DistortionFamily::jitter: {
      std::mt19937_64 rng(spec.seed);
      std::vector<Frame> frames;
      frames.reserve(clip.frames.size());
      for (const auto& f : clip.frames) {
        frames.push_back(jitter_frame(f, kJitterShift[idx], kJitterCrop[idx], rng));
      }
      return VideoClip(std::move(frames), clip.fps);
    }
    case DistortionFamily::stutter:
      return apply_stutter(clip, kStutterRate[idx], spec.seed);
    case DistortionFamily::h264:
    case DistortionFamily::h265: {
      if (ctx == nullptr) {
        throw EnvironmentError("compression distortions need a DistortionContext with an "
                               "encoder template");
      }
      const Codec codec =
          spec.family == DistortionFamily::h264 ? Codec::h264 : Codec::h265;
      const auto& grid = spec.family == DistortionFamily::h264 ? kH264Crf : kH265Crf;
      return encode_roundtrip(clip, codec, grid[idx], codec_preset(spec.family),
                              ctx->encoder, ctx->scratch_dir);
    }
  }
  throw DomainError("unhandled distortion family");
}

std::vector<VideoClip> severity_ladder(const VideoClip& clip, DistortionFamily family,
                                       std::uint64_t seed, const DistortionContext* ctx) {
  std::vector<VideoClip> ladder;
  const int levels = level_count(family);
  ladder.reserve(static_cast<std::size_t>(levels));
  for (int level = 1; level <= levels; ++level) {
    ladder.push_back(apply(clip, DistortionSpec{family, level, seed}, ctx));
  }
  return ladder;
}

}  // namespace w2s
