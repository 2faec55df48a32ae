#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "w2s/encoder.hpp"
#include "w2s/frame.hpp"

namespace w2s {

enum class DistortionFamily {
  resize,
  gblur,
  gnoise,
  darken,
  brighten,
  jitter,
  stutter,
  h264,
  h265,
};

inline constexpr std::array<DistortionFamily, 9> kAllFamilies = {
    DistortionFamily::resize, DistortionFamily::gblur,   DistortionFamily::gnoise,
    DistortionFamily::darken, DistortionFamily::brighten, DistortionFamily::jitter,
    DistortionFamily::stutter, DistortionFamily::h264,    DistortionFamily::h265};

std::string to_string(DistortionFamily family);
DistortionFamily distortion_family_from_string(const std::string& token);

/// Number of severity levels in the family's parameter grid.
int level_count(DistortionFamily family);

/// Whether the family draws random numbers (jitter, stutter, gnoise).
bool is_stochastic(DistortionFamily family);

// Severity grids, level index 1-based.
std::span<const int> resize_factors();          // {2, 3, 4, 8, 16}
std::span<const double> gblur_sigmas();         // {0.1, 0.5, 1, 2, 5}
std::span<const double> gnoise_sigmas();        // unit-scale {0.001 .. 0.01}
std::span<const double> darken_strengths();     // {0.05, 0.1, 0.2, 0.4, 0.8}
std::span<const double> brighten_strengths();   // {0.1, 0.2, 0.4, 0.7, 1.1}
std::span<const int> jitter_max_shifts();       // {2, 4, 8} pixels
std::span<const double> jitter_crop_margins();  // {0.02, 0.04, 0.08}
std::span<const double> stutter_drop_rates();   // {0.1, 0.25, 0.5}
std::span<const int> h264_crf_grid();           // {24, 36, 48, 63}, preset fast
std::span<const int> h265_crf_grid();           // {36, 40, 44, 48}, preset veryslow

std::string codec_preset(DistortionFamily family);

struct DistortionSpec {
  DistortionFamily family;
  int level = 1;  // 1-based severity index
  std::uint64_t seed = 0;

  void validate() const;
};

/// "family:level:seed" (seed optional, defaults to 0), e.g. "gblur:3:42".
DistortionSpec parse_distortion_spec(const std::string& text);
std::string to_string(const DistortionSpec& spec);

/// External-encoder context, needed only by the h264/h265 families.
struct DistortionContext {
  EncoderInvocation encoder;
  std::filesystem::path scratch_dir;
};

/// Applies one distortion. Output preserves geometry, frame count and fps.
/// Compression families return luma8 content and require `ctx`.
VideoClip apply(const VideoClip& clip, const DistortionSpec& spec,
                const DistortionContext* ctx = nullptr);

/// Clips for every level of the family, level order preserved.
std::vector<VideoClip> severity_ladder(const VideoClip& clip, DistortionFamily family,
                                       std::uint64_t seed,
                                       const DistortionContext* ctx = nullptr);

/// Stutter with an explicit drop rate (test hook for p_d outside the grid).
VideoClip apply_stutter(const VideoClip& clip, double drop_rate, std::uint64_t seed);

}  // namespace w2s
