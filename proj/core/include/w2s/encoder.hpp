#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "w2s/frame.hpp"

namespace w2s {

enum class Codec { h264, h265 };

std::string to_string(Codec codec);
Codec codec_from_string(const std::string& token);

/// Inclusive CRF range accepted for a codec.
struct CrfRange {
  int lo;
  int hi;
};
CrfRange codec_crf_range(Codec codec);

/// How to call the external encoder. `command_template` is split on
/// whitespace and the placeholders {input}, {output}, {crf}, {preset} and
/// {codec} are substituted per token. The invoked program must read the
/// {input} y4m and write an already-decoded y4m to {output} (for ffmpeg, a
/// two-step wrapper script does this; see README).
struct EncoderInvocation {
  std::string command_template;
};

/// Name of the environment variable that overrides the configured template.
inline constexpr const char* kEncoderEnvVar = "W2S_ENCODER";

/// Template resolution order: W2S_ENCODER, then `configured`.
/// Throws EnvironmentError with a remediation hint when neither is set.
EncoderInvocation resolve_encoder(const std::optional<std::string>& configured);

/// Runs the clip through the external encoder and returns the decoded
/// result. Geometry, frame count and fps are preserved; rgb8 input is
/// converted to luma first (the y4m bridge is a luma transport).
/// Invocations are serialized per output path.
VideoClip encode_roundtrip(const VideoClip& clip, Codec codec, int crf,
                           const std::string& preset, const EncoderInvocation& encoder,
                           const std::filesystem::path& scratch_dir = {});

}  // namespace w2s
