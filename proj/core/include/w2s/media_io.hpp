#pragma once

#include <filesystem>

#include "w2s/frame.hpp"

namespace w2s {

enum class ClipFormat {
  y4m,         // YUV4MPEG2, luma transport (chroma written neutral, ignored on read)
  raw_planar,  // raw planes + JSON sidecar header at <path>.json
};

/// Picks the format from the file extension (.y4m -> y4m, anything else raw).
ClipFormat guess_clip_format(const std::filesystem::path& path);

/// Loads a clip. Pixel values are preserved bit-exactly for both formats;
/// y4m yields luma8 clips (the chroma planes of C420/C444 input are dropped).
VideoClip load_clip(const std::filesystem::path& path, ClipFormat format);
VideoClip load_clip(const std::filesystem::path& path);

/// Writes a clip. y4m accepts luma8 only (convert rgb8 first or use
/// raw_planar, which stores any layout losslessly).
void save_clip(const VideoClip& clip, const std::filesystem::path& path, ClipFormat format);
void save_clip(const VideoClip& clip, const std::filesystem::path& path);

}  // namespace w2s
