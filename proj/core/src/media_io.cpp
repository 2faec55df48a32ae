#include "w2s/media_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace w2s {

namespace {

struct Y4mHeader {
  int width = 0;
  int height = 0;
  FrameRate fps;
  std::string colorspace = "420";  // normalized: "420", "444", "mono"
};

std::string normalize_colorspace(const std::string& tag, std::size_t offset) {
  if (tag == "mono") return "mono";
  if (tag == "444") return "444";
  if (tag.rfind("420", 0) == 0) return "420";  // 420, 420jpeg, 420mpeg2, 420paldv
  throw ParseError("unsupported y4m colorspace C" + tag, offset);
}

Y4mHeader parse_y4m_header(const std::string& line, std::size_t line_start) {
  Y4mHeader h;
  std::istringstream in(line);
  std::string token;
  if (!(in >> token) || token != "YUV4MPEG2") {
    throw ParseError("missing YUV4MPEG2 signature", line_start);
  }
  bool have_w = false, have_h = false, have_f = false;
  std::size_t consumed = token.size();
  while (in >> token) {
    consumed += 1 + token.size();
    const std::size_t offset = line_start + consumed - token.size();
    if (token.size() < 2 && token[0] != 'I') {
      throw ParseError("truncated y4m header tag '" + token + "'", offset);
    }
    const char key = token[0];
    const std::string value = token.substr(1);
    try {
      switch (key) {
        case 'W':
          h.width = std::stoi(value);
          have_w = true;
          break;
        case 'H':
          h.height = std::stoi(value);
          have_h = true;
          break;
        case 'F': {
          const auto colon = value.find(':');
          if (colon == std::string::npos) {
            throw ParseError("frame rate tag F" + value + " is not num:den", offset);
          }
          h.fps.num = std::stoll(value.substr(0, colon));
          h.fps.den = std::stoll(value.substr(colon + 1));
          have_f = true;
          break;
        }
        case 'C':
          h.colorspace = normalize_colorspace(value, offset);
          break;
        case 'I':
        case 'A':
        case 'X':
          break;  // interlacing, aspect and comments are accepted and ignored
        default:
          throw ParseError("unknown y4m header tag '" + token + "'", offset);
      }
    } catch (const std::invalid_argument&) {
      throw ParseError("non-numeric value in y4m tag '" + token + "'", offset);
    } catch (const std::out_of_range&) {
      throw ParseError("out-of-range value in y4m tag '" + token + "'", offset);
    }
  }
  if (!have_w || !have_h || !have_f) {
    throw ParseError("y4m header missing required W/H/F tags", line_start);
  }
  if (h.width <= 0 || h.height <= 0) {
    throw ParseError("non-positive y4m frame size", line_start);
  }
  return h;
}

std::size_t chroma_bytes(const Y4mHeader& h) {
  if (h.colorspace == "mono") return 0;
  const std::size_t luma = static_cast<std::size_t>(h.width) * h.height;
  if (h.colorspace == "444") return 2 * luma;
  // 420: two quarter-size planes
  return 2 * static_cast<std::size_t>((h.width + 1) / 2) * ((h.height + 1) / 2);
}

VideoClip load_y4m(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

  std::string header_line;
  if (!std::getline(in, header_line) || header_line.empty()) {
    throw ParseError("empty or unreadable y4m stream in '" + path.string() + "'", 0);
  }
  const Y4mHeader header = parse_y4m_header(header_line, 0);
  std::size_t offset = header_line.size() + 1;

  const std::size_t luma_size = static_cast<std::size_t>(header.width) * header.height;
  const std::size_t skip = chroma_bytes(header);

  std::vector<Frame> frames;
  std::string frame_line;
  while (std::getline(in, frame_line)) {
    const std::size_t frame_start = offset;
    offset += frame_line.size() + 1;
    if (frame_line.rfind("FRAME", 0) != 0) {
      throw ParseError("expected FRAME marker in '" + path.string() + "'", frame_start);
    }
    std::vector<std::uint8_t> luma(luma_size);
    in.read(reinterpret_cast<char*>(luma.data()), static_cast<std::streamsize>(luma_size));
    if (static_cast<std::size_t>(in.gcount()) != luma_size) {
      throw ParseError("truncated frame " + std::to_string(frames.size()) + " in '" +
                           path.string() + "': expected " + std::to_string(luma_size) +
                           " luma bytes, got " + std::to_string(in.gcount()),
                       offset);
    }
    offset += luma_size;
    if (skip > 0) {
      in.ignore(static_cast<std::streamsize>(skip));
      if (static_cast<std::size_t>(in.gcount()) != skip) {
        throw ParseError("truncated chroma in frame " + std::to_string(frames.size()) +
                             " of '" + path.string() + "'",
                         offset);
      }
      offset += skip;
    }
    frames.push_back(Frame(header.width, header.height, PixelLayout::luma8, std::move(luma)));
  }
  return VideoClip(std::move(frames), header.fps);
}

void save_y4m(const VideoClip& clip, const std::filesystem::path& path) {
  if (clip.layout() != PixelLayout::luma8) {
    throw DomainError("y4m output is a luma transport; convert the clip with to_luma() "
                      "or use the raw_planar format");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");

  const bool even = clip.width() % 2 == 0 && clip.height() % 2 == 0;
  const std::string colorspace = even ? "C420jpeg" : "C444";
  out << "YUV4MPEG2 W" << clip.width() << " H" << clip.height() << " F" << clip.fps.num
      << ":" << clip.fps.den << " Ip A1:1 " << colorspace << "\n";

  const std::size_t chroma_plane =
      even ? static_cast<std::size_t>(clip.width() / 2) * (clip.height() / 2)
           : static_cast<std::size_t>(clip.width()) * clip.height();
  const std::vector<char> neutral(chroma_plane, static_cast<char>(0x80));
  for (const auto& frame : clip.frames) {
    out << "FRAME\n";
    out.write(reinterpret_cast<const char*>(frame.data().data()),
              static_cast<std::streamsize>(frame.data().size()));
    out.write(neutral.data(), static_cast<std::streamsize>(neutral.size()));
    out.write(neutral.data(), static_cast<std::streamsize>(neutral.size()));
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".json");
}

VideoClip load_raw(const std::filesystem::path& path) {
  std::ifstream meta_in(sidecar_path(path));
  if (!meta_in) {
    throw IoError("missing sidecar header '" + sidecar_path(path).string() + "'");
  }
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid sidecar JSON for '" + path.string() + "': " + e.what(), 0);
  }
  if (meta.value("format", "") != "w2s-raw-v1") {
    throw ParseError("sidecar for '" + path.string() + "' is not w2s-raw-v1", 0);
  }
  const int width = meta.at("width").get<int>();
  const int height = meta.at("height").get<int>();
  const PixelLayout layout = pixel_layout_from_string(meta.at("layout").get<std::string>());
  const FrameRate fps{meta.at("fps").at(0).get<std::int64_t>(),
                      meta.at("fps").at(1).get<std::int64_t>()};
  const std::size_t frame_count = meta.at("frames").get<std::size_t>();

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  const std::size_t frame_bytes =
      static_cast<std::size_t>(width) * height * channel_count(layout);

  std::vector<Frame> frames;
  frames.reserve(frame_count);
  for (std::size_t f = 0; f < frame_count; ++f) {
    std::vector<std::uint8_t> data(frame_bytes);
    in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(frame_bytes));
    if (static_cast<std::size_t>(in.gcount()) != frame_bytes) {
      throw ParseError("truncated frame " + std::to_string(f) + " in '" + path.string() + "'",
                       f * frame_bytes + static_cast<std::size_t>(in.gcount()));
    }
    frames.push_back(Frame(width, height, layout, std::move(data)));
  }
  return VideoClip(std::move(frames), fps);
}

void save_raw(const VideoClip& clip, const std::filesystem::path& path) {
  nlohmann::json meta{{"format", "w2s-raw-v1"},
                      {"width", clip.width()},
                      {"height", clip.height()},
                      {"layout", to_string(clip.layout())},
                      {"fps", {clip.fps.num, clip.fps.den}},
                      {"frames", clip.frame_count()}};
  std::ofstream meta_out(sidecar_path(path), std::ios::trunc);
  if (!meta_out) {
    throw IoError("cannot open '" + sidecar_path(path).string() + "' for writing");
  }
  meta_out << meta.dump(2) << "\n";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (const auto& frame : clip.frames) {
    out.write(reinterpret_cast<const char*>(frame.data().data()),
              static_cast<std::streamsize>(frame.data().size()));
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

ClipFormat guess_clip_format(const std::filesystem::path& path) {
  return path.extension() == ".y4m" ? ClipFormat::y4m : ClipFormat::raw_planar;
}

VideoClip load_clip(const std::filesystem::path& path, ClipFormat format) {
  return format == ClipFormat::y4m ? load_y4m(path) : load_raw(path);
}

VideoClip load_clip(const std::filesystem::path& path) {
  return load_clip(path, guess_clip_format(path));
}

void save_clip(const VideoClip& clip, const std::filesystem::path& path, ClipFormat format) {
  if (format == ClipFormat::y4m) {
    save_y4m(clip, path);
  } else {
    save_raw(clip, path);
  }
}

void save_clip(const VideoClip& clip, const std::filesystem::path& path) {
  save_clip(clip, path, guess_clip_format(path));
}

}  // namespace w2s
