#include "w2s/encoder.hpp"

#include <atomic>
#include <cstdlib>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "w2s/error.hpp"
#include "w2s/media_io.hpp"
#include "w2s/subprocess.hpp"

namespace w2s {

std::string to_string(Codec codec) {
  return codec == Codec::h264 ? "h264" : "h265";
}

Codec codec_from_string(const std::string& token) {
  if (token == "h264") return Codec::h264;
  if (token == "h265") return Codec::h265;
  throw DomainError("unknown codec '" + token + "'");
}

CrfRange codec_crf_range(Codec codec) {
  // h264 admits the wide ladder ending at 63; h265 uses the standard 0..51.
  return codec == Codec::h264 ? CrfRange{0, 63} : CrfRange{0, 51};
}

EncoderInvocation resolve_encoder(const std::optional<std::string>& configured) {
  if (const char* env = std::getenv(kEncoderEnvVar); env != nullptr && *env != '\0') {
    return EncoderInvocation{env};
  }
  if (configured.has_value() && !configured->empty()) {
    return EncoderInvocation{*configured};
  }
  throw EnvironmentError(
      "no encoder configured: set the W2S_ENCODER environment variable or the "
      "paths.encoder_template config key to a command template with {input} {output} "
      "{crf} {preset} placeholders (e.g. \"w2s-refenc --codec {codec} --crf {crf} "
      "--preset {preset} --in {input} --out {output}\")");
}

namespace {

std::vector<std::string> split_template(const std::string& tmpl) {
  std::istringstream in(tmpl);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

void substitute(std::string& token, const std::string& key, const std::string& value) {
  for (std::size_t pos = token.find(key); pos != std::string::npos;
       pos = token.find(key, pos + value.size())) {
    token.replace(pos, key.size(), value);
  }
}

// One mutex per output path; a single registry lock guards the map itself.
std::mutex& path_mutex(const std::filesystem::path& p) {
  static std::mutex registry_lock;
  static std::map<std::string, std::unique_ptr<std::mutex>> registry;
  std::lock_guard<std::mutex> guard(registry_lock);
  auto& slot = registry[p.string()];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::filesystem::path unique_scratch_file(const std::filesystem::path& dir,
                                          const std::string& tag) {
  static std::atomic<std::uint64_t> counter{0};
  const auto n = counter.fetch_add(1);
  return dir / ("w2s_enc_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(n) + ".y4m");
}

}  // namespace

VideoClip encode_roundtrip(const VideoClip& clip, Codec codec, int crf,
                           const std::string& preset, const EncoderInvocation& encoder,
                           const std::filesystem::path& scratch_dir) {
  const CrfRange range = codec_crf_range(codec);
  if (crf < range.lo || crf > range.hi) {
    throw DomainError("crf " + std::to_string(crf) + " outside " + to_string(codec) +
                      " range [" + std::to_string(range.lo) + ", " +
                      std::to_string(range.hi) + "]");
  }
  if (encoder.command_template.empty()) {
    throw EnvironmentError("empty encoder command template");
  }

  const std::filesystem::path dir =
      scratch_dir.empty() ? std::filesystem::temp_directory_path() : scratch_dir;
  std::filesystem::create_directories(dir);
  const auto input_path = unique_scratch_file(dir, "in");
  const auto output_path = unique_scratch_file(dir, "out");

  const VideoClip luma = to_luma(clip);
  save_clip(luma, input_path, ClipFormat::y4m);

  std::vector<std::string> argv = split_template(encoder.command_template);
  if (argv.empty()) throw EnvironmentError("encoder command template has no tokens");
  for (auto& token : argv) {
    substitute(token, "{input}", input_path.string());
    substitute(token, "{output}", output_path.string());
    substitute(token, "{crf}", std::to_string(crf));
    substitute(token, "{preset}", preset);
    substitute(token, "{codec}", to_string(codec));
  }

  ProcessResult result;
  {
    std::lock_guard<std::mutex> guard(path_mutex(output_path));
    try {
      result = run_process(argv);
    } catch (const EnvironmentError& e) {
      std::filesystem::remove(input_path);
      throw EnvironmentError(std::string(e.what()) +
                             "; check the encoder template or set W2S_ENCODER");
    }
  }
  std::filesystem::remove(input_path);

  if (result.exit_code != 0) {
    std::filesystem::remove(output_path);
    throw Error("encoder exited with code " + std::to_string(result.exit_code) + ": " +
                result.stderr_text);
  }

  VideoClip decoded = load_clip(output_path, ClipFormat::y4m);
  std::filesystem::remove(output_path);

  if (decoded.width() != clip.width() || decoded.height() != clip.height() ||
      decoded.frame_count() != clip.frame_count()) {
    throw Error("encoder changed clip geometry or frame count");
  }
  decoded.fps = clip.fps;  // fps is carried by the caller's clip, not renegotiated
  return decoded;
}

}  // namespace w2s
