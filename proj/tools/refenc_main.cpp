// Reference encoder: a stand-in for a real transcoder behind the encoder
// command template. Reads y4m, applies a CRF-controlled quantization of the
// luma plane (coarser steps at higher CRF, h265 slightly finer than h264 at
// equal CRF), and writes the decoded result back as y4m in one pass.

#include <cmath>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "w2s/encoder.hpp"
#include "w2s/error.hpp"
#include "w2s/media_io.hpp"

namespace {

double quant_step(const std::string& codec, int crf) {
  // exponential rate curve; strictly increasing in crf
  const double base = std::exp(crf / 12.0);
  return codec == "h265" ? 0.8 * base : base;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"w2s reference encoder (y4m in, decoded y4m out)"};

  std::string codec = "h264";
  int crf = 24;
  std::string preset = "fast";
  std::string input;
  std::string output;
  app.add_option("--codec", codec, "h264 or h265")->check(CLI::IsMember({"h264", "h265"}));
  app.add_option("--crf", crf, "constant rate factor")->required();
  app.add_option("--preset", preset, "encoder preset token (accepted, not used)");
  app.add_option("--in", input, "input y4m path")->required();
  app.add_option("--out", output, "output y4m path")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const w2s::CrfRange range = w2s::codec_crf_range(w2s::codec_from_string(codec));
    if (crf < range.lo || crf > range.hi) {
      std::cerr << "refenc: crf " << crf << " outside " << codec << " range ["
                << range.lo << ", " << range.hi << "]\n";
      return 2;
    }
    if (preset.empty()) {
      std::cerr << "refenc: empty preset\n";
      return 2;
    }

    const w2s::VideoClip clip = w2s::load_clip(input, w2s::ClipFormat::y4m);
    const double step = std::max(2.0, quant_step(codec, crf));

    std::vector<w2s::Frame> frames;
    frames.reserve(clip.frames.size());
    for (const auto& frame : clip.frames) {
      std::vector<std::uint8_t> data(frame.data().size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double q = std::round(frame.data()[i] / step) * step;
        data[i] = static_cast<std::uint8_t>(std::lround(std::clamp(q, 0.0, 255.0)));
      }
      frames.push_back(
          w2s::Frame(frame.width(), frame.height(), frame.layout(), std::move(data)));
    }
    w2s::save_clip(w2s::VideoClip(std::move(frames), clip.fps), output,
                   w2s::ClipFormat::y4m);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "refenc: " << e.what() << "\n";
    return 1;
  }
}
