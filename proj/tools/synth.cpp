// Writes a synthetic corpus: <out>/images/synth_NNN.png and
// <out>/masks/synth_NNN_segmentation.png.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lesionseg/image_io.hpp"
#include "lesionseg/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate synthetic lesion images with ground truth", "lesionseg-synth"};
  std::string out;
  int count = 10;
  std::uint64_t seed = 1;
  app.add_option("out", out, "output directory")->required();
  app.add_option("--count", count, "number of images");
  app.add_option("--seed", seed, "first seed");
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  try {
    fs::create_directories(fs::path(out) / "images");
    fs::create_directories(fs::path(out) / "masks");
    for (int i = 0; i < count; ++i) {
      const auto lesion = lesionseg::make_synthetic_lesion(seed + static_cast<std::uint64_t>(i));
      char stem[32];
      std::snprintf(stem, sizeof(stem), "synth_%03d", i);
      lesionseg::write_image(fs::path(out) / "images" / (std::string(stem) + ".png"), lesion.image);
      lesionseg::write_mask(fs::path(out) / "masks" / (std::string(stem) + "_segmentation.png"), lesion.truth);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
