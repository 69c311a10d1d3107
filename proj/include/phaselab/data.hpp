#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "phaselab/grid.hpp"

namespace phaselab {

enum class CorpusStyle { Blobs, Rects, Mixed };

struct CorpusSpec {
  int count = 1;
  int n = 32;               // side length, >= 16
  std::uint64_t seed = 0;
  CorpusStyle style = CorpusStyle::Mixed;
};

CorpusStyle corpus_style_from_string(const std::string& name);
std::string to_string(CorpusStyle style);

/// Seeded superpositions of 3-8 axis-aligned rectangles and/or Gaussian
/// blobs, amplitudes in [30, 255], clamped to [0, 255]. Every image has at
/// least 10% nonzero pixels.
std::vector<ImagePlane> generate_corpus(const CorpusSpec& spec);

/// Binary PGM ("P5"), maxval 255 only. Loading rejects non-square images;
/// saving rounds half up.
ImagePlane load_pgm(const std::string& path);
void save_pgm(const ImagePlane& image, const std::string& path);

struct BenchRecord {
  std::string image_id;
  int run = 0;
  std::string method;
  double alpha = 0.0;
  double psnr_registered = 0.0;
  double ssim_registered = 0.0;
  double psnr_raw = 0.0;
  double ssim_raw = 0.0;
  double residual = 0.0;
  double runtime_s = 0.0;
};

struct BenchReport {
  std::vector<BenchRecord> rows;
};

/// Writes report.csv (one row per image x run x method x alpha, sorted by
/// image_id, run, method, alpha) and report.json (per method x alpha means)
/// into out_dir. The CSV carries the registered metrics; raw means appear in
/// the JSON aggregate. Throws on an empty report or IO failure.
void write_report(const BenchReport& report, const std::string& out_dir);

}  // namespace phaselab
