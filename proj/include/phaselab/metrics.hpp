#pragma once

#include "phaselab/grid.hpp"

namespace phaselab {

struct QualityScore {
  double psnr_db = 0.0;   // capped at 99
  double ssim = 0.0;
  int dx = 0;
  int dy = 0;
  bool flipped = false;
};

/// 10 log10(255^2 / MSE), capped at 99 dB (the cap value is also returned
/// for MSE = 0).
double psnr(const ImagePlane& a, const ImagePlane& b);

/// Mean local SSIM, 11x11 Gaussian window sigma = 1.5, K1 = 0.01,
/// K2 = 0.03, dynamic range 255, valid-region windowing (no padding).
/// Requires side >= 11.
double ssim(const ImagePlane& a, const ImagePlane& b);

struct Registration {
  ImagePlane aligned;
  int dx = 0;      // aligned[y][x] = cand[(y - dy) mod N][(x - dx) mod N]
  int dy = 0;
  bool flipped = false;
};

/// Searches all circular shifts of recon and of its 180-degree rotation for
/// the candidate best correlated with truth (cross-correlation evaluated in
/// the frequency domain). Ties break toward the lexicographically smallest
/// (flipped, dy, dx). Never returns an alignment with higher MSE than the
/// identity alignment.
Registration register_image(const ImagePlane& recon, const ImagePlane& truth);

/// Registered PSNR/SSIM of recon against truth.
QualityScore score_registered(const ImagePlane& recon, const ImagePlane& truth);

}  // namespace phaselab
