#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "phaselab/grid.hpp"

namespace phaselab {

struct NoiseParams {
  double alpha = 0.0;       // scales the noise standard deviation per sample
  std::uint64_t seed = 0;
};

/// M x M nonnegative Fourier-magnitude samples y, obtained as the square
/// root of the (clamped) noisy intensity. clamped_fraction and
/// measured_snr_db are simulation-time diagnostics; both are NaN for
/// measurements loaded from a file.
struct MagnitudeMeasurement {
  int m = 0;
  std::vector<double> y;
  double alpha_used = 0.0;
  double clamped_fraction = std::numeric_limits<double>::quiet_NaN();
  double measured_snr_db = std::numeric_limits<double>::quiet_NaN();
};

/// Simulates y^2 = |F embed(x)|^2 + w with w[i] ~ N(0, alpha^2 |F x|^2[i]),
/// independent per sample. Negative intensities are clamped to zero before
/// the square root. Deterministic given the seed. alpha = 0 returns the
/// exact magnitudes.
MagnitudeMeasurement simulate(const ImagePlane& image, int m, const NoiseParams& noise);

/// 10 log10(||clean||_2 / ||noisy - clean||_2) over the flattened arrays.
/// Returns +infinity when noisy equals clean exactly.
double snr_db(const std::vector<double>& clean_intensity,
              const std::vector<double>& noisy_intensity);

// Flat binary format: magic "PRMEAS01", u32 LE m, f64 LE alpha, then
// m*m f64 LE magnitudes.
void save_measurement(const MagnitudeMeasurement& meas, const std::string& path);
MagnitudeMeasurement load_measurement(const std::string& path);

}  // namespace phaselab
