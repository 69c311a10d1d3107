#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace phaselab {

/// Real nonnegative N x N image, row major, nominal pixel range [0, 255].
struct ImagePlane {
  int n = 0;
  std::vector<double> pixels;

  static ImagePlane zeros(int n);

  double& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * n + x]; }
  double at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * n + x]; }
  std::size_t size() const { return pixels.size(); }

  bool operator==(const ImagePlane&) const = default;
};

/// Complex M x M field on the oversampled frequency/space grid, row major.
struct PaddedField {
  int m = 0;
  std::vector<std::complex<double>> values;

  static PaddedField zeros(int m);

  std::complex<double>& at(int y, int x) { return values[static_cast<std::size_t>(y) * m + x]; }
  std::complex<double> at(int y, int x) const { return values[static_cast<std::size_t>(y) * m + x]; }
  std::size_t size() const { return values.size(); }

  bool operator==(const PaddedField&) const = default;
};

/// M x M boolean mask, true exactly on the N x N top-left block.
struct SupportMask {
  int n = 0;
  int m = 0;
  std::vector<std::uint8_t> inside;

  static SupportMask top_left(int n, int m);

  bool contains(std::size_t idx) const { return inside[idx] != 0; }
};

/// Throws std::invalid_argument unless all pixels are finite and >= 0 and
/// the pixel count matches n * n.
void validate_image(const ImagePlane& image);

/// Zero-pads an image onto the M x M grid (top-left placement).
/// Requires m >= 2n - 1 so that the magnitude data determines the image.
PaddedField embed(const ImagePlane& image, int m);

/// Unnormalized 2-D DFT, forward kernel exp(-j 2 pi (uk + vl) / M).
PaddedField forward_dft(const PaddedField& field);

/// Inverse 2-D DFT with 1/M^2 normalization; exact inverse of forward_dft.
PaddedField inverse_dft(const PaddedField& field);

/// Real parts of the top-left n x n block, clamped to >= 0.
ImagePlane crop(const PaddedField& field, int n);

}  // namespace phaselab
