#include "phaselab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fft.hpp"

namespace phaselab {

ImagePlane ImagePlane::zeros(int n) {
  return ImagePlane{n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
}

PaddedField PaddedField::zeros(int m) {
  return PaddedField{m, std::vector<std::complex<double>>(static_cast<std::size_t>(m) * m)};
}

SupportMask SupportMask::top_left(int n, int m) {
  if (n <= 0 || m < n) throw std::invalid_argument("support mask requires 0 < n <= m");
  SupportMask mask{n, m, std::vector<std::uint8_t>(static_cast<std::size_t>(m) * m, 0)};
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) mask.inside[static_cast<std::size_t>(y) * m + x] = 1;
  return mask;
}

void validate_image(const ImagePlane& image) {
  if (image.n <= 0) throw std::invalid_argument("image side must be positive");
  if (image.pixels.size() != static_cast<std::size_t>(image.n) * image.n)
    throw std::invalid_argument("image pixel count does not match side length");
  for (double v : image.pixels) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("image pixels must be finite and nonnegative");
  }
}

PaddedField embed(const ImagePlane& image, int m) {
  const int n = image.n;
  if (m < 2 * n - 1)
    throw std::invalid_argument("grid side " + std::to_string(m) +
                                " violates the uniqueness condition m >= 2n-1 for n = " +
                                std::to_string(n));
  PaddedField field = PaddedField::zeros(m);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) field.at(y, x) = image.at(y, x);
  return field;
}

PaddedField forward_dft(const PaddedField& field) {
  PaddedField out = field;
  detail::dft2d(out.values.data(), out.m, true);
  return out;
}

PaddedField inverse_dft(const PaddedField& field) {
  PaddedField out = field;
  detail::dft2d(out.values.data(), out.m, false);
  const double scale = 1.0 / (static_cast<double>(out.m) * out.m);
  for (auto& v : out.values) v *= scale;
  return out;
}

ImagePlane crop(const PaddedField& field, int n) {
  if (n <= 0 || n > field.m)
    throw std::invalid_argument("crop side must satisfy 0 < n <= m");
  ImagePlane image = ImagePlane::zeros(n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) image.at(y, x) = std::max(0.0, field.at(y, x).real());
  return image;
}

}  // namespace phaselab
