#pragma once

// Independent brute-force references. Everything here evaluates definitions
// directly (O(M^4) transforms, per-window sums, exhaustive searches) and
// stays off the library's fast paths.

#include <cmath>
#include <complex>
#include <vector>

#include "phaselab/grid.hpp"
#include "phaselab/measure.hpp"
#include "phaselab/refiner.hpp"

namespace phaselab::oracle {

constexpr double kTau = 6.283185307179586476925286766559;

/// Direct-summation 2-D DFT, unnormalized forward, 1/M^2 inverse.
inline PaddedField dft(const PaddedField& field, bool forward) {
  const int m = field.m;
  PaddedField out = PaddedField::zeros(m);
  for (int u = 0; u < m; ++u)
    for (int v = 0; v < m; ++v) {
      std::complex<double> acc = 0.0;
      for (int y = 0; y < m; ++y)
        for (int x = 0; x < m; ++x) {
          const double angle = kTau * (static_cast<double>(u) * y + static_cast<double>(v) * x) /
                               static_cast<double>(m);
          const std::complex<double> twiddle =
              forward ? std::complex<double>(std::cos(angle), -std::sin(angle))
                      : std::complex<double>(std::cos(angle), std::sin(angle));
          acc += field.at(y, x) * twiddle;
        }
      out.at(u, v) = forward ? acc : acc / (static_cast<double>(m) * m);
    }
  return out;
}

inline double residual(const PaddedField& field, const MagnitudeMeasurement& y) {
  const PaddedField spectrum = dft(field, true);
  double sum = 0.0;
  for (std::size_t i = 0; i < spectrum.values.size(); ++i) {
    const double d = y.y[i] - std::abs(spectrum.values[i]);
    sum += d * d;
  }
  return sum;
}

inline PaddedField magnitude_project(const PaddedField& field, const MagnitudeMeasurement& y) {
  PaddedField spectrum = dft(field, true);
  for (std::size_t i = 0; i < spectrum.values.size(); ++i) {
    const double mag = std::abs(spectrum.values[i]);
    spectrum.values[i] = mag == 0.0 ? std::complex<double>(y.y[i], 0.0)
                                    : spectrum.values[i] * (y.y[i] / mag);
  }
  return dft(spectrum, false);
}

/// Scalar-by-scalar feedback step; variant_er sets violating pixels to zero.
inline PaddedField projection_step(const PaddedField& iterate, const MagnitudeMeasurement& y,
                                   const SupportMask& support, double beta, bool variant_er) {
  const PaddedField projected = oracle::magnitude_project(iterate, y);
  PaddedField next = PaddedField::zeros(iterate.m);
  for (std::size_t i = 0; i < next.values.size(); ++i) {
    const double xp = projected.values[i].real();
    const bool violates = !support.contains(i) || xp < 0.0;
    double v;
    if (!violates)
      v = xp;
    else if (variant_er)
      v = 0.0;
    else
      v = iterate.values[i].real() - beta * xp;
    next.values[i] = v;
  }
  return next;
}

inline double mse(const ImagePlane& a, const ImagePlane& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.pixels.size());
}

inline double psnr(const ImagePlane& a, const ImagePlane& b) {
  const double m = mse(a, b);
  if (m == 0.0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(255.0 * 255.0 / m));
}

/// Per-window direct summation SSIM with a 2-D Gaussian window.
inline double ssim(const ImagePlane& a, const ImagePlane& b) {
  const int window = 11;
  const double sigma = 1.5;
  const int n = a.n;
  std::vector<double> w(static_cast<std::size_t>(window) * window);
  double wsum = 0.0;
  for (int y = 0; y < window; ++y)
    for (int x = 0; x < window; ++x) {
      const double dy = y - window / 2, dx = x - window / 2;
      w[static_cast<std::size_t>(y) * window + x] =
          std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
      wsum += w[static_cast<std::size_t>(y) * window + x];
    }
  for (double& v : w) v /= wsum;

  const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
  const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
  double total = 0.0;
  int count = 0;
  for (int wy = 0; wy + window <= n; ++wy)
    for (int wx = 0; wx + window <= n; ++wx) {
      double mu1 = 0.0, mu2 = 0.0;
      for (int y = 0; y < window; ++y)
        for (int x = 0; x < window; ++x) {
          const double weight = w[static_cast<std::size_t>(y) * window + x];
          mu1 += weight * a.at(wy + y, wx + x);
          mu2 += weight * b.at(wy + y, wx + x);
        }
      double s1 = 0.0, s2 = 0.0, s12 = 0.0;
      for (int y = 0; y < window; ++y)
        for (int x = 0; x < window; ++x) {
          const double weight = w[static_cast<std::size_t>(y) * window + x];
          s1 += weight * a.at(wy + y, wx + x) * a.at(wy + y, wx + x);
          s2 += weight * b.at(wy + y, wx + x) * b.at(wy + y, wx + x);
          s12 += weight * a.at(wy + y, wx + x) * b.at(wy + y, wx + x);
        }
      s1 -= mu1 * mu1;
      s2 -= mu2 * mu2;
      s12 -= mu1 * mu2;
      total += ((2.0 * mu1 * mu2 + c1) * (2.0 * s12 + c2)) /
               ((mu1 * mu1 + mu2 * mu2 + c1) * (s1 + s2 + c2));
      ++count;
    }
  return total / count;
}

inline ImagePlane rotate180(const ImagePlane& img) {
  ImagePlane out = ImagePlane::zeros(img.n);
  for (int y = 0; y < img.n; ++y)
    for (int x = 0; x < img.n; ++x) out.at(y, x) = img.at(img.n - 1 - y, img.n - 1 - x);
  return out;
}

inline ImagePlane circular_shift(const ImagePlane& img, int dy, int dx) {
  const int n = img.n;
  ImagePlane out = ImagePlane::zeros(n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      out.at(y, x) = img.at(((y - dy) % n + n) % n, ((x - dx) % n + n) % n);
  return out;
}

/// Exhaustive search over all shifts and both orientations for the best
/// achievable PSNR.
inline double best_registered_psnr(const ImagePlane& recon, const ImagePlane& truth) {
  double best = -1.0;
  for (int f = 0; f < 2; ++f) {
    const ImagePlane cand = f == 0 ? recon : rotate180(recon);
    for (int dy = 0; dy < recon.n; ++dy)
      for (int dx = 0; dx < recon.n; ++dx)
        best = std::max(best, psnr(circular_shift(cand, dy, dx), truth));
  }
  return best;
}

/// Direct-summation forward pass of the residual CNN, including scaling,
/// skip connection and clamp.
inline ImagePlane refine(const RefinerWeights& weights, const ImagePlane& input) {
  const int n = input.n;
  std::vector<std::vector<double>> act(1, std::vector<double>(input.pixels.size()));
  for (std::size_t i = 0; i < input.pixels.size(); ++i) act[0][i] = input.pixels[i] / 255.0;

  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    const ConvLayer& layer = weights.layers[l];
    const int ph = (layer.kh - 1) / 2, pw = (layer.kw - 1) / 2;
    std::vector<std::vector<double>> next(layer.out_channels,
                                          std::vector<double>(input.pixels.size(), 0.0));
    for (int oc = 0; oc < layer.out_channels; ++oc)
      for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) {
          double acc = layer.bias[oc];
          for (int ic = 0; ic < layer.in_channels; ++ic)
            for (int dy = 0; dy < layer.kh; ++dy)
              for (int dx = 0; dx < layer.kw; ++dx) {
                const int yy = y + dy - ph, xx = x + dx - pw;
                if (yy < 0 || yy >= n || xx < 0 || xx >= n) continue;
                acc += layer.kernel_at(oc, ic, dy, dx) *
                       act[ic][static_cast<std::size_t>(yy) * n + xx];
              }
          if (l + 1 < weights.layers.size() && acc < 0.0) acc = 0.0;
          next[oc][static_cast<std::size_t>(y) * n + x] = acc;
        }
    act = std::move(next);
  }

  ImagePlane out = ImagePlane::zeros(n);
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = std::clamp(input.pixels[i] + 255.0 * act[0][i], 0.0, 255.0);
  return out;
}

}  // namespace phaselab::oracle
