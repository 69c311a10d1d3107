#include "phaselab/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "fft.hpp"

namespace phaselab {

namespace {

constexpr double kPsnrCap = 99.0;
constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;
constexpr double kDynamicRange = 255.0;

void check_sides(const ImagePlane& a, const ImagePlane& b) {
  if (a.n != b.n) throw std::invalid_argument("images have different sides");
}

double mse(const ImagePlane& a, const ImagePlane& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.pixels.size());
}

std::vector<double> gaussian_window_1d() {
  std::vector<double> w(kWindow);
  const int r = kWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - r;
    w[i] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Valid-region weighted mean: horizontal pass then vertical pass.
// Input n x n, output (n-kWindow+1)^2.
std::vector<double> window_filter(const std::vector<double>& img, int n,
                                  const std::vector<double>& w) {
  const int out = n - kWindow + 1;
  std::vector<double> h(static_cast<std::size_t>(n) * out);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < out; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += w[k] * img[static_cast<std::size_t>(y) * n + x + k];
      h[static_cast<std::size_t>(y) * out + x] = acc;
    }
  std::vector<double> v(static_cast<std::size_t>(out) * out);
  for (int y = 0; y < out; ++y)
    for (int x = 0; x < out; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += w[k] * h[static_cast<std::size_t>(y + k) * out + x];
      v[static_cast<std::size_t>(y) * out + x] = acc;
    }
  return v;
}

ImagePlane rotate180(const ImagePlane& img) {
  ImagePlane out = ImagePlane::zeros(img.n);
  for (int y = 0; y < img.n; ++y)
    for (int x = 0; x < img.n; ++x) out.at(y, x) = img.at(img.n - 1 - y, img.n - 1 - x);
  return out;
}

ImagePlane circular_shift(const ImagePlane& img, int dy, int dx) {
  const int n = img.n;
  ImagePlane out = ImagePlane::zeros(n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      out.at(y, x) = img.at(((y - dy) % n + n) % n, ((x - dx) % n + n) % n);
  return out;
}

// g[d] = sum_u cand[u] * truth[u + d] for all circular displacements d,
// via IDFT(DFT(truth) .* conj(DFT(cand))).
std::vector<double> correlation_map(const ImagePlane& cand, const ImagePlane& truth) {
  const int n = cand.n;
  const std::size_t count = static_cast<std::size_t>(n) * n;
  std::vector<std::complex<double>> c(count), t(count);
  for (std::size_t i = 0; i < count; ++i) {
    c[i] = cand.pixels[i];
    t[i] = truth.pixels[i];
  }
  detail::dft2d(c.data(), n, true);
  detail::dft2d(t.data(), n, true);
  for (std::size_t i = 0; i < count; ++i) t[i] *= std::conj(c[i]);
  detail::dft2d(t.data(), n, false);
  std::vector<double> g(count);
  const double scale = 1.0 / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = t[i].real() * scale;
  return g;
}

}  // namespace

double psnr(const ImagePlane& a, const ImagePlane& b) {
  check_sides(a, b);
  const double m = mse(a, b);
  if (m == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / m));
}

double ssim(const ImagePlane& a, const ImagePlane& b) {
  check_sides(a, b);
  if (a.n < kWindow) throw std::invalid_argument("ssim requires side >= 11");
  const int n = a.n;
  const std::size_t count = a.pixels.size();

  std::vector<double> aa(count), bb(count), ab(count);
  for (std::size_t i = 0; i < count; ++i) {
    aa[i] = a.pixels[i] * a.pixels[i];
    bb[i] = b.pixels[i] * b.pixels[i];
    ab[i] = a.pixels[i] * b.pixels[i];
  }

  const std::vector<double> w = gaussian_window_1d();
  const std::vector<double> mu1 = window_filter(a.pixels, n, w);
  const std::vector<double> mu2 = window_filter(b.pixels, n, w);
  const std::vector<double> e_aa = window_filter(aa, n, w);
  const std::vector<double> e_bb = window_filter(bb, n, w);
  const std::vector<double> e_ab = window_filter(ab, n, w);

  const double c1 = (kK1 * kDynamicRange) * (kK1 * kDynamicRange);
  const double c2 = (kK2 * kDynamicRange) * (kK2 * kDynamicRange);

  double sum = 0.0;
  for (std::size_t i = 0; i < mu1.size(); ++i) {
    const double m1 = mu1[i], m2 = mu2[i];
    const double s1 = e_aa[i] - m1 * m1;
    const double s2 = e_bb[i] - m2 * m2;
    const double s12 = e_ab[i] - m1 * m2;
    const double num = (2.0 * (m1 * m2) + c1) * (2.0 * s12 + c2);
    const double den = (m1 * m1 + m2 * m2 + c1) * (s1 + s2 + c2);
    sum += num / den;
  }
  return sum / static_cast<double>(mu1.size());
}

Registration register_image(const ImagePlane& recon, const ImagePlane& truth) {
  check_sides(recon, truth);
  const int n = recon.n;

  bool best_flipped = false;
  int best_dy = 0, best_dx = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int f = 0; f < 2; ++f) {
    const ImagePlane cand = f == 0 ? recon : rotate180(recon);
    const std::vector<double> g = correlation_map(cand, truth);
    for (int dy = 0; dy < n; ++dy)
      for (int dx = 0; dx < n; ++dx) {
        const double score = g[static_cast<std::size_t>(dy) * n + dx];
        if (score > best_score) {
          best_score = score;
          best_flipped = f != 0;
          best_dy = dy;
          best_dx = dx;
        }
      }
  }

  Registration reg;
  reg.flipped = best_flipped;
  reg.dy = best_dy;
  reg.dx = best_dx;
  reg.aligned = circular_shift(best_flipped ? rotate180(recon) : recon, best_dy, best_dx);

  // The correlation map carries FFT round-off; never let it pick an
  // alignment that is measurably worse than leaving the image alone.
  if (mse(recon, truth) <= mse(reg.aligned, truth)) {
    reg.flipped = false;
    reg.dy = 0;
    reg.dx = 0;
    reg.aligned = recon;
  }
  return reg;
}

QualityScore score_registered(const ImagePlane& recon, const ImagePlane& truth) {
  const Registration reg = register_image(recon, truth);
  QualityScore score;
  score.psnr_db = psnr(reg.aligned, truth);
  score.ssim = truth.n >= kWindow ? ssim(reg.aligned, truth)
                                  : std::numeric_limits<double>::quiet_NaN();
  score.dx = reg.dx;
  score.dy = reg.dy;
  score.flipped = reg.flipped;
  return score;
}

}  // namespace phaselab
