#include "phaselab/measure.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "binio.hpp"
#include "phaselab/rng.hpp"

namespace phaselab {

namespace {
constexpr char kMagic[8] = {'P', 'R', 'M', 'E', 'A', 'S', '0', '1'};
}

MagnitudeMeasurement simulate(const ImagePlane& image, int m, const NoiseParams& noise) {
  if (noise.alpha < 0.0) throw std::invalid_argument("noise alpha must be >= 0");
  const PaddedField spectrum = forward_dft(embed(image, m));
  const std::size_t count = spectrum.size();

  MagnitudeMeasurement meas;
  meas.m = m;
  meas.alpha_used = noise.alpha;
  meas.y.resize(count);

  if (noise.alpha == 0.0) {
    for (std::size_t i = 0; i < count; ++i) meas.y[i] = std::abs(spectrum.values[i]);
    meas.clamped_fraction = 0.0;
    meas.measured_snr_db = std::numeric_limits<double>::infinity();
    return meas;
  }

  RngStream rng(noise.seed);
  std::size_t clamped = 0;
  double clean_sq = 0.0, diff_sq = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double mag = std::abs(spectrum.values[i]);
    const double clean = mag * mag;
    // variance alpha^2 * |Fx|^2, so the deviation scales with the magnitude
    double noisy = clean + noise.alpha * mag * rng.gaussian();
    if (noisy < 0.0) {
      noisy = 0.0;
      ++clamped;
    }
    meas.y[i] = std::sqrt(noisy);
    clean_sq += clean * clean;
    const double d = noisy - clean;
    diff_sq += d * d;
  }
  meas.clamped_fraction = static_cast<double>(clamped) / static_cast<double>(count);
  meas.measured_snr_db = diff_sq == 0.0
                             ? std::numeric_limits<double>::infinity()
                             : 10.0 * std::log10(std::sqrt(clean_sq) / std::sqrt(diff_sq));
  return meas;
}

double snr_db(const std::vector<double>& clean_intensity,
              const std::vector<double>& noisy_intensity) {
  if (clean_intensity.size() != noisy_intensity.size())
    throw std::invalid_argument("snr_db requires arrays of equal length");
  double clean_sq = 0.0, diff_sq = 0.0;
  for (std::size_t i = 0; i < clean_intensity.size(); ++i) {
    clean_sq += clean_intensity[i] * clean_intensity[i];
    const double d = noisy_intensity[i] - clean_intensity[i];
    diff_sq += d * d;
  }
  if (diff_sq == 0.0) return std::numeric_limits<double>::infinity();
  if (clean_sq == 0.0) throw std::invalid_argument("snr_db requires a nonzero clean signal");
  return 10.0 * std::log10(std::sqrt(clean_sq) / std::sqrt(diff_sq));
}

void save_measurement(const MagnitudeMeasurement& meas, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  detail::write_u32le(os, static_cast<std::uint32_t>(meas.m));
  detail::write_f64le(os, meas.alpha_used);
  for (double v : meas.y) detail::write_f64le(os, v);
  if (!os) throw std::runtime_error("write failed for " + path);
}

MagnitudeMeasurement load_measurement(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[8];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("bad measurement magic in " + path);
  MagnitudeMeasurement meas;
  meas.m = static_cast<int>(detail::read_u32le(is, "grid side"));
  meas.alpha_used = detail::read_f64le(is, "alpha");
  if (meas.m <= 0) throw std::runtime_error("invalid grid side in " + path);
  const std::size_t count = static_cast<std::size_t>(meas.m) * meas.m;
  meas.y.resize(count);
  for (std::size_t i = 0; i < count; ++i) meas.y[i] = detail::read_f64le(is, "magnitudes");
  for (double v : meas.y)
    if (!std::isfinite(v) || v < 0.0)
      throw std::runtime_error("invalid magnitude entry in " + path);
  return meas;
}

}  // namespace phaselab
