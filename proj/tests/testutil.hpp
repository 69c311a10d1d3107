#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>

#include "phaselab/grid.hpp"
#include "phaselab/rng.hpp"

namespace phaselab::testutil {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto base = std::filesystem::temp_directory_path();
    path_ = base / ("phaselab_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& rel = "") const {
    return rel.empty() ? path_.string() : (path_ / rel).string();
  }

 private:
  std::filesystem::path path_;
};

inline ImagePlane random_image(int n, std::uint64_t seed, double max_value = 255.0) {
  RngStream rng(seed);
  ImagePlane img = ImagePlane::zeros(n);
  for (double& v : img.pixels) v = max_value * rng.uniform();
  return img;
}

inline PaddedField random_field(int m, std::uint64_t seed) {
  RngStream rng(seed);
  PaddedField field = PaddedField::zeros(m);
  for (auto& v : field.values)
    v = std::complex<double>(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
  return field;
}

inline double max_abs(const PaddedField& field) {
  double peak = 0.0;
  for (const auto& v : field.values) peak = std::max(peak, std::abs(v));
  return peak;
}

inline double max_abs_diff(const PaddedField& a, const PaddedField& b) {
  double peak = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    peak = std::max(peak, std::abs(a.values[i] - b.values[i]));
  return peak;
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

}  // namespace phaselab::testutil
