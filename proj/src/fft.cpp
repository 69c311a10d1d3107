#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>
#include <vector>

namespace phaselab::detail {
namespace {

// Plan creation is the only non-thread-safe FFTW entry point; execution via
// fftw_execute_dft is safe to share. FFTW_UNALIGNED keeps the plans valid
// for any buffer, and FFTW_ESTIMATE keeps planning deterministic.
std::mutex plan_mutex;
std::map<std::pair<int, int>, fftw_plan> plan_cache;

fftw_plan plan_for(int m, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  const auto key = std::make_pair(m, sign);
  auto it = plan_cache.find(key);
  if (it != plan_cache.end()) return it->second;
  std::vector<std::complex<double>> tmp(static_cast<std::size_t>(m) * m);
  fftw_plan p = fftw_plan_dft_2d(m, m, reinterpret_cast<fftw_complex*>(tmp.data()),
                                 reinterpret_cast<fftw_complex*>(tmp.data()), sign,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  plan_cache.emplace(key, p);
  return p;
}

}  // namespace

void dft2d(std::complex<double>* data, int m, bool forward) {
  fftw_plan p = plan_for(m, forward ? FFTW_FORWARD : FFTW_BACKWARD);
  auto* raw = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, raw, raw);
}

}  // namespace phaselab::detail
