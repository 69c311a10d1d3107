#include "phaselab/initsel.hpp"

#include <limits>
#include <stdexcept>

#include "phaselab/parallel.hpp"
#include "phaselab/projections.hpp"
#include "phaselab/rng.hpp"

namespace phaselab {

PaddedField random_init(int n, int m, std::uint64_t seed) {
  if (m < 2 * n - 1)
    throw std::invalid_argument("random_init requires m >= 2n-1");
  PaddedField field = PaddedField::zeros(m);
  RngStream rng(seed);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x)
      field.at(y, x) = std::complex<double>(255.0 * rng.uniform(), 0.0);
  return field;
}

InitResult multi_start(const MagnitudeMeasurement& y, int n_side,
                       const InitParams& params, int threads) {
  if (params.m_starts < 1) throw std::invalid_argument("m_starts must be >= 1");
  if (params.s_iters < 1) throw std::invalid_argument("s_iters must be >= 1");
  if (params.n_iters < 0) throw std::invalid_argument("n_iters must be >= 0");

  const SupportMask support = SupportMask::top_left(n_side, y.m);
  const HIOParams short_run{params.beta, params.s_iters, Variant::HIO};

  std::vector<HIOState> trials(params.m_starts);
  parallel_for(static_cast<std::size_t>(params.m_starts), threads, [&](std::size_t t) {
    const PaddedField init = random_init(n_side, y.m, params.base_seed + t);
    trials[t] = run_hio(y, init, short_run, support);
  });

  // argmin residual, ties to the lowest trial index
  int best = 0;
  double best_residual = std::numeric_limits<double>::infinity();
  for (int t = 0; t < params.m_starts; ++t) {
    const double r = trials[t].residual_trace.back();
    if (r < best_residual) {
      best_residual = r;
      best = t;
    }
  }

  InitResult result;
  result.selected_trial = best;
  result.selected_residual = best_residual;
  result.residual_trace = trials[best].residual_trace;
  if (params.n_iters > 0) {
    const HIOParams long_run{params.beta, params.n_iters, Variant::HIO};
    HIOState final_state = run_hio(y, trials[best].iterate, long_run, support);
    result.field = std::move(final_state.iterate);
    result.residual_trace.insert(result.residual_trace.end(),
                                 final_state.residual_trace.begin(),
                                 final_state.residual_trace.end());
  } else {
    result.field = trials[best].iterate;
  }
  return result;
}

}  // namespace phaselab
