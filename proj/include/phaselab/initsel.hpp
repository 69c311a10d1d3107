#pragma once

#include <cstdint>
#include <vector>

#include "phaselab/grid.hpp"
#include "phaselab/measure.hpp"

namespace phaselab {

struct InitParams {
  int m_starts = 10;        // number of short trials
  int s_iters = 20;         // iterations per short trial
  int n_iters = 500;        // iterations of the follow-up long run
  double beta = 0.9;
  std::uint64_t base_seed = 0;  // trial t uses seed base_seed + t
};

struct InitResult {
  PaddedField field;
  std::vector<double> residual_trace;  // winning trial's trace plus the long run
  int selected_trial = 0;
  double selected_residual = 0.0;
};

/// Random start: in-support pixels i.i.d. uniform on [0, 255], everything
/// else zero. Deterministic given the seed.
PaddedField random_init(int n, int m, std::uint64_t seed);

/// Runs m_starts short trials, keeps the final iterate with the lowest
/// residual (ties broken by lowest trial index), then continues that iterate
/// for n_iters more. Trials may run in parallel; the result does not depend
/// on scheduling.
InitResult multi_start(const MagnitudeMeasurement& y, int n_side,
                       const InitParams& params, int threads = 1);

}  // namespace phaselab
