#pragma once

#include <vector>

#include "phaselab/grid.hpp"
#include "phaselab/initsel.hpp"
#include "phaselab/measure.hpp"
#include "phaselab/projections.hpp"
#include "phaselab/refiner.hpp"

namespace phaselab {

struct LoopParams {
  int t_iters = 5;          // HIO iterations per refiner-HIO cycle
  double tol = 1e-3;        // relative-change stopping threshold
  int max_cycles = 200;     // hard cap so the stage always terminates
};

struct IterativeResult {
  PaddedField field;                    // final HIO iterate, not the refiner output
  int cycles = 0;
  std::vector<double> relative_changes; // ||u_k - u_{k-1}|| / ||u_k|| per cycle
  bool degenerate = false;              // refiner produced an all-zero image
};

struct PipelineResult {
  ImagePlane init_recon;
  ImagePlane intermediate_hio_recon;
  ImagePlane final_recon;
  int cycle_count = 0;
  std::vector<double> relative_changes;
  double init_seconds = 0.0;
  double iterative_seconds = 0.0;
  double final_seconds = 0.0;
  bool degenerate = false;
  int selected_trial = 0;       // winning multi-start trial
  double selected_residual = 0.0;
};

/// Alternates refiner and short HIO runs: u_k = refiner(crop(x_k)),
/// x_{k+1} = run_hio(y, embed(u_k), t_iters). Stops once the relative change
/// between consecutive refiner outputs drops below tol (the first cycle is
/// scored against a zero image, so its relative change is 1) or after
/// max_cycles. Returns the final HIO iterate.
IterativeResult iterative_stage(const MagnitudeMeasurement& y, const PaddedField& start,
                                const RefinerFn& refiner1, const LoopParams& params,
                                const HIOParams& hio, const SupportMask& support);

/// The three stages end to end: multi-start initialization, iterative
/// refiner-HIO loop, final refiner pass. Deterministic given all seeds.
PipelineResult full_pipeline(const MagnitudeMeasurement& y, int n_side,
                             const InitParams& init, const RefinerFn& refiner1,
                             const RefinerFn& refiner2, const LoopParams& loop,
                             const HIOParams& hio, int threads = 1);

}  // namespace phaselab
