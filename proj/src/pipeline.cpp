#include "phaselab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace phaselab {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double l2_norm(const ImagePlane& image) {
  double sum = 0.0;
  for (double v : image.pixels) sum += v * v;
  return std::sqrt(sum);
}

double l2_diff(const ImagePlane& a, const ImagePlane& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace

IterativeResult iterative_stage(const MagnitudeMeasurement& y, const PaddedField& start,
                                const RefinerFn& refiner1, const LoopParams& params,
                                const HIOParams& hio, const SupportMask& support) {
  if (params.t_iters < 1) throw std::invalid_argument("t_iters must be >= 1");
  if (!(params.tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (params.max_cycles < 1) throw std::invalid_argument("max_cycles must be >= 1");
  if (start.m != y.m) throw std::invalid_argument("start field grid side differs from measurement");

  const int n = support.n;
  const HIOParams chunk{hio.beta, params.t_iters, hio.variant};

  IterativeResult result;
  PaddedField x = start;
  ImagePlane prev_u = ImagePlane::zeros(n);  // cycle 1 is scored against zero
  for (int cycle = 1; cycle <= params.max_cycles; ++cycle) {
    const ImagePlane u = refiner1(crop(x, n));
    const double u_norm = l2_norm(u);
    result.cycles = cycle;
    if (u_norm == 0.0) {
      result.degenerate = true;
      result.field = std::move(x);
      return result;
    }
    x = run_hio(y, embed(u, y.m), chunk, support).iterate;
    const double rel = l2_diff(u, prev_u) / u_norm;
    result.relative_changes.push_back(rel);
    prev_u = u;
    if (rel < params.tol) break;
  }
  result.field = std::move(x);
  return result;
}

PipelineResult full_pipeline(const MagnitudeMeasurement& y, int n_side,
                             const InitParams& init, const RefinerFn& refiner1,
                             const RefinerFn& refiner2, const LoopParams& loop,
                             const HIOParams& hio, int threads) {
  const SupportMask support = SupportMask::top_left(n_side, y.m);
  PipelineResult result;

  auto t0 = std::chrono::steady_clock::now();
  const InitResult init_result = multi_start(y, n_side, init, threads);
  result.init_seconds = seconds_since(t0);
  result.init_recon = crop(init_result.field, n_side);
  result.selected_trial = init_result.selected_trial;
  result.selected_residual = init_result.selected_residual;

  t0 = std::chrono::steady_clock::now();
  IterativeResult iterative =
      iterative_stage(y, init_result.field, refiner1, loop, hio, support);
  result.iterative_seconds = seconds_since(t0);
  result.intermediate_hio_recon = crop(iterative.field, n_side);
  result.cycle_count = iterative.cycles;
  result.relative_changes = std::move(iterative.relative_changes);
  result.degenerate = iterative.degenerate;

  t0 = std::chrono::steady_clock::now();
  result.final_recon = refiner2(result.intermediate_hio_recon);
  result.final_seconds = seconds_since(t0);
  return result;
}

}  // namespace phaselab
