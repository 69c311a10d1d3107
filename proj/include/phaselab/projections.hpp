#pragma once

#include <cstdint>
#include <vector>

#include "phaselab/grid.hpp"
#include "phaselab/measure.hpp"

namespace phaselab {

enum class Variant { HIO, ER };

struct HIOParams {
  double beta = 0.9;        // feedback weight on constraint-violating pixels
  int iterations = 1;
  Variant variant = Variant::HIO;
};

/// State of an alternating-projection run. The iterate is real-valued by
/// construction (imaginary parts identically zero after every step).
struct HIOState {
  PaddedField iterate;
  std::int64_t k = 0;
  std::vector<double> residual_trace;  // residual of the iterate after each step
};

/// Replaces the spectrum magnitude of `field` with y, keeping the phase:
/// F^-1{ y * F(field) / |F(field)| }. Where |F(field)| is exactly zero the
/// phase factor is taken as 1.
PaddedField magnitude_project(const PaddedField& field, const MagnitudeMeasurement& y);

/// One feedback step: x' = Re(magnitude_project(x, y)); on the violating
/// set (outside the support, or negative) the new iterate is x - beta * x',
/// elsewhere x'. Appends the residual of the new iterate to the trace.
HIOState hio_step(const HIOState& state, const MagnitudeMeasurement& y,
                  const HIOParams& params, const SupportMask& support);

/// Hard-projection sibling: violating pixels are set to zero.
HIOState er_step(const HIOState& state, const MagnitudeMeasurement& y,
                 const SupportMask& support);

/// Applies params.iterations steps of the selected variant starting from
/// `init`; returns the final state with the full residual trace.
HIOState run_hio(const MagnitudeMeasurement& y, const PaddedField& init,
                 const HIOParams& params, const SupportMask& support);

/// Data misfit || y - |F field| ||_2^2.
double residual(const PaddedField& field, const MagnitudeMeasurement& y);

}  // namespace phaselab
