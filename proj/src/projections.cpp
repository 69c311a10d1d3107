#include "phaselab/projections.hpp"

#include <cmath>
#include <stdexcept>

namespace phaselab {

namespace {

void check_grids(int field_m, int meas_m) {
  if (field_m != meas_m)
    throw std::invalid_argument("field and measurement grid sides differ");
}

enum class FeedbackRule { HIO, ER };

// Shared step body for both variants. gamma is the set of pixels violating
// the space-domain constraints (outside the support, or negative after the
// magnitude projection); real parts are taken before evaluating gamma.
HIOState step(const HIOState& state, const MagnitudeMeasurement& y,
              const SupportMask& support, FeedbackRule rule, double beta) {
  check_grids(state.iterate.m, y.m);
  if (support.m != y.m)
    throw std::invalid_argument("support mask grid side differs from measurement");

  const PaddedField projected = magnitude_project(state.iterate, y);

  HIOState next;
  next.iterate = PaddedField::zeros(y.m);
  next.k = state.k + 1;
  next.residual_trace = state.residual_trace;

  const std::size_t count = projected.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double xp = projected.values[i].real();
    const bool violates = !support.contains(i) || xp < 0.0;
    double v;
    if (!violates) {
      v = xp;
    } else if (rule == FeedbackRule::HIO) {
      v = state.iterate.values[i].real() - beta * xp;
    } else {
      v = 0.0;
    }
    next.iterate.values[i] = std::complex<double>(v, 0.0);
  }
  next.residual_trace.push_back(residual(next.iterate, y));
  return next;
}

}  // namespace

PaddedField magnitude_project(const PaddedField& field, const MagnitudeMeasurement& y) {
  check_grids(field.m, y.m);
  PaddedField spectrum = forward_dft(field);
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double mag = std::abs(spectrum.values[i]);
    if (mag == 0.0) {
      spectrum.values[i] = std::complex<double>(y.y[i], 0.0);  // phase factor 1
    } else {
      spectrum.values[i] *= y.y[i] / mag;
    }
  }
  return inverse_dft(spectrum);
}

HIOState hio_step(const HIOState& state, const MagnitudeMeasurement& y,
                  const HIOParams& params, const SupportMask& support) {
  if (params.beta < 0.0 || params.beta > 1.0)
    throw std::invalid_argument("hio beta must be in [0, 1]");
  return step(state, y, support, FeedbackRule::HIO, params.beta);
}

HIOState er_step(const HIOState& state, const MagnitudeMeasurement& y,
                 const SupportMask& support) {
  return step(state, y, support, FeedbackRule::ER, 0.0);
}

HIOState run_hio(const MagnitudeMeasurement& y, const PaddedField& init,
                 const HIOParams& params, const SupportMask& support) {
  if (params.iterations < 1)
    throw std::invalid_argument("run_hio requires at least one iteration");
  HIOState state{init, 0, {}};
  for (int i = 0; i < params.iterations; ++i) {
    state = params.variant == Variant::ER ? er_step(state, y, support)
                                          : hio_step(state, y, params, support);
  }
  return state;
}

double residual(const PaddedField& field, const MagnitudeMeasurement& y) {
  check_grids(field.m, y.m);
  const PaddedField spectrum = forward_dft(field);
  double sum = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double d = y.y[i] - std::abs(spectrum.values[i]);
    sum += d * d;
  }
  return sum;
}

}  // namespace phaselab
