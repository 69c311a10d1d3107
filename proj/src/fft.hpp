#pragma once

#include <complex>

namespace phaselab::detail {

/// In-place unnormalized 2-D DFT of an m x m row-major complex array.
/// Thread-safe; plans are cached per size.
void dft2d(std::complex<double>* data, int m, bool forward);

}  // namespace phaselab::detail
