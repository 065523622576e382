#pragma once

#include <complex>
#include <span>
#include <vector>

namespace bloch {

using cplx = std::complex<double>;

namespace fft {

enum class Direction { forward, backward };

/// In-place unnormalized DFT over every axis of a row-major array
/// (axis 0 slowest). forward: sum f e^{-ikx}; backward: sum c e^{+ikx}.
void transform(std::span<cplx> data, std::span<const int> shape, Direction dir);

/// In-place unnormalized DFT along a single axis.
void transform_axis(std::span<cplx> data, std::span<const int> shape, int axis,
                    Direction dir);

/// Signed wavenumber of DFT bin i on an N-point axis; bin N/2 maps to -N/2.
inline int wavenumber(int i, int n) { return i < n / 2 ? i : i - n; }

/// DFT bin holding wavenumber k (taken modulo n).
inline int bin(int k, int n) {
  int r = k % n;
  return r < 0 ? r + n : r;
}

/// Spectral derivative d/dx_axis on a torus of side 2*pi*period_cells.
/// The Nyquist bin is dropped.
std::vector<cplx> derivative(std::span<const cplx> values, std::span<const int> shape,
                             int axis, double period_cells = 1.0);

}  // namespace fft
}  // namespace bloch
