#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>

namespace cle::geometry {

using cplx = std::complex<double>;

/// Winding number of the closed polyline `poly` (last vertex joined to the
/// first) around `p`, from the summed turning angles.
inline int winding_number(std::span<const cplx> poly, cplx p) {
  if (poly.size() < 2) return 0;
  double total = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const cplx a = poly[i] - p;
    const cplx b = poly[(i + 1) % poly.size()] - p;
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace cle::geometry
