#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>

#include "cle/error.hpp"

namespace cle::conformal {

using cplx = std::complex<double>;

/// Disk automorphism ψ(ζ) = (ζ − z)/(1 − z̄ζ) sending z to 0.
struct MobiusMap {
  cplx z_center{0.0, 0.0};

  explicit MobiusMap(cplx z = {0.0, 0.0}) : z_center(z) {
    if (!(std::abs(z) < 1.0)) throw DomainError("Mobius centre must lie in the open disk");
  }
};

inline void check_closed_disk(cplx zeta) {
  if (!(std::abs(zeta) <= 1.0 + 1e-12)) throw DomainError("argument must lie in the closed disk");
}

inline cplx mobius_apply(const MobiusMap& m, cplx zeta) {
  check_closed_disk(zeta);
  const cplx den = 1.0 - std::conj(m.z_center) * zeta;
  if (std::abs(den) < 1e-14) throw NumericalError("Mobius denominator vanished");
  return (zeta - m.z_center) / den;
}

inline cplx mobius_inverse_apply(const MobiusMap& m, cplx zeta) {
  check_closed_disk(zeta);
  const cplx den = 1.0 + std::conj(m.z_center) * zeta;
  if (std::abs(den) < 1e-14) throw NumericalError("Mobius denominator vanished");
  return (m.z_center + zeta) / den;
}

/// ψ′(ζ) = (1 − |z|²)/(1 − z̄ζ)².
inline cplx mobius_derivative(const MobiusMap& m, cplx zeta) {
  const cplx den = 1.0 - std::conj(m.z_center) * zeta;
  return (1.0 - std::norm(m.z_center)) / (den * den);
}

struct SamplePair {
  cplx zeta;   // point of the closed unit disk
  cplx image;  // f(zeta)
};

struct DistortionReport {
  double cr = 0.0;
  double dist = std::numeric_limits<double>::infinity();
  double rad = 0.0;
  std::size_t boundary_samples = 0;
  std::map<std::string, bool> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& kv) { return kv.second; });
  }
};

/// Sampled Koebe-type bounds for a conformal map f of the disk with f(0) = w
/// and |f′(0)| = cr:
///   growth_lower: |ζ|/4 ≤ |f(ζ) − w|/cr for every sample;
///   growth_upper: |f(ζ) − w|/cr ≤ 4|ζ| for samples with |ζ| ≤ 1/2;
///   dist_le_cr, cr_le_4dist, cr_le_rad: dist ≤ cr ≤ min(4·dist, rad).
/// dist and rad come from the samples with |ζ| = 1 and are only checked when
/// such samples exist. `rel_tol` absorbs rounding in the comparisons.
inline DistortionReport verify_distortion(std::span<const SamplePair> samples, cplx w, double cr,
                                          double rel_tol = 1e-9) {
  if (!(cr > 0.0)) throw DomainError("conformal radius must be positive");
  DistortionReport rep;
  rep.cr = cr;
  bool lower = true, upper = true;
  for (const auto& s : samples) {
    const double r = std::abs(s.zeta);
    const double q = std::abs(s.image - w) / cr;
    if (r / 4.0 > q * (1.0 + rel_tol) + rel_tol) lower = false;
    if (r <= 0.5 && q > 4.0 * r * (1.0 + rel_tol) + rel_tol) upper = false;
    if (std::abs(r - 1.0) <= 1e-12) {
      ++rep.boundary_samples;
      const double d = std::abs(s.image - w);
      rep.dist = std::min(rep.dist, d);
      rep.rad = std::max(rep.rad, d);
    }
  }
  rep.checks["growth_lower"] = lower;
  rep.checks["growth_upper"] = upper;
  if (rep.boundary_samples > 0) {
    const double slack = 1.0 + rel_tol;
    rep.checks["dist_le_cr"] = rep.dist <= cr * slack;
    rep.checks["cr_le_4dist"] = cr <= 4.0 * rep.dist * slack;
    rep.checks["cr_le_rad"] = cr <= rep.rad * slack;
  } else {
    rep.dist = 0.0;
  }
  return rep;
}

}  // namespace cle::conformal
