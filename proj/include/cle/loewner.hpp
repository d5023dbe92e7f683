#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cle/diffusion.hpp"
#include "cle/error.hpp"

namespace cle::loewner {

using cplx = std::complex<double>;
using diffusion::DiffusionParams;
using diffusion::kTwoPi;

inline constexpr double kEpsSwallow = 1e-4;
inline constexpr double kEpsTip = 1e-6;

// ---------------------------------------------------------------------------
// Slit maps
//
// With driving value 1 held fixed for a time Δ, the radial Loewner flow
// conserves e^{t}·F(g) for F(x) = (x+1)²/x. Hence g solves F(g) = e^{−Δ}F(z),
// a quadratic whose two roots have product 1; the root inside the disk is
// 2u/(1 − 2u + √(1−4u)) with u = e^{Δ}z/(z+1)². The inverse map is the same
// expression with Δ replaced by −Δ.

/// Root of F(g) = F(z)/e_delta inside the closed disk; `e_delta` = e^{±Δ}.
/// Written out in real arithmetic: this is the innermost loop of every trace.
inline cplx slit_map(cplx z, double e_delta) {
  const double x = z.real(), y = z.imag();
  if (x == 0.0 && y == 0.0) return z;
  const double px = x + 1.0;
  const double qx = px * px - y * y, qy = 2.0 * px * y;  // (z+1)²
  const double qn = qx * qx + qy * qy;
  if (qn < 1e-300) return cplx(-1.0, 0.0);
  const double f = e_delta / qn;
  const double ux = f * (x * qx + y * qy), uy = f * (y * qx - x * qy);
  // r = principal √(1 − 4u)
  const double sx = 1.0 - 4.0 * ux, sy = -4.0 * uy;
  const double sm = std::sqrt(sx * sx + sy * sy);
  const double rx = std::sqrt(0.5 * std::max(0.0, sm + sx));
  const double ry = std::copysign(std::sqrt(0.5 * std::max(0.0, sm - sx)), sy);
  const double mx = 1.0 - 2.0 * ux, my = -2.0 * uy;
  // |m + r| ≥ |m − r| iff Re(m·r̄) ≥ 0
  const double sg = (mx * rx + my * ry) >= 0.0 ? 1.0 : -1.0;
  const double ax = mx + sg * rx, ay = my + sg * ry;
  const double an = ax * ax + ay * ay;
  const double k = 2.0 / an;
  const double gx = k * (ux * ax + uy * ay), gy = k * (uy * ax - ux * ay);
  // On the circle the roots are g and ḡ, too close in modulus for the test
  // above; the map preserves each half of the disk, which picks the root.
  if (std::abs(gx * gx + gy * gy - 1.0) < 1e-9 && gy * y < 0.0) return cplx(gx, -gy);
  return cplx(gx, gy);
}

/// Derivative of the map above at z, given its value g there.
inline cplx slit_map_derivative(cplx z, cplx g, double e_delta) {
  if (z == cplx(0.0, 0.0)) return cplx(e_delta, 0.0);
  // F′(g)·g′ = F′(z)/e_delta with F′(x) = 1 − 1/x².
  return (1.0 - 1.0 / (z * z)) / (e_delta * (1.0 - 1.0 / (g * g)));
}

/// Tip of the slit grown from 1 during time Δ: the preimage of 1.
inline double slit_tip(double delta) {
  const double u = 0.25 * std::exp(-delta);
  return 2.0 * u / (1.0 - 2.0 * u + std::sqrt(1.0 - 4.0 * u));
}

// ---------------------------------------------------------------------------
// Driver

/// Driving process on a uniform grid. Interval j (from t_{j−1} to t_j) is
/// driven by the constant value W_j, so every map evaluation is a finite
/// composition of exact slit maps.
struct RadialDriver {
  double dt = 1e-3;
  double kappa = 6.0;
  double rho = 0.0;
  std::vector<double> arg_w;                // unwrapped arg W_t
  std::vector<cplx> w_values;
  std::vector<double> brownian_increments;  // ΔB_k, k = 0..N−1
  diffusion::ThetaPath theta;               // θ_t with boundary annotations

  std::size_t steps() const { return w_values.empty() ? 0 : w_values.size() - 1; }
  double horizon() const { return dt * static_cast<double>(steps()); }
  double time(std::size_t k) const { return dt * static_cast<double>(k); }
  std::vector<double> times() const {
    std::vector<double> t(w_values.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = time(k);
    return t;
  }
  const std::vector<double>& theta_values() const { return theta.values; }

  /// Force point O_t = W_t·e^{−iθ_t}.
  cplx force_point(std::size_t k) const {
    return w_values[k] * std::polar(1.0, -theta.values.at(k));
  }

  /// Grid index of time t; throws unless t is a grid time.
  std::size_t index_of(double t) const {
    if (!(t >= -1e-12)) throw DomainError("negative time");
    const double pos = t / dt;
    const double r = std::round(pos);
    if (std::abs(pos - r) > 1e-6) throw DomainError("time is not on the driver grid");
    const auto k = static_cast<std::size_t>(r);
    if (k > steps()) throw DomainError("time beyond the driver horizon");
    return k;
  }

  /// Driver with prescribed angles (θ fixed at π), mainly for deterministic tests.
  static RadialDriver from_angles(double dt, std::span<const double> angles, double kappa = 6.0,
                                  double rho = 0.0) {
    RadialDriver d;
    d.dt = dt;
    d.kappa = kappa;
    d.rho = rho;
    d.arg_w.assign(angles.begin(), angles.end());
    for (double a : angles) d.w_values.push_back(std::polar(1.0, a));
    d.brownian_increments.assign(angles.empty() ? 0 : angles.size() - 1, 0.0);
    d.theta.dt = dt;
    d.theta.values.assign(angles.size(), diffusion::kPi);
    d.theta.touches.assign(angles.size(), diffusion::Touch::none);
    return d;
  }
};

/// arg W increments from the θ path and its Gaussian draws. Under the
/// implicit scheme the drift integral of interval k is recovered exactly from
/// the step equation, (θ_{k+1} − θ_k − √κ ΔB_k)/c with c = (ρ+2)/2, i.e. a
/// right-point rule consistent with θ. The explicit scheme uses the
/// trapezoidal rule on the capped integrand.
inline RadialDriver assemble_driver(const DiffusionParams& params, diffusion::ThetaPath path,
                                    std::span<const double> gaussians, cplx w0) {
  if (std::abs(std::abs(w0) - 1.0) > 1e-9) throw DomainError("w0 must have unit modulus");
  RadialDriver d;
  d.dt = params.dt;
  d.kappa = params.kappa;
  d.rho = params.rho;
  const std::size_t n = gaussians.size();
  const double sqdt = std::sqrt(params.dt);
  const double sk = std::sqrt(params.kappa);
  const double c = 0.5 * (params.rho + 2.0);
  d.brownian_increments.resize(n);
  d.arg_w.resize(n + 1);
  d.w_values.resize(n + 1);
  d.arg_w[0] = std::arg(w0);
  const double cot_cap = params.drift_cap() / c;
  auto capped_cot = [&](double th) {
    if (th <= 0.0) return cot_cap;
    if (th >= kTwoPi) return -cot_cap;
    return std::clamp(std::cos(0.5 * th) / std::sin(0.5 * th), -cot_cap, cot_cap);
  };
  for (std::size_t k = 0; k < n; ++k) {
    const double db = sqdt * gaussians[k];
    d.brownian_increments[k] = db;
    double integral;
    if (params.scheme == diffusion::StepScheme::implicit_bridge)
      integral = (path.values[k + 1] - path.values[k] - sk * db) / c;
    else
      integral = 0.5 * params.dt * (capped_cot(path.values[k]) + capped_cot(path.values[k + 1]));
    d.arg_w[k + 1] = d.arg_w[k] + sk * db + 0.5 * params.rho * integral;
  }
  d.w_values[0] = w0;
  for (std::size_t k = 1; k <= n; ++k) d.w_values[k] = std::polar(1.0, d.arg_w[k]);
  d.theta = std::move(path);
  return d;
}

inline RadialDriver build_driver(const DiffusionParams& params, double horizon, std::uint64_t seed,
                                 cplx w0 = {1.0, 0.0}, double theta0 = 0.0,
                                 double h_exc = diffusion::kDefaultExcursion) {
  std::vector<double> g;
  auto path = diffusion::simulate_theta(params, theta0, horizon, seed, h_exc, &g);
  return assemble_driver(params, std::move(path), g, w0);
}

// ---------------------------------------------------------------------------
// Forward flow

enum class FlowStatus { alive, swallowed };

struct FlowResult {
  FlowStatus status = FlowStatus::alive;
  cplx value{0.0, 0.0};
  std::optional<double> swallow_time;
  bool alive() const { return status == FlowStatus::alive; }
};

namespace detail {

/// Splits t into k full intervals plus a fractional remainder in [0, dt).
inline std::pair<std::size_t, double> split_time(const RadialDriver& d, double t) {
  if (!(t >= 0.0)) throw DomainError("time must be non-negative");
  if (t > d.horizon() + 1e-9 * d.dt) throw DomainError("time beyond the driver horizon");
  const double pos = t / d.dt;
  auto k = static_cast<std::size_t>(std::floor(pos + 1e-9));
  k = std::min(k, d.steps());
  double rem = t - d.time(k);
  if (rem < 1e-12 * d.dt) rem = 0.0;
  return {k, rem};
}

}  // namespace detail

/// g_t(z), following the composition of slit maps. A point is swallowed when
/// it leaves the open disk or comes within ε_swallow of the driving value at
/// an intermediate grid time.
inline FlowResult flow_point(const RadialDriver& d, cplx z, double t, double eps_swallow = kEpsSwallow,
                             cplx* derivative = nullptr) {
  if (!(std::abs(z) < 1.0)) throw DomainError("flow_point requires |z| < 1");
  const auto [k, rem] = detail::split_time(d, t);
  const double e_dt = std::exp(d.dt);
  FlowResult res;
  cplx g = z;
  cplx der(1.0, 0.0);
  auto advance = [&](std::size_t j, double e_delta) -> bool {
    const cplx w = d.w_values[j];
    const cplx zr = g * std::conj(w);
    const cplx gr = slit_map(zr, e_delta);
    if (derivative) der *= slit_map_derivative(zr, gr, e_delta);
    g = gr * w;
    return std::norm(gr) < 1.0 && std::isfinite(gr.real()) && std::isfinite(gr.imag());
  };
  for (std::size_t j = 1; j <= k; ++j) {
    const bool inside = advance(j, e_dt);
    const bool last = (j == k && rem == 0.0);
    if (!inside || (!last && std::abs(g - d.w_values[j]) < eps_swallow)) {
      res.status = FlowStatus::swallowed;
      res.swallow_time = d.time(j);
      return res;
    }
  }
  if (rem > 0.0 && !advance(k + 1, std::exp(rem))) {
    res.status = FlowStatus::swallowed;
    res.swallow_time = t;
    return res;
  }
  res.value = g;
  if (derivative) *derivative = der;
  return res;
}

/// g_t′(z) along the flow (chain rule through the slit maps).
inline cplx flow_derivative(const RadialDriver& d, cplx z, double t) {
  cplx der;
  const auto r = flow_point(d, z, t, kEpsSwallow, &der);
  if (!r.alive()) throw DomainError("flow_derivative at a swallowed point");
  return der;
}

/// |g_t′(0)|; equals e^t for the log-conformal-radius parametrization.
inline double derivative_at_origin(const RadialDriver& d, double t) {
  return std::abs(flow_derivative(d, cplx(0.0, 0.0), t));
}

// ---------------------------------------------------------------------------
// Inverse maps and traces

/// g_{t_{k0}} ∘ g_{t_k}^{-1} applied to w in the closed disk: the inverse
/// maps of intervals k, k−1, …, k0+1 in turn.
inline cplx inverse_map(const RadialDriver& d, std::size_t k, cplx w, std::size_t k0 = 0) {
  const double e_mdt = std::exp(-d.dt);
  for (std::size_t j = k; j > k0; --j) {
    const cplx wj = d.w_values[j];
    w = slit_map(w * std::conj(wj), e_mdt) * wj;
  }
  return w;
}

/// Trace point at grid index k, in the frame of time t_{k0}: the image of the
/// tip of slit k under the inverse maps of intervals k−1, …, k0+1.
inline cplx trace_point_index(const RadialDriver& d, std::size_t k, std::size_t k0 = 0) {
  if (k > d.steps() || k0 > k) throw DomainError("trace index out of range");
  if (k == k0) return d.w_values[k];
  const cplx tip = d.w_values[k] * slit_tip(d.dt);
  const cplx p = inverse_map(d, k - 1, tip, k0);
  const double m = std::abs(p);
  if (!std::isfinite(m) || m > 1.0 + 1e-6)
    throw TraceError("reverse flow left the closed disk", d.time(k), m);
  return p;
}

/// Both ends of slit k seen in the frame of t_{k0}: the tip η(t_k) and the
/// base, the boundary point of the hull at t_{k−1} from which the slit grows.
/// On a piecewise-constant driver the base need not sit at η(t_{k−1}).
struct SlitEnds {
  cplx tip;
  cplx base;
};

inline SlitEnds slit_ends_index(const RadialDriver& d, std::size_t k, std::size_t k0 = 0) {
  if (k > d.steps() || k0 >= k) throw DomainError("slit index out of range");
  cplx tip = d.w_values[k] * slit_tip(d.dt);
  cplx base = d.w_values[k];
  const double e_mdt = std::exp(-d.dt);
  for (std::size_t j = k - 1; j > k0; --j) {
    const cplx wj = d.w_values[j];
    const cplx wc = std::conj(wj);
    tip = slit_map(tip * wc, e_mdt) * wj;
    base = slit_map(base * wc, e_mdt) * wj;
  }
  const double m = std::abs(tip);
  if (!std::isfinite(m) || m > 1.0 + 1e-6) throw TraceError("reverse flow left the closed disk", d.time(k), m);
  return {tip, base};
}

inline cplx trace_point(const RadialDriver& d, double t) { return trace_point_index(d, d.index_of(t)); }

struct Trace {
  std::vector<double> times;
  std::vector<cplx> points;
  std::size_t size() const { return points.size(); }
};

inline Trace trace_curve(const RadialDriver& d, std::size_t stride, std::size_t k0 = 0,
                         std::optional<std::size_t> k_end = std::nullopt) {
  if (stride == 0) throw DomainError("stride must be at least 1");
  const std::size_t last = k_end.value_or(d.steps());
  if (last > d.steps() || k0 > last) throw DomainError("trace range out of bounds");
  Trace tr;
  for (std::size_t k = k0;; k += stride) {
    if (k > last) k = last;
    tr.times.push_back(d.time(k));
    tr.points.push_back(trace_point_index(d, k, k0));
    if (k == last) break;
  }
  return tr;
}

/// Image of a boundary point w of the disk under g_{t_{k0}} ∘ g_{t_k}^{-1},
/// with the grid index of the slit it lands on, which is the time at which
/// the curve created that piece of boundary. No index means the point lies
/// on the unit circle of the frame.
struct BoundaryPreimage {
  cplx point;
  std::optional<std::size_t> slit;
};

inline BoundaryPreimage boundary_preimage(const RadialDriver& d, std::size_t k, cplx w, std::size_t k0 = 0) {
  const double e_mdt = std::exp(-d.dt);
  // Circle points within this angle of the driving value land on the slit.
  const double cos_edge = 2.0 * e_mdt - 1.0;
  BoundaryPreimage out;
  w /= std::abs(w);
  for (std::size_t j = k; j > k0; --j) {
    const cplx wj = d.w_values[j];
    const cplx rel = w * std::conj(wj);
    if (!out.slit && rel.real() > cos_edge) out.slit = j;
    w = slit_map(rel, e_mdt) * wj;
    if (!out.slit) w *= 1.5 - 0.5 * std::norm(w);  // keep circle points on the circle
  }
  out.point = w;
  return out;
}

/// Images of `count` boundary points e^{iφ} under g_{t_k}^{-1}, with a φ-grid
/// aligned to arg W_k so that the trace tip (the image of W_k) is always a sample.
inline std::vector<cplx> boundary_image(const RadialDriver& d, std::size_t k, std::size_t count,
                                        std::size_t k0 = 0) {
  std::vector<cplx> out;
  out.reserve(count);
  const double base = d.arg_w[k];
  for (std::size_t i = 0; i < count; ++i) {
    const double phi = base + kTwoPi * static_cast<double>(i) / static_cast<double>(count);
    out.push_back(boundary_preimage(d, k, std::polar(1.0, phi), k0).point);
  }
  return out;
}

}  // namespace cle::loewner
