#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cle/error.hpp"
#include "cle/parallel.hpp"
#include "cle/rng.hpp"
#include "cle/stats.hpp"

namespace cle::diffusion {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Exponents

/// Exact rational number with a positive denominator in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  constexpr Rational() = default;
  constexpr Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) {
    if (den == 0) throw DomainError("rational with zero denominator");
    if (den < 0) num = -num, den = -den;
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) num /= g, den /= g;
  }
  constexpr double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend constexpr Rational operator+(Rational a, Rational b) {
    return {a.num * b.den + b.num * a.den, a.den * b.den};
  }
  friend constexpr Rational operator-(Rational a, Rational b) {
    return {a.num * b.den - b.num * a.den, a.den * b.den};
  }
  friend constexpr Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
  friend constexpr Rational operator/(Rational a, Rational b) {
    if (b.num == 0) throw DomainError("rational division by zero");
    return {a.num * b.den, a.den * b.num};
  }
  friend constexpr bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
  friend constexpr auto operator<=>(Rational a, Rational b) { return a.num * b.den <=> b.num * a.den; }
};

inline double alpha_exponent(double kappa) {
  if (!(kappa >= 8.0 / 3.0 - 1e-12 && kappa <= 8.0 + 1e-12))
    throw DomainError("alpha_exponent requires 8/3 <= kappa <= 8, got " + std::to_string(kappa));
  return (8.0 - kappa) * (3.0 * kappa - 8.0) / (32.0 * kappa);
}

inline Rational alpha_exponent(Rational kappa) {
  if (kappa < Rational(8, 3) || kappa > Rational(8))
    throw DomainError("alpha_exponent requires 8/3 <= kappa <= 8");
  return (Rational(8) - kappa) * (Rational(3) * kappa - Rational(8)) / (Rational(32) * kappa);
}

inline double bessel_dimension(double kappa) {
  if (!(kappa > 0)) throw DomainError("bessel_dimension requires kappa > 0");
  return 1.0 + 2.0 * (kappa - 4.0) / kappa;
}

/// ((ρ+2)/2)·cot(θ/2) on the open interval (0, 2π).
inline double theta_drift(double theta, double rho) {
  if (!(theta > 0.0 && theta < kTwoPi))
    throw BoundaryError("theta_drift evaluated at or beyond the boundary {0, 2pi}");
  const double half = 0.5 * theta;
  return 0.5 * (rho + 2.0) * std::cos(half) / std::sin(half);
}

// ---------------------------------------------------------------------------
// Parameters

enum class Reflection { mirror };

enum class StepScheme {
  implicit_bridge,  // drift-implicit Euler with Bessel-bridge boundary detection
  euler_mirror,     // capped explicit Euler with mirror reflection
};

struct DiffusionParams {
  double kappa = 6.0;
  double rho = 0.0;
  double dt = 1e-3;
  Reflection reflection = Reflection::mirror;
  StepScheme scheme = StepScheme::implicit_bridge;

  static DiffusionParams for_kappa(double kappa, double dt = 1e-3,
                                   StepScheme scheme = StepScheme::implicit_bridge) {
    DiffusionParams p;
    p.kappa = kappa;
    p.rho = kappa - 6.0;
    p.dt = dt;
    p.scheme = scheme;
    return p;
  }

  double delta() const { return bessel_dimension(kappa); }

  /// Dimension of the Bessel process that θ/√κ resembles near either boundary.
  double boundary_dimension() const { return 1.0 + 2.0 * (rho + 2.0) / kappa; }

  double drift_cap() const { return 2.0 * std::sqrt(kappa) / std::sqrt(dt); }

  void validate() const {
    if (!(kappa > 8.0 / 3.0 && kappa < 8.0))
      throw DomainError("kappa must lie strictly inside (8/3, 8), got " + std::to_string(kappa));
    if (!(rho > -2.0)) throw DomainError("rho must exceed -2, got " + std::to_string(rho));
    if (!(dt > 0.0 && dt <= 1e-2))
      throw DomainError("dt must lie in (0, 1e-2], got " + std::to_string(dt));
  }
};

/// Number of grid steps needed to reach `horizon`.
inline std::size_t steps_for(double horizon, double dt) {
  if (!(horizon >= 0.0)) throw DomainError("horizon must be non-negative");
  return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

// ---------------------------------------------------------------------------
// Explicit step

/// Capped Euler–Maruyama proposal followed by mirror reflection into [0, 2π].
inline double step_theta(double theta, double dt, double gaussian, const DiffusionParams& params) {
  const double cap = 2.0 * std::sqrt(params.kappa) / std::sqrt(dt);
  double drift;
  if (theta <= 0.0)
    drift = cap;
  else if (theta >= kTwoPi)
    drift = -cap;
  else
    drift = std::clamp(theta_drift(theta, params.rho), -cap, cap);
  double x = theta + drift * dt + std::sqrt(params.kappa * dt) * gaussian;
  // Repeated folding handles overshoots larger than one period.
  for (int i = 0; i < 64 && (x < 0.0 || x > kTwoPi); ++i) x = x < 0.0 ? -x : 2.0 * kTwoPi - x;
  return std::clamp(x, 0.0, kTwoPi);
}

// ---------------------------------------------------------------------------
// Implicit step and bridge probabilities

inline void sincos_half(double x, double& s, double& c) {
#if defined(__GNUC__)
  __builtin_sincos(0.5 * x, &s, &c);
#else
  s = std::sin(0.5 * x);
  c = std::cos(0.5 * x);
#endif
}

/// Solves x − c·cot(x/2)·dt = y for x ∈ (0, 2π). The left side is strictly
/// increasing from −∞ to +∞, so the root is unique and monotone in y.
inline double implicit_solve(double y, double c, double dt) {
  const bool upper = y >= kPi;
  const double yy = upper ? kTwoPi - y : y;
  // cot(x/2) ≈ 2/x gives the quadratic x² − yy·x − 2c·dt = 0, accurate near
  // the boundary; elsewhere y itself is within O(dt) of the root.
  double x = yy > 0.5 ? yy : 0.5 * (yy + std::sqrt(yy * yy + 8.0 * c * dt));
  if (upper) x = kTwoPi - x;
  double s, co;
  sincos_half(x, s, co);
  for (int it = 0; it < 60; ++it) {
    const double f = x - c * co / s * dt - y;
    const double fp = 1.0 + 0.5 * c * dt / (s * s);
    double xn = x - f / fp;
    if (xn <= 0.0) xn = 0.5 * x;
    if (xn >= kTwoPi) xn = 0.5 * (x + kTwoPi);
    // Newton error after this step is about K·step² with K = |f''|/(2f').
    const double step = xn - x;
    const double k = 0.25 * c * dt * std::abs(co) / (s * s * s * fp);
    if (step * step * k < 1e-16 || std::abs(step) < 1e-14) return xn;
    x = xn;
    const double h = 0.5 * step;
    if (std::abs(h) < 0.02) {
      // Rotate (sin, cos) of x/2 by h; the Taylor tails are below 1e-17.
      const double h2 = h * h;
      const double sh = h * (1.0 - h2 / 6.0 * (1.0 - h2 / 20.0));
      const double ch = 1.0 - 0.5 * h2 * (1.0 - h2 / 12.0 * (1.0 - h2 / 30.0));
      const double sn = s * ch + co * sh;
      co = co * ch - s * sh;
      s = sn;
    } else {
      sincos_half(x, s, co);
    }
  }
  return x;
}

/// Probability that a Bessel bridge of dimension d ∈ (0, 2) between distances
/// a and b (in units of the boundary coordinate θ, diffusivity κ) touches 0
/// within time dt. Tabulated in √z for z = ab/(κ dt) ∈ [z_lo, z_hi].
class BridgeTable {
 public:
  BridgeTable(double kappa, double dt, double dimension) : kappa_dt_(kappa * dt) {
    nu_ = 1.0 - 0.5 * dimension;
    if (nu_ <= 0.0) return;  // dimension ≥ 2: boundary is polar
    sin_term_ = 2.0 / kPi * std::sin(nu_ * kPi);
    const double s_lo = std::sqrt(kZLo), s_hi = std::sqrt(kZHi);
    ds_ = (s_hi - s_lo) / (kNodes - 1);
    table_.resize(kNodes);
    for (std::size_t i = 0; i < kNodes; ++i) {
      const double s = s_lo + ds_ * static_cast<double>(i);
      table_[i] = exact(s * s);
    }
  }

  /// 1 − I_ν(z)/I_{−ν}(z), evaluated without cancellation.
  double exact(double z) const {
    if (nu_ <= 0.0 || z >= kZHi) return 0.0;
    if (z <= 0.0) return 1.0;
    const double k = std::cyl_bessel_k(nu_, z);
    const double i_pos = std::cyl_bessel_i(nu_, z);
    const double i_neg = i_pos + sin_term_ * k;
    return std::clamp(sin_term_ * k / i_neg, 0.0, 1.0);
  }

  double probability(double a, double b) const {
    if (nu_ <= 0.0) return 0.0;
    const double z = a * b / kappa_dt_;
    if (z >= kZHi) return 0.0;
    if (z < kZLo) return exact(z);
    const double pos = (std::sqrt(z) - std::sqrt(kZLo)) / ds_;
    const std::size_t i = std::min(static_cast<std::size_t>(pos), kNodes - 2);
    const double f = pos - static_cast<double>(i);
    return table_[i] + f * (table_[i + 1] - table_[i]);
  }

 private:
  static constexpr double kZLo = 0.05;
  static constexpr double kZHi = 30.0;
  static constexpr std::size_t kNodes = 4096;
  double kappa_dt_;
  double nu_ = 0.0;
  double sin_term_ = 0.0;
  double ds_ = 0.0;
  std::vector<double> table_;
};

/// Tables are costly to build and depend only on (κ dt, dimension), so they
/// are shared process-wide.
inline std::shared_ptr<const BridgeTable> shared_bridge_table(double kappa, double dt, double dimension) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, double>, std::shared_ptr<const BridgeTable>> cache;
  const std::lock_guard lock(mu);
  auto& slot = cache[{kappa, dt, dimension}];
  if (!slot) slot = std::make_shared<const BridgeTable>(kappa, dt, dimension);
  return slot;
}

enum class Touch : std::uint8_t { none = 0, low = 1, high = 2 };

struct StepResult {
  double value;
  Touch touch;
};

/// One step of the configured scheme. Immutable after construction and safe
/// to share across threads.
class ThetaStepper {
 public:
  explicit ThetaStepper(const DiffusionParams& params)
      : params_(params),
        sigma_(std::sqrt(params.kappa * params.dt)),
        c_(0.5 * (params.rho + 2.0)) {
    params_.validate();
    if (params_.scheme == StepScheme::implicit_bridge)
      bridge_ = shared_bridge_table(params.kappa, params.dt, params.boundary_dimension());
  }

  const DiffusionParams& params() const { return params_; }
  double sigma() const { return sigma_; }
  bool uses_uniform() const { return params_.scheme == StepScheme::implicit_bridge; }

  StepResult advance(double theta, double gaussian, double uniform) const {
    if (params_.scheme == StepScheme::euler_mirror) {
      const double cap = params_.drift_cap();
      double drift = theta <= 0.0 ? cap
                     : theta >= kTwoPi ? -cap
                                       : std::clamp(theta_drift(theta, params_.rho), -cap, cap);
      const double proposal = theta + drift * params_.dt + sigma_ * gaussian;
      const Touch touch = proposal <= 0.0 ? Touch::low : proposal >= kTwoPi ? Touch::high : Touch::none;
      return {step_theta(theta, params_.dt, gaussian, params_), touch};
    }
    const double x = implicit_solve(theta + sigma_ * gaussian, c_, params_.dt);
    // Only the boundary nearer to the step is tested; the far one is out of
    // reach of a bridge this short.
    if (theta + x < kTwoPi) {
      if (uniform < bridge_->probability(theta, x)) return {x, Touch::low};
    } else {
      if (uniform < bridge_->probability(kTwoPi - theta, kTwoPi - x)) return {x, Touch::high};
    }
    return {x, Touch::none};
  }

  /// Draws the step noise in the fixed order (normal, then uniform).
  StepResult advance(double theta, StreamRng& rng) const {
    const double g = rng.normal();
    const double u = uses_uniform() ? rng.uniform() : 0.0;
    return advance(theta, g, u);
  }

 private:
  DiffusionParams params_;
  double sigma_;
  double c_;
  std::shared_ptr<const BridgeTable> bridge_;
};

// ---------------------------------------------------------------------------
// Paths

inline constexpr double kDefaultExcursion = 0.2;

struct ThetaPath {
  double dt = 0.0;
  std::vector<double> values;
  std::vector<Touch> touches;        // boundary contact during the step ending at each point
  std::optional<double> first_hit_2pi;
  std::vector<double> zeros;         // recorded (macroscopic) zeros

  std::size_t size() const { return values.size(); }
  double time(std::size_t k) const { return static_cast<double>(k) * dt; }
  std::vector<double> times() const {
    std::vector<double> t(values.size());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = time(k);
    return t;
  }
  bool at_low(std::size_t k) const { return touches[k] == Touch::low || values[k] <= 0.0; }
  bool at_high(std::size_t k) const { return touches[k] == Touch::high || values[k] >= kTwoPi; }
};

/// Indices of recorded zeros: boundary contacts at 0 preceded, since the
/// previous recorded zero (or the start), by a value above h_exc. A start at
/// θ0 = 0 is itself a recorded zero.
inline std::vector<std::size_t> recorded_zero_indices(const ThetaPath& path, double h_exc) {
  std::vector<std::size_t> out;
  if (path.values.empty()) return out;
  bool armed = path.values[0] > h_exc;
  if (path.at_low(0)) {
    out.push_back(0);
    armed = false;
  }
  for (std::size_t k = 1; k < path.values.size(); ++k) {
    if (armed && path.at_low(k)) {
      out.push_back(k);
      armed = false;
    }
    if (path.values[k] > h_exc) armed = true;
  }
  return out;
}

inline void annotate_path(ThetaPath& path, double h_exc) {
  path.first_hit_2pi.reset();
  for (std::size_t k = 0; k < path.values.size(); ++k)
    if (path.at_high(k)) {
      path.first_hit_2pi = path.time(k);
      break;
    }
  path.zeros.clear();
  for (std::size_t k : recorded_zero_indices(path, h_exc)) path.zeros.push_back(path.time(k));
}

inline void check_theta0(double theta0) {
  if (!(theta0 >= 0.0 && theta0 <= kTwoPi)) throw DomainError("theta0 must lie in [0, 2pi]");
}

/// Path driven by explicit noise. `uniforms` may be empty for the Euler scheme.
inline ThetaPath simulate_theta_noise(const DiffusionParams& params, double theta0,
                                      std::span<const double> gaussians,
                                      std::span<const double> uniforms = {},
                                      double h_exc = kDefaultExcursion) {
  check_theta0(theta0);
  const ThetaStepper stepper(params);
  if (stepper.uses_uniform() && uniforms.size() < gaussians.size())
    throw DomainError("implicit scheme needs one uniform per step");
  ThetaPath path;
  path.dt = params.dt;
  path.values.reserve(gaussians.size() + 1);
  path.touches.reserve(gaussians.size() + 1);
  path.values.push_back(theta0);
  path.touches.push_back(Touch::none);
  double theta = theta0;
  for (std::size_t k = 0; k < gaussians.size(); ++k) {
    const StepResult r = stepper.advance(theta, gaussians[k], uniforms.empty() ? 0.0 : uniforms[k]);
    theta = r.value;
    path.values.push_back(theta);
    path.touches.push_back(r.touch);
  }
  annotate_path(path, h_exc);
  return path;
}

/// Seeded path; `gaussians_out` receives the per-step normal draws.
inline ThetaPath simulate_theta(const DiffusionParams& params, double theta0, double horizon,
                                std::uint64_t seed, double h_exc = kDefaultExcursion,
                                std::vector<double>* gaussians_out = nullptr) {
  check_theta0(theta0);
  const ThetaStepper stepper(params);
  const std::size_t n = steps_for(horizon, params.dt);
  StreamRng rng(seed);
  ThetaPath path;
  path.dt = params.dt;
  path.values.reserve(n + 1);
  path.touches.reserve(n + 1);
  path.values.push_back(theta0);
  path.touches.push_back(Touch::none);
  if (gaussians_out) {
    gaussians_out->clear();
    gaussians_out->reserve(n);
  }
  double theta = theta0;
  for (std::size_t k = 0; k < n; ++k) {
    const double g = rng.normal();
    const double u = stepper.uses_uniform() ? rng.uniform() : 0.0;
    const StepResult r = stepper.advance(theta, g, u);
    theta = r.value;
    path.values.push_back(theta);
    path.touches.push_back(r.touch);
    if (gaussians_out) gaussians_out->push_back(g);
  }
  annotate_path(path, h_exc);
  return path;
}

/// Fraction of grid points in contact with {0, 2π}.
inline double boundary_fraction(const ThetaPath& path) {
  if (path.values.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < path.values.size(); ++k) hits += (path.at_low(k) || path.at_high(k));
  return static_cast<double>(hits) / static_cast<double>(path.values.size());
}

/// Step index of the first high touch within n steps, or n + 1.
inline std::size_t first_high_index(const ThetaStepper& stepper, double theta0, std::size_t n,
                                    StreamRng& rng) {
  if (theta0 >= kTwoPi) return 0;
  double theta = theta0;
  for (std::size_t k = 1; k <= n; ++k) {
    const StepResult r = stepper.advance(theta, rng);
    if (r.touch == Touch::high || r.value >= kTwoPi) return k;
    theta = r.value;
  }
  return n + 1;
}

// ---------------------------------------------------------------------------
// Survival

struct SurvivalEstimate {
  double horizon = 0.0;
  double probability = 1.0;
  double std_error = 0.0;
  std::size_t n_paths = 0;
  bool warning = false;  // n_paths below the recommended 10³
};

inline constexpr std::size_t kMinPaths = 1000;

inline std::vector<SurvivalEstimate> survival_curve(const DiffusionParams& params,
                                                    std::span<const double> horizons,
                                                    std::size_t n_paths, std::uint64_t seed,
                                                    unsigned workers = 1, double theta0 = 0.0) {
  check_theta0(theta0);
  if (n_paths == 0) throw DomainError("survival_curve needs n_paths > 0");
  for (std::size_t i = 1; i < horizons.size(); ++i)
    if (!(horizons[i] > horizons[i - 1])) throw DomainError("horizons must be increasing");
  const ThetaStepper stepper(params);
  std::vector<std::size_t> steps(horizons.size());
  for (std::size_t i = 0; i < horizons.size(); ++i) steps[i] = steps_for(horizons[i], params.dt);
  const std::size_t n_max = steps.empty() ? 0 : steps.back();

  std::vector<std::size_t> hit(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t i) {
    StreamRng rng(derive_seed(seed, i));
    hit[i] = first_high_index(stepper, theta0, n_max, rng);
  });
  std::sort(hit.begin(), hit.end());

  std::vector<SurvivalEstimate> out;
  out.reserve(horizons.size());
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    // Survivors at T have their first hit strictly after step index N_T.
    const auto it = std::upper_bound(hit.begin(), hit.end(), steps[i]);
    const std::size_t alive = static_cast<std::size_t>(hit.end() - it);
    SurvivalEstimate e;
    e.horizon = horizons[i];
    e.n_paths = n_paths;
    e.probability = static_cast<double>(alive) / static_cast<double>(n_paths);
    e.std_error = stats::binomial_stderr(e.probability, n_paths);
    e.warning = n_paths < kMinPaths;
    out.push_back(e);
  }
  return out;
}

struct ExponentFit {
  double slope = 0.0;  // positive decay rate
  double intercept = 0.0;
  std::pair<double, double> ci95{0.0, 0.0};
  double r2 = 0.0;
  std::size_t points = 0;
  std::size_t dropped_zero = 0;
};

/// Weighted least squares of log p against T over [lo, hi]. Weights are the
/// inverse delta-method variances p²/stderr²; unit weights when any stderr vanishes.
inline ExponentFit fit_exponent(std::span<const SurvivalEstimate> curve,
                                std::pair<double, double> fit_range) {
  std::vector<double> x, y, w;
  ExponentFit fit;
  bool unit = false;
  for (const auto& e : curve) {
    if (e.horizon < fit_range.first - 1e-12 || e.horizon > fit_range.second + 1e-12) continue;
    if (!(e.probability > 0.0)) {
      ++fit.dropped_zero;
      continue;
    }
    x.push_back(e.horizon);
    y.push_back(std::log(e.probability));
    if (e.std_error > 0.0)
      w.push_back(e.probability * e.probability / (e.std_error * e.std_error));
    else
      unit = true;
  }
  if (x.size() < 4)
    throw NumericalError("fit_exponent: fewer than 4 usable points in the fit range");
  const auto line = stats::weighted_line_fit(x, y, unit ? std::span<const double>{} : std::span<const double>(w));
  fit.slope = -line.slope;
  fit.intercept = line.intercept;
  fit.r2 = line.r2;
  fit.points = x.size();
  const double half = stats::t975(x.size() - 2) * line.slope_se;
  fit.ci95 = {fit.slope - half, fit.slope + half};
  return fit;
}

// ---------------------------------------------------------------------------
// Conditional endpoint statistics

struct EndpointStats {
  double p_below_pi = 0.0;
  double p_inside_band = 0.0;
  double stderr_below = 0.0;
  double stderr_band = 0.0;
  std::size_t survivors = 0;
  std::size_t n_paths = 0;
};

/// Among paths with no 2π contact up to T, the fractions with θ_T ≤ π and
/// with θ_T ∈ [c0, 2π − c0].
inline EndpointStats conditional_endpoint_stats(const DiffusionParams& params, double T, double c0,
                                                std::size_t n_paths, std::uint64_t seed,
                                                unsigned workers = 1, double theta0 = 0.0) {
  check_theta0(theta0);
  if (!(T >= 0.0)) throw DomainError("T must be non-negative");
  if (!(c0 > 0.0 && c0 < kPi)) throw DomainError("c0 must lie in (0, pi)");
  const ThetaStepper stepper(params);
  const std::size_t n = steps_for(T, params.dt);

  enum : std::uint8_t { dead = 0, below = 1, band = 2 };
  std::vector<std::uint8_t> outcome(n_paths);
  parallel_for(n_paths, workers, [&](std::size_t i) {
    StreamRng rng(derive_seed(seed, i));
    double theta = theta0;
    if (theta >= kTwoPi) {
      outcome[i] = dead;
      return;
    }
    for (std::size_t k = 0; k < n; ++k) {
      const StepResult r = stepper.advance(theta, rng);
      if (r.touch == Touch::high || r.value >= kTwoPi) {
        outcome[i] = dead;
        return;
      }
      theta = r.value;
    }
    outcome[i] = 4 | (theta <= kPi ? below : 0) | (theta >= c0 && theta <= kTwoPi - c0 ? band : 0);
  });

  EndpointStats s;
  s.n_paths = n_paths;
  std::size_t n_below = 0, n_band = 0;
  for (auto o : outcome) {
    if (o == dead) continue;
    ++s.survivors;
    n_below += (o & below) != 0;
    n_band += (o & band) != 0;
  }
  if (s.survivors == 0)
    throw NumericalError("conditional_endpoint_stats: zero survivors out of " + std::to_string(n_paths));
  s.p_below_pi = static_cast<double>(n_below) / static_cast<double>(s.survivors);
  s.p_inside_band = static_cast<double>(n_band) / static_cast<double>(s.survivors);
  s.stderr_below = stats::binomial_stderr(s.p_below_pi, s.survivors);
  s.stderr_band = stats::binomial_stderr(s.p_inside_band, s.survivors);
  return s;
}

}  // namespace cle::diffusion
