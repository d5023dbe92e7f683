#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cle/conformal.hpp"
#include "cle/diffusion.hpp"
#include "cle/error.hpp"
#include "cle/geometry.hpp"
#include "cle/loewner.hpp"
#include "cle/parallel.hpp"
#include "cle/rng.hpp"
#include "cle/stats.hpp"

namespace cle::exploration {

using cplx = std::complex<double>;
using diffusion::DiffusionParams;
using diffusion::ThetaPath;
using loewner::RadialDriver;

inline constexpr double kLog2 = 0.69314718055994530942;
inline constexpr double kDefaultMargin = 20.0;
inline constexpr double kMaxUndecidableFraction = 0.05;

// ---------------------------------------------------------------------------
// Loop events on θ paths

struct CwClosure {
  double close_time = 0.0;
  double anchor_time = 0.0;
  std::size_t close_index = 0;
  std::size_t anchor_index = 0;
};

struct LoopEvents {
  std::optional<double> ccw_time;
  std::optional<double> ccw_anchor;
  std::optional<std::size_t> ccw_index;
  std::optional<std::size_t> ccw_anchor_index;
  std::vector<CwClosure> cw_closures;
};

/// Scans the path from index k0, which is treated as a zero when k0 > 0 (a
/// renewal time) or when θ starts at 0.
///   ccw: first contact with 2π; its anchor is the last contact with 0 before it.
///   cw closures: recorded zeros (contact with 0 after θ exceeded h_exc);
///   each is anchored at the start of its excursion, the last contact with 0
///   before the exceedance.
inline LoopEvents detect_loop_events(const ThetaPath& path, double h_exc, std::size_t k0 = 0) {
  if (!(h_exc > 0.0)) throw DomainError("h_exc must be positive");
  LoopEvents ev;
  if (path.values.empty() || k0 >= path.values.size()) return ev;
  std::optional<std::size_t> last_zero;
  if (k0 > 0 || path.at_low(k0)) last_zero = k0;
  if (path.at_high(k0) && k0 == 0) {
    ev.ccw_index = 0;
    ev.ccw_time = 0.0;
    return ev;
  }
  bool armed = path.values[k0] > h_exc;
  std::size_t excursion_start = last_zero.value_or(k0);
  for (std::size_t k = k0 + 1; k < path.values.size(); ++k) {
    if (path.at_high(k)) {
      ev.ccw_index = k;
      ev.ccw_time = path.time(k);
      if (last_zero) {
        ev.ccw_anchor_index = *last_zero;
        ev.ccw_anchor = path.time(*last_zero);
      }
      break;
    }
    if (path.at_low(k)) {
      if (armed) {
        ev.cw_closures.push_back({path.time(k), path.time(excursion_start), k, excursion_start});
        armed = false;
      }
      last_zero = k;
    }
    if (!armed && path.values[k] > h_exc) {
      armed = true;
      excursion_start = last_zero.value_or(k0);
    }
  }
  return ev;
}

// ---------------------------------------------------------------------------
// Event E

enum class EventStatus { occurred, not_occurred, undecidable };

struct EventOutcome {
  EventStatus status = EventStatus::not_occurred;
  bool occurred() const { return status == EventStatus::occurred; }
  std::optional<double> close_time;       // relative to the frame start
  std::optional<std::size_t> close_index;  // absolute driver index
  std::optional<double> domain_radius;
  std::optional<double> loop_max_modulus;
  std::optional<double> ccw_time;          // relative to the frame start
  std::string reason;
  std::size_t candidates = 0;  // closures examined on the trace
  std::size_t samples = 0;     // trace points evaluated
};

struct EventOptions {
  double h_exc = diffusion::kDefaultExcursion;
  std::size_t initial_samples = 16;
  std::size_t boundary_samples = 64;
  double resolution_fraction = 0.1;  // adjacent samples closer than this times e^{−β}
};

namespace detail {

enum class Containment { inside, outside, undecidable };

struct ContainmentResult {
  Containment verdict = Containment::outside;
  double max_modulus = 0.0;
  std::size_t samples = 0;
};

/// Is η[anchor, close] (frame k0) inside the disk of radius r? Each sampled
/// index contributes the tip and the base of its slit. Samples are refined by
/// bisection until adjacent tips are within r·fraction; a pair of
/// neighbouring grid points that stays farther apart is an unresolved gap.
inline ContainmentResult loop_inside(const RadialDriver& d, std::size_t k0, std::size_t anchor,
                                     std::size_t close, double r, const EventOptions& opt) {
  ContainmentResult res;
  std::map<std::size_t, cplx> pts;
  auto eval = [&](std::size_t k) -> bool {
    double m;
    if (k == anchor) {
      const cplx p = loewner::trace_point_index(d, k, k0);
      pts.emplace(k, p);
      m = std::abs(p);
    } else {
      const auto ends = loewner::slit_ends_index(d, k, k0);
      pts.emplace(k, ends.tip);
      m = std::max(std::abs(ends.tip), std::abs(ends.base));
    }
    ++res.samples;
    res.max_modulus = std::max(res.max_modulus, m);
    return m <= r;
  };
  try {
    if (!eval(close) || !eval(anchor)) return res;
    const std::size_t len = close - anchor;
    const std::size_t stride = std::max<std::size_t>(1, len / std::max<std::size_t>(1, opt.initial_samples));
    for (std::size_t k = anchor + stride; k < close; k += stride)
      if (!eval(k)) return res;
    const double resolution = r * opt.resolution_fraction;
    double worst = 0.0;  // max modulus plus half gap over unresolved pairs
    std::vector<std::pair<std::size_t, std::size_t>> stack;
    for (auto it = pts.begin(); std::next(it) != pts.end(); ++it) stack.emplace_back(it->first, std::next(it)->first);
    while (!stack.empty()) {
      const auto [i, j] = stack.back();
      stack.pop_back();
      const cplx a = pts.at(i), b = pts.at(j);
      const double gap = std::abs(a - b);
      if (gap <= resolution) continue;
      if (j - i == 1) {
        worst = std::max(worst, std::max(std::abs(a), std::abs(b)) + 0.5 * gap);
        continue;
      }
      const std::size_t m = i + (j - i) / 2;
      if (!eval(m)) return res;
      stack.emplace_back(i, m);
      stack.emplace_back(m, j);
    }
    res.verdict = worst > r ? Containment::undecidable : Containment::inside;
  } catch (const TraceError&) {
    res.verdict = Containment::undecidable;
  }
  return res;
}

struct ClosedDomain {
  bool surrounded = false;  // every sampled boundary point was created after the anchor
  double radius = 0.0;      // max modulus over the sampled boundary
};

/// Boundary of the component of 0 cut off by a clockwise closure at index k.
/// On the grid the tip still sits at angle θ_k ahead of the force point; the
/// arc (O_k, W_k) leads to the part being disconnected, so only the
/// complementary arc from W_k counterclockwise to O_k is sampled, at cell
/// midpoints so that neither end is hit. The loop
/// surrounds 0 when that boundary lies on the curve drawn since the anchor.
inline ClosedDomain closed_domain(const RadialDriver& d, std::size_t anchor, std::size_t k, std::size_t k0,
                                  std::size_t count) {
  if (count < 1) throw DomainError("need at least one boundary sample");
  const double span = diffusion::kTwoPi - std::max(0.0, d.theta.values[k]);
  ClosedDomain out;
  // Bit-reversed order tests a spread-out subset first, so that a domain that
  // is not surrounded is usually rejected after a few samples.
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < count) ++bits;
  for (std::size_t n = 0; n < (std::size_t{1} << bits); ++n) {
    std::size_t i = 0;
    for (std::size_t b = 0; b < bits; ++b) i |= ((n >> b) & 1u) << (bits - 1 - b);
    if (i >= count) continue;
    const double phi = d.arg_w[k] + span * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    const auto b = loewner::boundary_preimage(d, k, std::polar(1.0, phi), k0);
    if (!b.slit || *b.slit <= anchor) return out;
    out.radius = std::max(out.radius, std::abs(b.point));
  }
  out.surrounded = true;
  return out;
}

}  // namespace detail

/// Event E for the exploration started at driver index k0 (frame of g_{t_{k0}}):
/// a clockwise loop inside e^{−β}D closes before any counterclockwise loop.
inline EventOutcome detect_event_E(const RadialDriver& d, double beta, const EventOptions& opt = {},
                                   std::size_t k0 = 0) {
  if (!(beta >= kLog2 - 1e-12)) throw DomainError("event E requires beta >= log 2");
  if (d.horizon() - d.time(k0) < beta) throw DomainError("driver horizon shorter than beta");
  const double r = std::exp(-beta);
  const double t0 = d.time(k0);
  const auto ev = detect_loop_events(d.theta, opt.h_exc, k0);
  EventOutcome out;
  if (ev.ccw_time) out.ccw_time = *ev.ccw_time - t0;
  for (const auto& c : ev.cw_closures) {
    // Conformal radius after closing is e^{−(τ−t0)} and must not exceed r.
    if (c.close_time - t0 < beta - 1e-12) continue;
    // Koebe: the anchor point lies at distance ≥ e^{−(s−t0)}/4 from 0.
    if (0.25 * std::exp(-(c.anchor_time - t0)) > r) continue;
    ++out.candidates;
    const auto cont = detail::loop_inside(d, k0, c.anchor_index, c.close_index, r, opt);
    out.samples += cont.samples;
    if (cont.verdict == detail::Containment::outside) continue;
    if (cont.verdict == detail::Containment::undecidable) {
      out.status = EventStatus::undecidable;
      out.reason = "trace resolution insufficient near e^-beta";
      out.loop_max_modulus = cont.max_modulus;
      return out;
    }
    const auto dom = detail::closed_domain(d, c.anchor_index, c.close_index, k0, opt.boundary_samples);
    if (!dom.surrounded) continue;
    out.status = EventStatus::occurred;
    out.close_time = c.close_time - t0;
    out.close_index = c.close_index;
    out.loop_max_modulus = cont.max_modulus;
    out.domain_radius = dom.radius;
    out.reason = "clockwise loop inside e^-beta D";
    return out;
  }
  out.reason = ev.ccw_time ? "counterclockwise loop first" : "horizon exhausted";
  return out;
}

// ---------------------------------------------------------------------------
// Probability estimates

struct NestedEventStats {
  double beta = 0.0;
  int depth = 1;
  double p1_estimate = 0.0;
  double p1_stderr = 0.0;
  double pn_renewal = 0.0;
  double pn_stderr = 0.0;
  std::size_t n_trials = 0;
  std::size_t successes = 0;
  std::size_t undecidable = 0;
  std::vector<double> domain_radii;  // one per occurred event, in trial order
};

struct EstimateOptions {
  EventOptions event;
  double t_margin = kDefaultMargin;
  unsigned workers = 1;
  bool enforce_quality = true;
};

namespace detail {

inline RadialDriver fresh_driver(const DiffusionParams& params, double horizon, std::uint64_t key,
                                 double h_exc) {
  return loewner::build_driver(params, horizon, key, cplx(1.0, 0.0), 0.0, h_exc);
}

inline void check_quality(std::size_t undecidable, std::size_t n, bool enforce) {
  if (enforce && n > 0 && static_cast<double>(undecidable) > kMaxUndecidableFraction * static_cast<double>(n))
    throw UndecidableError("undecidable fraction " + std::to_string(undecidable) + "/" + std::to_string(n) +
                           " exceeds 5%");
}

}  // namespace detail

inline NestedEventStats nested_event_probability(const NestedEventStats& s1, int n) {
  if (n < 1) throw DomainError("depth must be at least 1");
  if (s1.depth != 1) throw DomainError("renewal needs depth-1 statistics");
  NestedEventStats s = s1;
  s.depth = n;
  s.pn_renewal = std::pow(s1.p1_estimate, n);
  s.pn_stderr = n * std::pow(s1.p1_estimate, n - 1) * s1.p1_stderr;
  return s;
}

/// Fraction of fresh drivers on which E occurs. Undecidable trials count in
/// the denominator only.
inline NestedEventStats estimate_event_probability(const DiffusionParams& params, double beta,
                                                   std::size_t n_trials, std::uint64_t seed,
                                                   const EstimateOptions& opt = {}) {
  if (!(beta >= kLog2 - 1e-12)) throw DomainError("event E requires beta >= log 2");
  if (n_trials == 0) throw DomainError("n_trials must be positive");
  std::vector<EventOutcome> outcomes(n_trials);
  parallel_for(n_trials, opt.workers, [&](std::size_t i) {
    const auto d = detail::fresh_driver(params, beta + opt.t_margin, derive_seed(seed, i), opt.event.h_exc);
    outcomes[i] = detect_event_E(d, beta, opt.event);
  });
  NestedEventStats s;
  s.beta = beta;
  s.n_trials = n_trials;
  for (const auto& o : outcomes) {
    if (o.occurred()) {
      ++s.successes;
      s.domain_radii.push_back(*o.domain_radius);
    }
    s.undecidable += o.status == EventStatus::undecidable;
  }
  s.p1_estimate = static_cast<double>(s.successes) / static_cast<double>(n_trials);
  s.p1_stderr = stats::binomial_stderr(s.p1_estimate, n_trials);
  s.pn_renewal = s.p1_estimate;
  s.pn_stderr = s.p1_stderr;
  detail::check_quality(s.undecidable, n_trials, opt.enforce_quality);
  return s;
}

struct DirectNestedResult {
  double beta = 0.0;
  double p2_estimate = 0.0;
  double p2_stderr = 0.0;
  std::size_t n_trials = 0;
  std::size_t successes = 0;
  std::size_t first_successes = 0;
  std::size_t undecidable = 0;
  std::vector<double> domain_radii;  // of first-level events, scaled to the original frame
};

/// Direct depth-2 run: after E occurs at τ₁, the same driver continues in the
/// renewed frame of g_{τ₁}, where E must occur again.
inline DirectNestedResult direct_depth2_probability(const DiffusionParams& params, double beta,
                                                    std::size_t n_trials, std::uint64_t seed,
                                                    const EstimateOptions& opt = {}) {
  if (!(beta >= kLog2 - 1e-12)) throw DomainError("event E requires beta >= log 2");
  std::vector<EventStatus> first(n_trials), second(n_trials, EventStatus::not_occurred);
  std::vector<double> radii(n_trials, -1.0);
  parallel_for(n_trials, opt.workers, [&](std::size_t i) {
    const std::uint64_t key = derive_seed(seed, i);
    const auto d1 = detail::fresh_driver(params, beta + opt.t_margin, key, opt.event.h_exc);
    const auto e1 = detect_event_E(d1, beta, opt.event);
    first[i] = e1.status;
    if (!e1.occurred()) return;
    radii[i] = *e1.domain_radius;
    // Same key: the longer driver extends the first one sample for sample.
    const double tau1 = d1.time(*e1.close_index);
    const auto d2 = detail::fresh_driver(params, tau1 + beta + opt.t_margin, key, opt.event.h_exc);
    second[i] = detect_event_E(d2, beta, opt.event, *e1.close_index).status;
  });
  DirectNestedResult r;
  r.beta = beta;
  r.n_trials = n_trials;
  for (std::size_t i = 0; i < n_trials; ++i) {
    r.first_successes += first[i] == EventStatus::occurred;
    r.undecidable += first[i] == EventStatus::undecidable || second[i] == EventStatus::undecidable;
    r.successes += first[i] == EventStatus::occurred && second[i] == EventStatus::occurred;
    if (radii[i] >= 0.0) r.domain_radii.push_back(radii[i]);
  }
  r.p2_estimate = static_cast<double>(r.successes) / static_cast<double>(n_trials);
  r.p2_stderr = stats::binomial_stderr(r.p2_estimate, n_trials);
  detail::check_quality(r.undecidable, n_trials, opt.enforce_quality);
  return r;
}

// ---------------------------------------------------------------------------
// Outermost loop

struct OutermostLoop {
  loewner::Trace trace;  // closed: the last point repeats the first
  double anchor_time = 0.0;
  double ccw_time = 0.0;
  double endpoint_gap = 0.0;  // |η(τ_ccw) − η(τ́_ccw)| before closing
  int winding = 0;
  std::size_t attempts = 0;
};

inline constexpr std::size_t kRetryBudget = 16;

/// Outermost loop around `target`: the exploration is conjugated by ψ_target,
/// run until its first counterclockwise closure, and the trace on
/// [τ́_ccw, τ_ccw] is mapped back by ψ_target^{-1} and closed by joining its
/// endpoints. Attempt r uses the sub-seed derive_seed(seed, r).
inline OutermostLoop sample_outermost_loop(const DiffusionParams& params, cplx target, double horizon,
                                           std::uint64_t seed, std::size_t stride,
                                           double h_exc = diffusion::kDefaultExcursion,
                                           std::size_t retry_budget = kRetryBudget) {
  if (!(std::abs(target) < 1.0)) throw DomainError("target must lie in the open disk");
  if (stride == 0) throw DomainError("stride must be at least 1");
  const conformal::MobiusMap psi(target);
  const cplx w0 = conformal::mobius_apply(psi, cplx(1.0, 0.0));
  for (std::size_t attempt = 0; attempt < retry_budget; ++attempt) {
    const auto d = loewner::build_driver(params, horizon, derive_seed(seed, attempt), w0, 0.0, h_exc);
    const auto ev = detect_loop_events(d.theta, h_exc);
    if (!ev.ccw_index || !ev.ccw_anchor_index) continue;
    OutermostLoop loop;
    loop.attempts = attempt + 1;
    loop.anchor_time = *ev.ccw_anchor;
    loop.ccw_time = *ev.ccw_time;
    for (std::size_t k = *ev.ccw_anchor_index;; k += stride) {
      k = std::min(k, *ev.ccw_index);
      loop.trace.times.push_back(d.time(k));
      loop.trace.points.push_back(conformal::mobius_inverse_apply(psi, loewner::trace_point_index(d, k)));
      if (k == *ev.ccw_index) break;
    }
    loop.endpoint_gap = std::abs(loop.trace.points.back() - loop.trace.points.front());
    loop.winding = geometry::winding_number(loop.trace.points, target);
    loop.trace.times.push_back(loop.trace.times.back());
    loop.trace.points.push_back(loop.trace.points.front());
    return loop;
  }
  throw NumericalError("no counterclockwise closure within the horizon after " + std::to_string(retry_budget) +
                       " attempts");
}

}  // namespace cle::exploration
