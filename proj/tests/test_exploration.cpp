#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cle/exploration.hpp"

using namespace cle;
using namespace cle::exploration;
using diffusion::kPi;
using diffusion::kTwoPi;
using diffusion::Touch;

namespace {

ThetaPath synthetic_path(double dt, std::vector<double> values) {
  ThetaPath p;
  p.dt = dt;
  p.touches.assign(values.size(), Touch::none);
  p.values = std::move(values);
  return p;
}

// Driver with a prescribed θ path; W stays at 1.
RadialDriver driver_with_theta(double dt, const std::vector<double>& theta) {
  const std::vector<double> angles(theta.size(), 0.0);
  auto d = RadialDriver::from_angles(dt, angles);
  d.theta = synthetic_path(dt, theta);
  return d;
}

const DiffusionParams kParams = DiffusionParams::for_kappa(6.0);

}  // namespace

TEST(LoopEvents, MonotonePathClosesCounterclockwise) {
  const auto p = synthetic_path(1.0, {0.0, kTwoPi / 3, 2 * kTwoPi / 3, kTwoPi});
  const auto ev = detect_loop_events(p, 0.2);
  ASSERT_TRUE(ev.ccw_time && ev.ccw_anchor);
  EXPECT_DOUBLE_EQ(*ev.ccw_time, 3.0);
  EXPECT_DOUBLE_EQ(*ev.ccw_anchor, 0.0);
  EXPECT_TRUE(ev.cw_closures.empty());
}

TEST(LoopEvents, OscillatingPathHasTwoClockwiseClosures) {
  const auto p = synthetic_path(0.5, {kPi / 2, kPi, 0.0, kPi, 0.0, 0.1, 0.15});
  const auto ev = detect_loop_events(p, 0.2);
  EXPECT_FALSE(ev.ccw_time);
  ASSERT_EQ(ev.cw_closures.size(), 2u);
  EXPECT_DOUBLE_EQ(ev.cw_closures[0].close_time, 1.0);
  EXPECT_DOUBLE_EQ(ev.cw_closures[1].close_time, 2.0);
  EXPECT_DOUBLE_EQ(ev.cw_closures[1].anchor_time, 1.0);
  for (const auto& c : ev.cw_closures) EXPECT_LT(c.anchor_time, c.close_time);
}

TEST(LoopEvents, AnchorIsLastContactBeforeExceedance) {
  // Small wiggles at 0 before the excursion move the anchor to the last contact.
  const auto p = synthetic_path(1.0, {0.0, 0.1, 0.0, 0.05, 0.0, 1.0, 3.0, 0.0, 1.0, kTwoPi});
  const auto ev = detect_loop_events(p, 0.2);
  ASSERT_EQ(ev.cw_closures.size(), 1u);
  EXPECT_DOUBLE_EQ(ev.cw_closures[0].anchor_time, 4.0);
  EXPECT_DOUBLE_EQ(ev.cw_closures[0].close_time, 7.0);
  ASSERT_TRUE(ev.ccw_time);
  EXPECT_DOUBLE_EQ(*ev.ccw_time, 9.0);
  EXPECT_DOUBLE_EQ(*ev.ccw_anchor, 7.0);
  EXPECT_THROW(detect_loop_events(p, 0.0), DomainError);
}

TEST(LoopEvents, TouchFlagsCountAsContacts) {
  auto p = synthetic_path(1.0, {1e-3, 2.0, 1e-3, 6.0});
  p.touches = {Touch::low, Touch::none, Touch::low, Touch::high};
  const auto ev = detect_loop_events(p, 0.2);
  ASSERT_EQ(ev.cw_closures.size(), 1u);
  EXPECT_EQ(ev.cw_closures[0].close_index, 2u);
  EXPECT_EQ(*ev.ccw_index, 3u);
  EXPECT_EQ(*ev.ccw_anchor_index, 2u);
}

TEST(LoopEvents, SimulatedPathsCloseCounterclockwiseByHorizon100) {
  const auto p = DiffusionParams::for_kappa(6.0, 1e-2);
  const int runs = 400;
  int finite = 0;
  for (int i = 0; i < runs; ++i) {
    const auto path = diffusion::simulate_theta(p, 0.0, 100.0, derive_seed(77, i));
    const auto ev = detect_loop_events(path, diffusion::kDefaultExcursion);
    finite += ev.ccw_time.has_value();
    if (ev.ccw_time && ev.ccw_anchor) {
      EXPECT_LT(*ev.ccw_anchor, *ev.ccw_time);
    }
    for (std::size_t j = 1; j < ev.cw_closures.size(); ++j)
      EXPECT_LT(ev.cw_closures[j - 1].close_time, ev.cw_closures[j].close_time);
  }
  EXPECT_GE(finite, 0.99 * runs);
}

TEST(EventE, CounterclockwiseFirstDoesNotOccur) {
  std::vector<double> th(5001, kPi);
  th[0] = 0.0;
  th[100] = kTwoPi;
  th[4000] = 0.0;
  const auto d = driver_with_theta(1e-3, th);
  const auto out = detect_event_E(d, 2.0);
  EXPECT_FALSE(out.occurred());
  EXPECT_EQ(out.candidates, 0u);
  ASSERT_TRUE(out.ccw_time);
  EXPECT_NEAR(*out.ccw_time, 0.1, 1e-12);
}

TEST(EventE, PreconditionsAndClosuresBeforeBeta) {
  std::vector<double> th(3001, kPi);
  th[0] = 0.0;
  th[1000] = 0.0;  // closes before β: conformal radius still too large
  const auto d = driver_with_theta(1e-3, th);
  EXPECT_THROW(detect_event_E(d, 0.5), DomainError);
  EXPECT_THROW(detect_event_E(d, 3.5), DomainError);
  const auto out = detect_event_E(d, 2.0);
  EXPECT_FALSE(out.occurred());
  EXPECT_EQ(out.candidates, 0u);
  EXPECT_EQ(out.reason, "horizon exhausted");
}

TEST(EventE, OccurrencesSatisfyDefinition) {
  const double beta = 2.0;
  const double r = std::exp(-beta);
  int occurred = 0;
  for (std::uint64_t s = 0; s < 200 && occurred < 6; ++s) {
    const auto d = loewner::build_driver(kParams, beta + 10.0, derive_seed(9, s));
    const auto out = detect_event_E(d, beta);
    if (!out.occurred()) continue;
    ++occurred;
    ASSERT_TRUE(out.close_time && out.close_index && out.domain_radius && out.loop_max_modulus);
    EXPECT_GE(*out.close_time, beta - 1e-12);
    EXPECT_LE(*out.loop_max_modulus, r);
    EXPECT_LE(*out.domain_radius, 8.0 * r);
    if (out.ccw_time) {
      EXPECT_GT(*out.ccw_time, *out.close_time);
    }
    // Dense oracle: every grid point of the loop lies inside e^{−β}D.
    const auto ev = detect_loop_events(d.theta, diffusion::kDefaultExcursion);
    const CwClosure* hit = nullptr;
    for (const auto& c : ev.cw_closures)
      if (c.close_index == *out.close_index) hit = &c;
    ASSERT_NE(hit, nullptr);
    for (std::size_t k = hit->anchor_index; k <= hit->close_index; ++k)
      ASSERT_LE(std::abs(loewner::trace_point_index(d, k)), r * (1 + 1e-9)) << "seed " << s << " k " << k;
  }
  EXPECT_GE(occurred, 3);
}

TEST(EventE, DeterministicAndMonotoneInBeta) {
  EstimateOptions opt;
  opt.t_margin = 10.0;
  const auto a = estimate_event_probability(kParams, 2.0, 200, 123, opt);
  const auto b = estimate_event_probability(kParams, 2.0, 200, 123, opt);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_EQ(a.p1_estimate, b.p1_estimate);
  EXPECT_EQ(a.domain_radii, b.domain_radii);
  EXPECT_GT(a.p1_estimate, 0.0);
  EXPECT_LT(a.p1_estimate, 1.0);
  const auto c = estimate_event_probability(kParams, 3.0, 200, 123, opt);
  EXPECT_LE(c.p1_estimate, a.p1_estimate + 2 * a.p1_stderr);
  EXPECT_THROW(estimate_event_probability(kParams, 0.6, 10, 1), DomainError);
  EXPECT_THROW(estimate_event_probability(kParams, 2.0, 0, 1), DomainError);
}

TEST(EventE, WorkerCountDoesNotChangeResults) {
  EstimateOptions opt;
  opt.t_margin = 8.0;
  opt.workers = 1;
  const auto a = estimate_event_probability(kParams, 2.0, 60, 5, opt);
  opt.workers = 3;
  const auto b = estimate_event_probability(kParams, 2.0, 60, 5, opt);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_EQ(a.domain_radii, b.domain_radii);
}

TEST(Nested, RenewalArithmetic) {
  NestedEventStats s;
  s.p1_estimate = 0.5;
  s.p1_stderr = 0.01;
  s.pn_renewal = 0.5;
  s.pn_stderr = 0.01;
  const auto one = nested_event_probability(s, 1);
  EXPECT_DOUBLE_EQ(one.pn_renewal, 0.5);
  EXPECT_DOUBLE_EQ(one.pn_stderr, 0.01);
  const auto three = nested_event_probability(s, 3);
  EXPECT_DOUBLE_EQ(three.pn_renewal, 0.125);
  EXPECT_DOUBLE_EQ(three.pn_stderr, 3 * 0.25 * 0.01);
  EXPECT_EQ(three.depth, 3);
  EXPECT_THROW(nested_event_probability(s, 0), DomainError);
  EXPECT_THROW(nested_event_probability(three, 2), DomainError);
}

TEST(Nested, DirectDepthTwoIsSubsetOfFirstLevel) {
  EstimateOptions opt;
  opt.t_margin = 8.0;
  const auto r = direct_depth2_probability(kParams, 2.0, 100, 31, opt);
  EXPECT_LE(r.successes, r.first_successes);
  EXPECT_EQ(r.domain_radii.size(), r.first_successes);
  const auto p1 = estimate_event_probability(kParams, 2.0, 100, 31, opt);
  EXPECT_EQ(p1.successes, r.first_successes);
}

TEST(OutermostLoop, ClosedCurveAroundTarget) {
  const cplx target(0.3, 0.1);
  int positive = 0, total = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto loop = sample_outermost_loop(kParams, target, 30.0, s, 5);
    ++total;
    ASSERT_GE(loop.trace.points.size(), 3u);
    EXPECT_EQ(loop.trace.points.front(), loop.trace.points.back());
    EXPECT_LT(loop.anchor_time, loop.ccw_time);
    EXPECT_NEAR(loop.trace.times.front(), loop.anchor_time, 1e-12);
    EXPECT_NEAR(loop.trace.times.back(), loop.ccw_time, 1e-12);
    for (const cplx& z : loop.trace.points) EXPECT_LE(std::abs(z), 1.0 + 1e-9);
    EXPECT_GE(loop.endpoint_gap, 0.0);
    positive += loop.winding == 1;
  }
  // Grid traces at a declared 2π contact stop short of the anchor point, so
  // the chord closure occasionally misses the target.
  EXPECT_GE(positive, 0.7 * total);
}

TEST(OutermostLoop, SharedSeedGivesSameClosureTimes) {
  const auto a = sample_outermost_loop(kParams, cplx(0.3, 0.1), 30.0, 4, 10);
  const auto b = sample_outermost_loop(kParams, cplx(0.25, 0.12), 30.0, 4, 10);
  EXPECT_EQ(a.anchor_time, b.anchor_time);
  EXPECT_EQ(a.ccw_time, b.ccw_time);
  EXPECT_EQ(a.attempts, b.attempts);
  const auto again = sample_outermost_loop(kParams, cplx(0.3, 0.1), 30.0, 4, 10);
  EXPECT_EQ(a.trace.points, again.trace.points);
}

TEST(OutermostLoop, Errors) {
  EXPECT_THROW(sample_outermost_loop(kParams, cplx(1.0, 0.0), 10.0, 1, 1), DomainError);
  EXPECT_THROW(sample_outermost_loop(kParams, cplx(0.1, 0.0), 10.0, 1, 0), DomainError);
  EXPECT_THROW(sample_outermost_loop(kParams, cplx(0.1, 0.0), 0.01, 1, 1, 0.2, 2), NumericalError);
}
