#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cle/error.hpp"
#include "cle/lattice.hpp"
#include "cle/stats.hpp"

namespace cle::dimension {

using cplx = std::complex<double>;

struct BoxCountSeries {
  std::vector<double> scales;  // decreasing
  std::vector<double> counts;  // N(ε); fractional only when offset-averaged or seed-averaged
};

struct DimensionFit {
  double dimension = 0.0;
  std::pair<double, double> ci95{0.0, 0.0};
  double r2 = 0.0;
  std::pair<double, double> scale_window{0.0, 0.0};
  std::size_t points = 0;
};

inline void check_scales(std::span<const double> scales) {
  if (scales.empty()) throw DomainError("no scales given");
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (!(scales[k] > 0.0)) throw DomainError("scales must be positive");
    if (k > 0 && !(scales[k] < scales[k - 1])) throw DomainError("scales must be strictly decreasing");
  }
}

/// Powers of two from n down to 1.
inline std::vector<double> dyadic_scales(int n) {
  std::vector<double> s;
  for (long long e = std::bit_floor(static_cast<unsigned long long>(std::max(n, 1))); e >= 1; e /= 2)
    s.push_back(static_cast<double>(e));
  return s;
}

/// Number of boxes [a·ε, (a+1)·ε) × [b·ε, (b+1)·ε) of the cell grid that
/// contain a masked cell; the last row and column of boxes may be partial.
/// With offsets > 1 the count is averaged over offsets × offsets grid shifts
/// by multiples of ε/offsets.
inline BoxCountSeries box_counts(const lattice::GasketMask& m, std::span<const double> scales, int offsets = 1) {
  check_scales(scales);
  if (offsets < 1) throw DomainError("offsets must be at least 1");
  if (m.count() == 0) throw DomainError("box counting of an empty set");
  BoxCountSeries out;
  out.scales.assign(scales.begin(), scales.end());
  std::vector<std::uint8_t> hit;
  for (double eps : scales) {
    double total = 0.0;
    for (int ox = 0; ox < offsets; ++ox)
      for (int oy = 0; oy < offsets; ++oy) {
        const double sx = eps * ox / offsets, sy = eps * oy / offsets;
        const auto side = static_cast<std::size_t>(std::floor((m.n + eps) / eps)) + 1;
        hit.assign(side * side, 0);
        std::size_t n_hit = 0;
        for (int j = 0; j < m.n; ++j) {
          const auto b = static_cast<std::size_t>(std::floor((j + sy) / eps));
          for (int i = 0; i < m.n; ++i) {
            if (!m.mask[static_cast<std::size_t>(j) * m.n + i]) continue;
            const auto a = static_cast<std::size_t>(std::floor((i + sx) / eps));
            auto& h = hit[b * side + a];
            n_hit += h == 0;
            h = 1;
          }
        }
        total += static_cast<double>(n_hit);
      }
    out.counts.push_back(total / (offsets * offsets));
  }
  return out;
}

/// Boxes of side ε anchored at `origin` that contain a point.
inline BoxCountSeries box_counts(std::span<const cplx> points, std::span<const double> scales,
                                 cplx origin = {-1.0, -1.0}) {
  check_scales(scales);
  if (points.empty()) throw DomainError("box counting of an empty set");
  BoxCountSeries out;
  out.scales.assign(scales.begin(), scales.end());
  for (double eps : scales) {
    std::unordered_set<std::uint64_t> boxes;
    for (const cplx& p : points) {
      const auto a = static_cast<std::int64_t>(std::floor((p.real() - origin.real()) / eps));
      const auto b = static_cast<std::int64_t>(std::floor((p.imag() - origin.imag()) / eps));
      boxes.insert((static_cast<std::uint64_t>(a) << 32) ^ static_cast<std::uint64_t>(b & 0xffffffff));
    }
    out.counts.push_back(static_cast<double>(boxes.size()));
  }
  return out;
}

/// Mean counts of several series over the same scales.
inline BoxCountSeries average_series(std::span<const BoxCountSeries> series) {
  if (series.empty()) throw DomainError("no series to average");
  BoxCountSeries out = series.front();
  for (std::size_t s = 1; s < series.size(); ++s) {
    if (series[s].scales != out.scales) throw DomainError("series have different scales");
    for (std::size_t k = 0; k < out.counts.size(); ++k) out.counts[k] += series[s].counts[k];
  }
  for (auto& c : out.counts) c /= static_cast<double>(series.size());
  return out;
}

/// Scales left after dropping the two largest and the two smallest. Short
/// series trim less so that at least four scales remain.
inline std::pair<double, double> default_window(const BoxCountSeries& s) {
  const std::size_t m = s.scales.size();
  if (m < 4) throw NumericalError("a box-count fit needs at least 4 scales");
  const std::size_t trim = std::min<std::size_t>(2, (m - 4) / 2);
  return {s.scales[m - 1 - trim], s.scales[trim]};
}

/// Least squares of log N(ε) on log(1/ε) over scales in [lo, hi].
inline DimensionFit fit_box_dimension(const BoxCountSeries& s, std::pair<double, double> window) {
  if (s.scales.size() != s.counts.size()) throw DomainError("scales and counts differ in length");
  std::vector<double> x, y;
  const double tol = 1e-9 * window.second;
  for (std::size_t k = 0; k < s.scales.size(); ++k) {
    if (s.scales[k] < window.first - tol || s.scales[k] > window.second + tol) continue;
    if (!(s.counts[k] > 0.0)) throw NumericalError("zero count inside the fit window");
    x.push_back(-std::log(s.scales[k]));
    y.push_back(std::log(s.counts[k]));
  }
  if (x.size() < 4) throw NumericalError("dimension fit needs at least 4 scales in the window");
  const auto f = stats::weighted_line_fit(x, y);
  DimensionFit d;
  d.dimension = f.slope;
  const double half = stats::t975(f.points - 2) * f.slope_se;
  d.ci95 = {f.slope - half, f.slope + half};
  d.r2 = f.r2;
  d.scale_window = window;
  d.points = f.points;
  return d;
}

inline DimensionFit fit_box_dimension(const BoxCountSeries& s) { return fit_box_dimension(s, default_window(s)); }

inline double expectation_dimension(double alpha_hat) {
  if (!(alpha_hat >= 0.0 && alpha_hat <= 2.0)) throw DomainError("alpha must lie in [0, 2]");
  return 2.0 - alpha_hat;
}

/// Sierpiński carpet of side 3^depth: cell (i, j) is removed when some base-3
/// digit pair of (i, j) is (1, 1).
inline lattice::GasketMask sierpinski_carpet(int depth) {
  if (depth < 0 || depth > 9) throw DomainError("carpet depth must lie in [0, 9]");
  int n = 1;
  for (int k = 0; k < depth; ++k) n *= 3;
  lattice::GasketMask m;
  m.n = n;
  m.mask.assign(static_cast<std::size_t>(n) * n, 1);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      for (int a = i, b = j; a > 0 || b > 0; a /= 3, b /= 3)
        if (a % 3 == 1 && b % 3 == 1) {
          m.mask[static_cast<std::size_t>(j) * n + i] = 0;
          break;
        }
  return m;
}

}  // namespace cle::dimension
