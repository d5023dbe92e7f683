#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cle/error.hpp"
#include "cle/geometry.hpp"
#include "cle/rng.hpp"

namespace cle::lattice {

using cplx = std::complex<double>;

enum class Model : std::uint8_t { triangular_site = 0, square_fk = 1 };

/// n×n two-coloured region surrounded by a virtual ring of `boundary_color`.
/// Triangular sites use 6-neighbour offsets (±1,0), (0,±1), (+1,−1), (−1,+1).
/// Square FK configurations store bonds: bond_h[j·n+i] joins (i,j)–(i+1,j),
/// bond_v[j·n+i] joins (i,j)–(i,j+1); the border sites are wired together, and
/// `colors` marks the wired cluster.
struct LatticeConfig {
  int n = 0;
  Model model = Model::triangular_site;
  bool boundary_color = false;
  std::vector<std::uint8_t> colors;  // index j·n + i, 1 = black/open
  std::vector<std::uint8_t> bond_h, bond_v;

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * n + i; }
  bool inside(int i, int j) const { return i >= 0 && j >= 0 && i < n && j < n; }
  bool color(int i, int j) const { return inside(i, j) ? colors[index(i, j)] != 0 : boundary_color; }
  std::size_t cells() const { return colors.size(); }
};

/// Boolean n×n mask, index j·n + i.
struct GasketMask {
  int n = 0;
  std::vector<std::uint8_t> mask;

  bool at(int i, int j) const { return mask[static_cast<std::size_t>(j) * n + i] != 0; }
  std::size_t count() const { return static_cast<std::size_t>(std::accumulate(mask.begin(), mask.end(), std::size_t{0})); }
  bool operator==(const GasketMask&) const = default;
};

struct InterfaceLoop {
  std::vector<cplx> vertices;  // closed: the last vertex repeats the first
  std::size_t edges() const { return vertices.empty() ? 0 : vertices.size() - 1; }
};

inline constexpr std::array<std::array<int, 2>, 6> kHexDirs{{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};
inline constexpr int kOracleMaxN = 512;

/// Plane position of cell centre (i, j).
inline cplx cell_center(double i, double j) {
  return {i + 0.5 * j, 0.5 * std::numbers::sqrt3 * j};
}

/// Vertex k of the hexagon of cell (i, j), at angle 30° + 60°k from the centre.
/// The edge facing direction m runs from vertex m−1 to vertex m.
inline cplx hex_vertex(int i, int j, int k) {
  return cell_center(i, j) + std::polar(1.0 / std::numbers::sqrt3, std::numbers::pi / 6 + k * std::numbers::pi / 3);
}

inline void check_size(int n, int min_n = 1) {
  if (n < min_n) throw DomainError("lattice size must be at least " + std::to_string(min_n));
}

/// I.i.d. site percolation, black with probability p, white boundary.
inline LatticeConfig sample_percolation(int n, double p, std::uint64_t seed) {
  check_size(n, 2);
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
  LatticeConfig c;
  c.n = n;
  c.colors.resize(static_cast<std::size_t>(n) * n);
  StreamRng rng(seed);
  for (auto& x : c.colors) x = rng.uniform() < p;
  return c;
}

/// Configuration from explicit colours (index j·n + i).
inline LatticeConfig from_colors(int n, std::vector<std::uint8_t> colors, bool boundary_color = false) {
  check_size(n);
  if (colors.size() != static_cast<std::size_t>(n) * n) throw DomainError("colour grid does not match n");
  LatticeConfig c;
  c.n = n;
  c.boundary_color = boundary_color;
  c.colors = std::move(colors);
  for (auto& x : c.colors) x = x != 0;
  return c;
}

namespace detail {

// Cells reachable from the border through `link(from, to)` moves.
template <class Seed, class Link>
GasketMask border_flood(int n, Seed&& seeds_border, Link&& link, const std::vector<std::array<int, 2>>& dirs) {
  GasketMask g;
  g.n = n;
  g.mask.assign(static_cast<std::size_t>(n) * n, 0);
  std::vector<std::size_t> stack;
  auto push = [&](int i, int j) {
    const std::size_t k = static_cast<std::size_t>(j) * n + i;
    if (!g.mask[k]) {
      g.mask[k] = 1;
      stack.push_back(k);
    }
  };
  for (int t = 0; t < n; ++t) {
    for (auto [i, j] : {std::array{t, 0}, std::array{t, n - 1}, std::array{0, t}, std::array{n - 1, t}})
      if (seeds_border(i, j)) push(i, j);
  }
  while (!stack.empty()) {
    const std::size_t k = stack.back();
    stack.pop_back();
    const int i = static_cast<int>(k % n), j = static_cast<int>(k / n);
    for (const auto& d : dirs) {
      const int a = i + d[0], b = j + d[1];
      if (a < 0 || b < 0 || a >= n || b >= n) continue;
      if (link(i, j, a, b)) push(a, b);
    }
  }
  return g;
}

}  // namespace detail

/// Cells of the boundary colour joined to the boundary ring. For FK
/// configurations, the sites joined to the wired border by open bonds.
inline GasketMask boundary_cluster_gasket(const LatticeConfig& c) {
  if (c.model == Model::square_fk) {
    const std::vector<std::array<int, 2>> dirs{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    auto open = [&](int i, int j, int a, int b) {
      if (b == j) return c.bond_h[c.index(std::min(i, a), j)] != 0;
      return c.bond_v[c.index(i, std::min(j, b))] != 0;
    };
    return detail::border_flood(c.n, [](int, int) { return true; }, open, dirs);
  }
  const std::vector<std::array<int, 2>> dirs(kHexDirs.begin(), kHexDirs.end());
  auto same = [&](int, int, int a, int b) { return c.color(a, b) == c.boundary_color; };
  return detail::border_flood(c.n, [&](int i, int j) { return c.color(i, j) == c.boundary_color; }, same, dirs);
}

/// Number of bichromatic adjacencies, counting the virtual ring.
inline std::size_t bichromatic_edges(const LatticeConfig& c) {
  std::size_t count = 0;
  for (int j = -1; j <= c.n; ++j)
    for (int i = -1; i <= c.n; ++i)
      for (int m : {0, 1, 2}) {  // each undirected edge once
        const int a = i + kHexDirs[m][0], b = j + kHexDirs[m][1];
        if (!c.inside(i, j) && !c.inside(a, b)) continue;
        count += c.color(i, j) != c.color(a, b);
      }
  return count;
}

/// Interfaces on the hexagonal dual, each traced counterclockwise around its
/// black cells. Every vertex of the dual meets zero or two bichromatic edges,
/// so the loops are disjoint cycles.
inline std::vector<InterfaceLoop> trace_interface_loops(const LatticeConfig& c, bool allow_large = false) {
  if (c.model != Model::triangular_site) throw DomainError("interface tracing needs a triangular-site configuration");
  if (c.n > kOracleMaxN && !allow_large) throw DomainError("trace_interface_loops is an oracle for n <= 512");
  const int w = c.n + 2;  // padded grid covering the ring
  auto slot = [&](int i, int j, int m) { return (static_cast<std::size_t>(j + 1) * w + (i + 1)) * 6 + m; };
  std::vector<std::uint8_t> seen(static_cast<std::size_t>(w) * w * 6, 0);
  auto bichromatic = [&](int i, int j, int m) {
    const int a = i + kHexDirs[m][0], b = j + kHexDirs[m][1];
    if (!c.inside(i, j) && !c.inside(a, b)) return false;
    return c.color(i, j) && !c.color(a, b);
  };
  std::vector<InterfaceLoop> loops;
  for (int j = -1; j <= c.n; ++j)
    for (int i = -1; i <= c.n; ++i)
      for (int m = 0; m < 6; ++m) {
        if (seen[slot(i, j, m)] || !bichromatic(i, j, m)) continue;
        InterfaceLoop loop;
        int ci = i, cj = j, cm = m;
        loop.vertices.push_back(hex_vertex(ci, cj, (cm + 5) % 6));
        while (!seen[slot(ci, cj, cm)]) {
          seen[slot(ci, cj, cm)] = 1;
          loop.vertices.push_back(hex_vertex(ci, cj, cm));
          // At vertex cm the third cell is the neighbour in direction cm+1.
          const int m1 = (cm + 1) % 6;
          const int ni = ci + kHexDirs[m1][0], nj = cj + kHexDirs[m1][1];
          if (c.color(ni, nj)) {
            ci = ni;
            cj = nj;
            cm = (cm + 5) % 6;
          } else {
            cm = m1;
          }
        }
        loops.push_back(std::move(loop));
      }
  return loops;
}

/// Even-odd test: is p inside the closed polyline? The ray from p in
/// direction `dir` must stay away from every vertex; otherwise nullopt.
inline std::optional<bool> ray_parity(std::span<const cplx> poly, cplx p, cplx dir, double eps = 1e-9) {
  bool inside = false;
  for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
    const cplx a = (poly[k] - p) / dir, b = (poly[k + 1] - p) / dir;  // ray becomes the positive real axis
    if (std::abs(a.imag()) < eps && a.real() > -eps) return std::nullopt;
    if ((a.imag() > 0) == (b.imag() > 0)) continue;
    const double x = a.real() - a.imag() * (b.real() - a.real()) / (b.imag() - a.imag());
    if (x > 0) inside = !inside;
  }
  return inside;
}

/// Cells outside every traced loop, by even-odd ray crossing.
inline GasketMask enclosure_gasket(const LatticeConfig& c, bool allow_large = false) {
  const auto loops = trace_interface_loops(c, allow_large);
  GasketMask g;
  g.n = c.n;
  g.mask.assign(c.cells(), 1);
  for (int j = 0; j < c.n; ++j)
    for (int i = 0; i < c.n; ++i) {
      const cplx center = cell_center(i, j);
      for (const auto& loop : loops) {
        std::optional<bool> in;
        for (int attempt = 0; attempt < 8 && !in; ++attempt)
          in = ray_parity(loop.vertices, center, std::polar(1.0, 0.1234567 + 0.7390851 * attempt));
        if (!in) throw GeometryError("degenerate ray after 8 perturbations");
        if (*in) {
          g.mask[c.index(i, j)] = 0;
          break;
        }
      }
    }
  return g;
}

/// Loop winding around a point, for checks against the parity test.
inline int loop_winding(const InterfaceLoop& loop, cplx p) {
  return geometry::winding_number(std::span(loop.vertices).first(loop.vertices.size() - 1), p);
}

// ---------------------------------------------------------------------------
// FK random-cluster model, q = 2

inline double self_dual_p(double q) { return std::sqrt(q) / (1.0 + std::sqrt(q)); }

namespace detail {

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace detail

/// Swendsen–Wang chain for the q = 2 random-cluster model on the n×n square
/// grid with the border wired: border spins are frozen at +, and the last
/// sweep's bonds are returned. `sweeps` = 0 selects 10·n.
inline LatticeConfig sample_fk_config(int n, double q, double p, std::size_t sweeps, std::uint64_t seed) {
  check_size(n, 2);
  if (q != 2.0) throw DomainError("only q = 2 is implemented");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("p must lie in [0, 1]");
  if (sweeps == 0) sweeps = 10 * static_cast<std::size_t>(n);
  const std::size_t cells = static_cast<std::size_t>(n) * n;
  const std::uint32_t ghost = static_cast<std::uint32_t>(cells);
  LatticeConfig c;
  c.n = n;
  c.model = Model::square_fk;
  c.boundary_color = true;
  c.bond_h.assign(cells, 0);
  c.bond_v.assign(cells, 0);
  std::vector<std::uint8_t> spin(cells, 1);
  std::vector<std::uint8_t> flip(cells + 1);
  StreamRng rng(seed);
  auto border = [&](int i, int j) { return i == 0 || j == 0 || i == n - 1 || j == n - 1; };
  for (std::size_t s = 0; s < sweeps; ++s) {
    detail::UnionFind uf(cells + 1);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t k = c.index(i, j);
        if (border(i, j)) uf.unite(static_cast<std::uint32_t>(k), ghost);
        const bool h = i + 1 < n && spin[k] == spin[k + 1] && rng.uniform() < p;
        const bool v = j + 1 < n && spin[k] == spin[k + n] && rng.uniform() < p;
        c.bond_h[k] = h;
        c.bond_v[k] = v;
        if (h) uf.unite(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k + 1));
        if (v) uf.unite(static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k + n));
      }
    if (s + 1 == sweeps) break;
    // One fair coin per cluster root, drawn in site order.
    std::fill(flip.begin(), flip.end(), 2);
    const std::uint32_t groot = uf.find(ghost);
    flip[groot] = 0;
    for (std::size_t k = 0; k < cells; ++k) {
      const std::uint32_t r = uf.find(static_cast<std::uint32_t>(k));
      if (flip[r] == 2) flip[r] = rng.uniform() < 0.5;
      if (flip[r]) spin[k] ^= 1;
    }
  }
  c.colors = boundary_cluster_gasket(c).mask;
  return c;
}

}  // namespace cle::lattice
