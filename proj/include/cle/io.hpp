#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cle/diffusion.hpp"
#include "cle/dimension.hpp"
#include "cle/error.hpp"
#include "cle/lattice.hpp"
#include "cle/loewner.hpp"

namespace cle::io {

using cplx = std::complex<double>;
namespace fs = std::filesystem;

/// Shortest round-trip decimal form, independent of locale and stream state.
inline std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fixed(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Writes through a temporary file and a rename, so readers never see a
/// partial file.
inline void write_atomic(const fs::path& p, std::string_view data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw ConfigError("short write to " + tmp.string());
  }
  fs::rename(tmp, p);
}

// ---------------------------------------------------------------------------
// CSV

inline std::string survival_csv(std::span<const diffusion::SurvivalEstimate> curve) {
  std::string s = "T,p,stderr,n\n";
  for (const auto& e : curve)
    s += num(e.horizon) + "," + num(e.probability) + "," + num(e.std_error) + "," + std::to_string(e.n_paths) + "\n";
  return s;
}

inline std::string boxcount_csv(const dimension::BoxCountSeries& b) {
  std::string s = "scale,count\n";
  for (std::size_t k = 0; k < b.scales.size(); ++k) s += num(b.scales[k]) + "," + num(b.counts[k]) + "\n";
  return s;
}

inline std::string trace_csv(const loewner::Trace& t) {
  std::string s = "t,re,im\n";
  for (std::size_t k = 0; k < t.points.size(); ++k)
    s += num(t.times[k]) + "," + num(t.points[k].real()) + "," + num(t.points[k].imag()) + "\n";
  return s;
}

namespace detail {

inline std::vector<std::vector<double>> csv_rows(const std::string& text, std::size_t columns) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("bad CSV number: " + cell);
      }
    }
    if (row.size() != columns) throw ConfigError("CSV row has " + std::to_string(row.size()) + " columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

inline dimension::BoxCountSeries parse_boxcount_csv(const std::string& text) {
  dimension::BoxCountSeries b;
  for (const auto& r : detail::csv_rows(text, 2)) {
    b.scales.push_back(r[0]);
    b.counts.push_back(r[1]);
  }
  return b;
}

inline loewner::Trace parse_trace_csv(const std::string& text) {
  loewner::Trace t;
  for (const auto& r : detail::csv_rows(text, 3)) {
    t.times.push_back(r[0]);
    t.points.emplace_back(r[1], r[2]);
  }
  return t;
}

// ---------------------------------------------------------------------------
// PBM (P4, raw bits, row j = 0 first)

inline std::string mask_pbm(const lattice::GasketMask& m) {
  std::string s = "P4\n" + std::to_string(m.n) + " " + std::to_string(m.n) + "\n";
  const std::size_t row_bytes = (static_cast<std::size_t>(m.n) + 7) / 8;
  for (int j = 0; j < m.n; ++j) {
    std::string row(row_bytes, '\0');
    for (int i = 0; i < m.n; ++i)
      if (m.at(i, j)) row[i / 8] = static_cast<char>(row[i / 8] | (0x80 >> (i % 8)));
    s += row;
  }
  return s;
}

inline lattice::GasketMask parse_pbm(const std::string& data) {
  std::istringstream in(data);
  std::string magic;
  int w = 0, h = 0;
  in >> magic >> w >> h;
  if (magic != "P4" || w <= 0 || w != h) throw ConfigError("expected a square P4 bitmap");
  in.get();
  lattice::GasketMask m;
  m.n = w;
  m.mask.assign(static_cast<std::size_t>(w) * w, 0);
  const std::size_t row_bytes = (static_cast<std::size_t>(w) + 7) / 8;
  std::string row(row_bytes, '\0');
  for (int j = 0; j < w; ++j) {
    if (!in.read(row.data(), static_cast<std::streamsize>(row_bytes))) throw ConfigError("truncated bitmap");
    for (int i = 0; i < w; ++i)
      m.mask[static_cast<std::size_t>(j) * w + i] = (static_cast<unsigned char>(row[i / 8]) >> (7 - i % 8)) & 1u;
  }
  return m;
}

// ---------------------------------------------------------------------------
// CLEG lattice binary: "CLEG", version u8, model u8, n u16 (little endian),
// then boundary colour u8 and run-length-encoded bit planes (colours, and for
// FK the horizontal and vertical bonds). Each plane is a sequence of LEB128
// run lengths alternating between 0 and 1, starting with 0.

inline constexpr std::uint8_t kClegVersion = 1;

namespace detail {

inline void put_varint(std::string& s, std::uint64_t v) {
  do {
    std::uint8_t b = v & 0x7f;
    v >>= 7;
    if (v) b |= 0x80;
    s.push_back(static_cast<char>(b));
  } while (v);
}

inline std::uint64_t get_varint(std::string_view s, std::size_t& pos) {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    if (pos >= s.size()) throw ConfigError("truncated CLEG data");
    const auto b = static_cast<std::uint8_t>(s[pos++]);
    v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
    if (!(b & 0x80)) return v;
  }
  throw ConfigError("bad varint in CLEG data");
}

inline void put_plane(std::string& s, const std::vector<std::uint8_t>& bits) {
  std::uint8_t cur = 0;
  std::uint64_t run = 0;
  for (auto b : bits) {
    if ((b != 0) == (cur != 0)) {
      ++run;
      continue;
    }
    put_varint(s, run);
    cur ^= 1;
    run = 1;
  }
  put_varint(s, run);
}

inline std::vector<std::uint8_t> get_plane(std::string_view s, std::size_t& pos, std::size_t size) {
  std::vector<std::uint8_t> bits;
  bits.reserve(size);
  std::uint8_t cur = 0;
  while (bits.size() < size) {
    const std::uint64_t run = get_varint(s, pos);
    if (run > size - bits.size()) throw ConfigError("CLEG run overflows the grid");
    bits.insert(bits.end(), run, cur);
    cur ^= 1;
  }
  return bits;
}

}  // namespace detail

inline std::string encode_cleg(const lattice::LatticeConfig& c) {
  if (c.n < 1 || c.n > 0xffff) throw DomainError("CLEG supports 1 <= n <= 65535");
  std::string s = "CLEG";
  s.push_back(static_cast<char>(kClegVersion));
  s.push_back(static_cast<char>(c.model));
  s.push_back(static_cast<char>(c.n & 0xff));
  s.push_back(static_cast<char>((c.n >> 8) & 0xff));
  s.push_back(static_cast<char>(c.boundary_color ? 1 : 0));
  detail::put_plane(s, c.colors);
  if (c.model == lattice::Model::square_fk) {
    detail::put_plane(s, c.bond_h);
    detail::put_plane(s, c.bond_v);
  }
  return s;
}

inline lattice::LatticeConfig decode_cleg(std::string_view s) {
  if (s.size() < 9 || s.substr(0, 4) != "CLEG") throw ConfigError("not a CLEG file");
  if (static_cast<std::uint8_t>(s[4]) != kClegVersion) throw ConfigError("unsupported CLEG version");
  lattice::LatticeConfig c;
  const auto model = static_cast<std::uint8_t>(s[5]);
  if (model > 1) throw ConfigError("unknown CLEG model id");
  c.model = static_cast<lattice::Model>(model);
  c.n = static_cast<std::uint8_t>(s[6]) | (static_cast<std::uint8_t>(s[7]) << 8);
  c.boundary_color = s[8] != 0;
  std::size_t pos = 9;
  const std::size_t cells = static_cast<std::size_t>(c.n) * c.n;
  c.colors = detail::get_plane(s, pos, cells);
  if (c.model == lattice::Model::square_fk) {
    c.bond_h = detail::get_plane(s, pos, cells);
    c.bond_v = detail::get_plane(s, pos, cells);
  }
  if (pos != s.size()) throw ConfigError("trailing bytes in CLEG file");
  return c;
}

// ---------------------------------------------------------------------------
// SVG

struct SvgStyle {
  double size = 512.0;  // pixels
  std::string stroke = "#1f4e9c";
  std::string fill = "#1a1a1a";
  double stroke_width = 1.0;
  bool allow_empty = false;
  std::string title;
};

namespace detail {

inline std::string svg_open(double w, double h, const SvgStyle& st) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(w, 1) + "\" height=\"" + fixed(h, 1) +
       "\" viewBox=\"0 0 " + fixed(w, 1) + " " + fixed(h, 1) + "\">\n";
  if (!st.title.empty()) s += "<title>" + st.title + "</title>\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  return s;
}

// Disk coordinates to pixels, y axis up.
struct DiskFrame {
  double size;
  double x(cplx z) const { return size * (0.5 + 0.45 * z.real()); }
  double y(cplx z) const { return size * (0.5 - 0.45 * z.imag()); }
};

inline std::string path_data(std::span<const cplx> pts, const DiskFrame& f, bool close) {
  std::string d;
  for (std::size_t k = 0; k < pts.size(); ++k)
    d += (k == 0 ? "M" : " L") + fixed(f.x(pts[k]), 3) + " " + fixed(f.y(pts[k]), 3);
  if (close) d += " Z";
  return d;
}

inline std::string unit_circle(const DiskFrame& f) {
  return "<circle cx=\"" + fixed(f.size * 0.5, 3) + "\" cy=\"" + fixed(f.size * 0.5, 3) + "\" r=\"" +
         fixed(f.size * 0.45, 3) + "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
}

}  // namespace detail

/// Unit disk with a trace polyline. An empty trace needs style.allow_empty.
inline std::string render_trace_svg(const loewner::Trace& t, const SvgStyle& st = {}) {
  if (t.points.empty() && !st.allow_empty) throw RenderError("nothing to render: empty trace");
  const detail::DiskFrame f{st.size};
  std::string s = detail::svg_open(st.size, st.size, st) + detail::unit_circle(f);
  if (!t.points.empty())
    s += "<path class=\"trace\" d=\"" + detail::path_data(t.points, f, false) + "\" fill=\"none\" stroke=\"" +
         st.stroke + "\" stroke-width=\"" + fixed(st.stroke_width, 2) + "\"/>\n";
  return s + "</svg>\n";
}

/// Unit disk with a closed loop, its target and a winding annotation.
inline std::string render_loop_svg(std::span<const cplx> loop, cplx target, int winding, const SvgStyle& st = {}) {
  if (loop.size() < 2) throw RenderError("nothing to render: loop has fewer than two points");
  const detail::DiskFrame f{st.size};
  std::string s = detail::svg_open(st.size, st.size, st) + detail::unit_circle(f);
  s += "<path class=\"loop\" d=\"" + detail::path_data(loop, f, true) + "\" fill=\"none\" stroke=\"" + st.stroke +
       "\" stroke-width=\"" + fixed(st.stroke_width, 2) + "\" data-winding=\"" + std::to_string(winding) + "\"/>\n";
  s += "<circle class=\"target\" cx=\"" + fixed(f.x(target), 3) + "\" cy=\"" + fixed(f.y(target), 3) +
       "\" r=\"2\" fill=\"#c0392b\"/>\n";
  s += "<text x=\"8\" y=\"20\" font-family=\"monospace\" font-size=\"14\">winding " +
       std::string(winding > 0 ? "+" : "") + std::to_string(winding) + "</text>\n";
  return s + "</svg>\n";
}

/// Masked cells as filled hexagons in the lattice-plane embedding.
inline std::string render_mask_svg(const lattice::GasketMask& m, const SvgStyle& st = {}) {
  if (m.n < 1 || m.count() == 0) throw RenderError("nothing to render: empty mask");
  const double r = 1.0 / std::numbers::sqrt3;
  const double width_units = 1.5 * m.n + 1.0, height_units = 0.5 * std::numbers::sqrt3 * m.n + 1.0;
  const double scale = st.size / std::max(width_units, height_units);
  const double w = width_units * scale, h = height_units * scale;
  std::string s = detail::svg_open(w, h, st);
  s += "<g fill=\"" + st.fill + "\" stroke=\"none\">\n";
  for (int j = 0; j < m.n; ++j)
    for (int i = 0; i < m.n; ++i) {
      if (!m.at(i, j)) continue;
      const cplx c = lattice::cell_center(i, j) + cplx(0.5 + r, 0.5);
      std::string pts;
      for (int k = 0; k < 6; ++k) {
        const cplx v = c + std::polar(r, std::numbers::pi / 6 + k * std::numbers::pi / 3);
        if (k) pts += " ";
        pts += fixed(v.real() * scale, 2) + "," + fixed(h - v.imag() * scale, 2);
      }
      s += "<polygon class=\"cell\" points=\"" + pts + "\"/>\n";
    }
  return s + "</g>\n</svg>\n";
}

}  // namespace cle::io
