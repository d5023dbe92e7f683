#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cle/diffusion.hpp"
#include "cle/dimension.hpp"
#include "cle/error.hpp"
#include "cle/exploration.hpp"
#include "cle/io.hpp"
#include "cle/lattice.hpp"
#include "cle/loewner.hpp"

namespace cle::experiment {

using json = nlohmann::json;
using cplx = std::complex<double>;
namespace fs = std::filesystem;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr std::uint64_t kDefaultSeed = 20240601;

inline int exit_code(ErrorClass c) {
  switch (c) {
    case ErrorClass::config:
    case ErrorClass::domain:
      return 2;
    case ErrorClass::undecidable:
      return 4;
    default:
      return 3;
  }
}

struct ExperimentConfig {
  std::string command;
  json params = json::object();  // fully resolved, defaults included
  std::uint64_t seed = kDefaultSeed;
  std::string seed_source = "default";  // flag, config, env or default
  fs::path output_dir = "out";
  unsigned workers = 1;
};

struct RunManifest {
  json document;
  std::optional<bool> pass;
};

// ---------------------------------------------------------------------------
// Parameter schemas: every key a command accepts, with its default.

inline const std::map<std::string, json>& schemas() {
  static const std::map<std::string, json> s{
      {"theta-exponent",
       {{"kappa", 6.0},
        {"dt", 1e-3},
        {"n_paths", 100000},
        {"horizons", json::array()},
        {"fit_window", {8.0, 30.0}},
        {"scheme", "implicit"},
        {"theta0", 0.0}}},
      {"theta-lemmas",
       {{"kappa", 6.0}, {"dt", 1e-3}, {"n_paths", 100000}, {"times", {1.0, 2.0, 4.0, 8.0}}, {"c0", 0.3}, {"p0", nullptr}}},
      {"event-prob",
       {{"kappa", 6.0},
        {"dt", 1e-3},
        {"betas", {2.0, 3.0, 4.0}},
        {"n_trials", 10000},
        {"t_margin", exploration::kDefaultMargin},
        {"h_exc", diffusion::kDefaultExcursion},
        {"depth2", true},
        {"depth2_beta", 2.0},
        {"enforce_quality", true}}},
      {"sle-trace", {{"kappa", 6.0}, {"dt", 1e-3}, {"horizon", 3.0}, {"stride", 10}, {"w0_angle", 0.0}, {"svg", true}}},
      {"outermost-loop",
       {{"kappa", 6.0},
        {"dt", 1e-3},
        {"target", {0.3, 0.1}},
        {"horizon", 30.0},
        {"stride", 5},
        {"h_exc", diffusion::kDefaultExcursion},
        {"svg", true}}},
      {"perc-gasket",
       {{"n", 256}, {"p", 0.5}, {"n_seeds", 1}, {"window", nullptr}, {"boundary_color", false}, {"svg", false}, {"offsets", 1}}},
      {"fk-gasket",
       {{"n", 128}, {"q", 2.0}, {"p", nullptr}, {"sweeps", 0}, {"n_seeds", 1}, {"window", nullptr}, {"svg", false}}},
      {"dim-fit", {{"input", ""}, {"window", nullptr}}},
      {"render",
       {{"kind", "circle"}, {"input", ""}, {"target", {0.0, 0.0}}, {"winding", 1}, {"allow_empty", false}, {"size", 512.0}}},
  };
  return s;
}

inline std::uint64_t parse_seed_string(const std::string& s) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("seed must be a non-negative integer, got '" + s + "'");
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError("seed out of range: " + s);
  }
}

namespace detail {

inline bool same_kind(const json& def, const json& v) {
  if (def.is_null()) return true;
  if (def.is_number()) return v.is_number();
  if (def.is_boolean()) return v.is_boolean();
  if (def.is_string()) return v.is_string();
  if (def.is_array()) return v.is_array();
  return def.type() == v.type();
}

inline void set_param(const std::string& command, json& params, const std::string& key, const json& value) {
  const auto& schema = schemas().at(command);
  if (!schema.contains(key)) throw ConfigError("unknown parameter '" + key + "' for command " + command);
  if (!value.is_null() && !same_kind(schema.at(key), value))
    throw ConfigError("parameter '" + key + "' has the wrong type");
  params[key] = value;
}

inline std::uint64_t parse_seed(const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_string()) return parse_seed_string(v.get<std::string>());
  throw ConfigError("seed must be a non-negative integer");
}

}  // namespace detail

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<fs::path> output_dir;
  std::vector<std::string> overrides;  // key=value, value parsed as JSON when possible
};

/// Resolves a configuration. Seed precedence: --seed, then the config's
/// seed, then $CLE_SEED, then the built-in default.
inline ExperimentConfig resolve_config(const json& raw, const CliOverrides& cli = {}) {
  if (!raw.is_object()) throw ConfigError("configuration must be a JSON object");
  json doc = raw;
  for (const auto& o : cli.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + o);
    std::string key = o.substr(0, eq);
    const std::string text = o.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    if (key.rfind("params.", 0) == 0) {
      key = key.substr(7);
      if (!doc.contains("params")) doc["params"] = json::object();
      doc["params"][key] = value;
    } else {
      doc[key] = value;
    }
  }
  ExperimentConfig cfg;
  if (!doc.contains("command") || !doc["command"].is_string()) throw ConfigError("missing string field 'command'");
  cfg.command = doc["command"].get<std::string>();
  const auto it = schemas().find(cfg.command);
  if (it == schemas().end()) throw ConfigError("unknown command '" + cfg.command + "'");
  cfg.params = it->second;
  std::optional<std::uint64_t> config_seed;
  for (const auto& [key, value] : doc.items()) {
    if (key == "command") continue;
    if (key == "seed") {
      config_seed = detail::parse_seed(value);
    } else if (key == "output_dir") {
      if (!value.is_string()) throw ConfigError("output_dir must be a string");
      cfg.output_dir = value.get<std::string>();
    } else if (key == "workers") {
      if (!value.is_number_integer() || value.get<long long>() < 0) throw ConfigError("workers must be >= 0");
      cfg.workers = value.get<unsigned>();
    } else if (key == "params") {
      if (!value.is_object()) throw ConfigError("params must be an object");
      for (const auto& [k, v] : value.items()) detail::set_param(cfg.command, cfg.params, k, v);
    } else {
      detail::set_param(cfg.command, cfg.params, key, value);
    }
  }
  if (cli.seed) {
    cfg.seed = *cli.seed;
    cfg.seed_source = "flag";
  } else if (config_seed) {
    cfg.seed = *config_seed;
    cfg.seed_source = "config";
  } else if (const char* env = std::getenv("CLE_SEED"); env && *env) {
    cfg.seed = parse_seed_string(env);
    cfg.seed_source = "env";
  }
  if (cli.workers) cfg.workers = *cli.workers;
  if (cli.output_dir) cfg.output_dir = *cli.output_dir;
  return cfg;
}

// ---------------------------------------------------------------------------
// Pipelines

struct RunContext {
  explicit RunContext(const ExperimentConfig& c) : cfg(c) {}

  const ExperimentConfig& cfg;
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  json metrics = json::object();
  std::optional<bool> pass;
  std::map<std::string, bool> criteria;

  const json& p(const std::string& key) const { return cfg.params.at(key); }
  double num(const std::string& key) const {
    const json& v = p(key);
    if (!v.is_number()) throw ConfigError("parameter '" + key + "' must be a number");
    return v.get<double>();
  }
  std::size_t count(const std::string& key) const {
    const double v = num(key);
    if (v < 0 || v != std::floor(v)) throw ConfigError("parameter '" + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v);
  }
  std::vector<double> list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& x : p(key)) {
      if (!x.is_number()) throw ConfigError("parameter '" + key + "' must be a list of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }
  std::pair<double, double> pair(const std::string& key) const {
    const auto v = list(key);
    if (v.size() != 2) throw ConfigError("parameter '" + key + "' must have two entries");
    return {v[0], v[1]};
  }
  void add(const std::string& name, std::string content) { files.emplace_back(name, std::move(content)); }
};

namespace detail {

inline diffusion::DiffusionParams params_for(const RunContext& c, const std::string& scheme = "implicit") {
  diffusion::StepScheme s;
  if (scheme == "implicit")
    s = diffusion::StepScheme::implicit_bridge;
  else if (scheme == "euler")
    s = diffusion::StepScheme::euler_mirror;
  else
    throw ConfigError("scheme must be 'implicit' or 'euler'");
  auto p = diffusion::DiffusionParams::for_kappa(c.num("kappa"), c.num("dt"), s);
  p.validate();
  return p;
}

inline json fit_record(const dimension::DimensionFit& f) {
  return {{"dimension", f.dimension},
          {"ci_low", f.ci95.first},
          {"ci_high", f.ci95.second},
          {"r2", f.r2},
          {"window", {f.scale_window.first, f.scale_window.second}}};
}

inline void theta_exponent(RunContext& c) {
  const auto params = params_for(c, c.p("scheme").get<std::string>());
  std::vector<double> horizons = c.list("horizons");
  if (horizons.empty())
    for (int t = 2; t <= 30; t += 2) horizons.push_back(t);
  const auto curve = diffusion::survival_curve(params, horizons, c.count("n_paths"), c.cfg.seed, c.cfg.workers,
                                               c.num("theta0"));
  c.add("survival.csv", io::survival_csv(curve));
  const auto fit = diffusion::fit_exponent(curve, c.pair("fit_window"));
  const double alpha = diffusion::alpha_exponent(params.kappa);
  const double rel = alpha > 0 ? std::abs(fit.slope - alpha) / alpha : std::abs(fit.slope);
  c.metrics = {{"slope", fit.slope},          {"ci_low", fit.ci95.first}, {"ci_high", fit.ci95.second},
               {"r2", fit.r2},                {"alpha", alpha},           {"relative_error", rel},
               {"points", fit.points},        {"expectation_dimension", 2.0 - fit.slope}};
  c.criteria["relative_error_le_0.10"] = rel <= 0.10;
  c.criteria["r2_ge_0.99"] = fit.r2 >= 0.99;
  c.pass = rel <= 0.10 && fit.r2 >= 0.99;
}

inline void theta_lemmas(RunContext& c) {
  const auto params = params_for(c);
  const double c0 = c.num("c0");
  const bool has_p0 = !c.p("p0").is_null();
  const double p0 = has_p0 ? c.num("p0") : 0.0;
  std::string csv = "T,p_below_pi,stderr_below,p_band,stderr_band,survivors,n\n";
  bool below_ok = true, band_ok = true;
  json rows = json::array();
  const auto times = c.list("times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double T = times[i];
    const auto s = diffusion::conditional_endpoint_stats(params, T, c0, c.count("n_paths"),
                                                         derive_seed(c.cfg.seed, i), c.cfg.workers);
    csv += io::num(T) + "," + io::num(s.p_below_pi) + "," + io::num(s.stderr_below) + "," + io::num(s.p_inside_band) +
           "," + io::num(s.stderr_band) + "," + std::to_string(s.survivors) + "," + std::to_string(s.n_paths) + "\n";
    below_ok = below_ok && s.p_below_pi >= 0.5 - 3 * s.stderr_below;
    if (has_p0) band_ok = band_ok && s.p_inside_band >= p0 - 3 * s.stderr_band;
    rows.push_back({{"T", T}, {"p_below_pi", s.p_below_pi}, {"p_band", s.p_inside_band}});
  }
  c.add("lemmas.csv", csv);
  c.metrics = {{"rows", rows}, {"c0", c0}, {"p0", has_p0 ? json(p0) : json(nullptr)}};
  c.criteria["below_pi_ge_half"] = below_ok;
  if (has_p0) c.criteria["band_ge_p0"] = band_ok;
  c.pass = below_ok && band_ok;
}

inline void event_prob(RunContext& c) {
  const auto params = params_for(c);
  exploration::EstimateOptions opt;
  opt.t_margin = c.num("t_margin");
  opt.event.h_exc = c.num("h_exc");
  opt.workers = c.cfg.workers;
  opt.enforce_quality = c.p("enforce_quality").get<bool>();
  const auto betas = c.list("betas");
  const std::size_t n = c.count("n_trials");
  std::string csv = "beta,p1,stderr,successes,undecidable,n,max_radius_ratio\n";
  std::vector<double> xs, ys;
  std::vector<exploration::NestedEventStats> all;
  bool radius_ok = true;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const auto s = exploration::estimate_event_probability(params, betas[i], n, derive_seed(c.cfg.seed, i), opt);
    double worst = 0.0;
    for (double r : s.domain_radii) worst = std::max(worst, r * std::exp(betas[i]));
    radius_ok = radius_ok && worst <= 8.0;
    csv += io::num(betas[i]) + "," + io::num(s.p1_estimate) + "," + io::num(s.p1_stderr) + "," +
           std::to_string(s.successes) + "," + std::to_string(s.undecidable) + "," + std::to_string(n) + "," +
           io::num(worst) + "\n";
    if (s.p1_estimate > 0) {
      xs.push_back(betas[i]);
      ys.push_back(std::log(s.p1_estimate));
    }
    all.push_back(s);
  }
  c.add("event.csv", csv);
  bool decreasing = true;
  for (std::size_t i = 1; i < all.size(); ++i) decreasing = decreasing && all[i].p1_estimate < all[i - 1].p1_estimate;
  const double alpha = diffusion::alpha_exponent(params.kappa);
  json m = {{"alpha", alpha}, {"strictly_decreasing", decreasing}, {"radius_le_8e^-beta", radius_ok}};
  c.criteria["strictly_decreasing"] = decreasing;
  c.criteria["radius_le_8e^-beta"] = radius_ok;
  if (xs.size() >= 2) {
    const auto f = stats::weighted_line_fit(xs, ys);
    m["slope"] = f.slope;
    c.criteria["slope_in_band"] = f.slope >= -1.5 * alpha && f.slope <= 0.0;
  }
  if (c.p("depth2").get<bool>()) {
    const double b2 = c.num("depth2_beta");
    const auto r = exploration::direct_depth2_probability(params, b2, n, derive_seed(c.cfg.seed, 1000), opt);
    const auto s1 = exploration::estimate_event_probability(params, b2, n, derive_seed(c.cfg.seed, 1001), opt);
    const auto sq = exploration::nested_event_probability(s1, 2);
    const double se = std::hypot(r.p2_stderr, sq.pn_stderr);
    const double z = se > 0 ? (r.p2_estimate - sq.pn_renewal) / se : 0.0;
    m["depth2"] = {{"beta", b2},          {"p2_direct", r.p2_estimate}, {"p2_stderr", r.p2_stderr},
                   {"p1_squared", sq.pn_renewal}, {"p1_squared_stderr", sq.pn_stderr}, {"z", z}};
    c.criteria["depth2_within_3se"] = std::abs(z) <= 3.0;
  }
  c.metrics = m;
  bool ok = true;
  for (const auto& [k, v] : c.criteria) ok = ok && v;
  c.pass = ok;
}

inline void sle_trace(RunContext& c) {
  const auto params = params_for(c);
  const auto d = loewner::build_driver(params, c.num("horizon"), c.cfg.seed, std::polar(1.0, c.num("w0_angle")));
  const auto t = loewner::trace_curve(d, std::max<std::size_t>(1, c.count("stride")));
  c.add("trace.csv", io::trace_csv(t));
  if (c.p("svg").get<bool>()) c.add("trace.svg", io::render_trace_svg(t));
  double maxmod = 0;
  for (const auto& z : t.points) maxmod = std::max(maxmod, std::abs(z));
  c.metrics = {{"points", t.points.size()}, {"max_modulus", maxmod}, {"final_conformal_radius", std::exp(-d.horizon())}};
}

inline void outermost_loop(RunContext& c) {
  const auto params = params_for(c);
  const auto tg = c.pair("target");
  const cplx target(tg.first, tg.second);
  const auto loop = exploration::sample_outermost_loop(params, target, c.num("horizon"), c.cfg.seed,
                                                       std::max<std::size_t>(1, c.count("stride")), c.num("h_exc"));
  c.add("loop.csv", io::trace_csv(loop.trace));
  if (c.p("svg").get<bool>()) c.add("loop.svg", io::render_loop_svg(loop.trace.points, target, loop.winding));
  c.metrics = {{"winding", loop.winding},       {"endpoint_gap", loop.endpoint_gap}, {"anchor_time", loop.anchor_time},
               {"ccw_time", loop.ccw_time},     {"attempts", loop.attempts},         {"points", loop.trace.points.size()}};
}

// Box counts of per-seed masks, averaged; fit unless the mask is trivial.
inline void gasket_pipeline(RunContext& c, const std::function<lattice::LatticeConfig(std::uint64_t)>& sample,
                            double target, double tolerance) {
  const int n = static_cast<int>(c.count("n"));
  const std::size_t seeds = std::max<std::size_t>(1, c.count("n_seeds"));
  const int offsets = c.cfg.params.contains("offsets") ? static_cast<int>(c.count("offsets")) : 1;
  const auto scales = dimension::dyadic_scales(n);
  std::vector<lattice::GasketMask> masks(seeds);
  std::vector<lattice::LatticeConfig> first(1);
  parallel_for(seeds, c.cfg.workers, [&](std::size_t i) {
    auto cfg = sample(derive_seed(c.cfg.seed, i));
    masks[i] = lattice::boundary_cluster_gasket(cfg);
    if (i == 0) first[0] = std::move(cfg);
  });
  c.add("config.cleg", io::encode_cleg(first[0]));
  c.add("gasket.pbm", io::mask_pbm(masks[0]));
  if (c.p("svg").get<bool>() && masks[0].count() > 0) c.add("gasket.svg", io::render_mask_svg(masks[0]));
  std::size_t total = 0;
  bool trivial = true;
  for (const auto& m : masks) {
    total += m.count();
    trivial = trivial && (m.count() == 0 || m.count() == m.mask.size());
  }
  c.metrics = {{"n", n}, {"seeds", seeds}, {"mean_gasket_fraction", static_cast<double>(total) / (seeds * masks[0].mask.size())}};
  if (trivial) {
    c.metrics["fit"] = nullptr;
    c.metrics["fit_skipped"] = "trivial mask";
    c.pass = std::nullopt;
    if (total > 0) {
      std::vector<dimension::BoxCountSeries> s;
      for (const auto& m : masks)
        if (m.count() > 0) s.push_back(dimension::box_counts(m, scales, offsets));
      c.add("boxcount.csv", io::boxcount_csv(dimension::average_series(s)));
    }
    return;
  }
  std::vector<dimension::BoxCountSeries> series;
  for (const auto& m : masks)
    if (m.count() > 0) series.push_back(dimension::box_counts(m, scales, offsets));
  const auto avg = dimension::average_series(series);
  c.add("boxcount.csv", io::boxcount_csv(avg));
  const auto window = c.p("window").is_null() ? dimension::default_window(avg) : c.pair("window");
  const auto fit = dimension::fit_box_dimension(avg, window);
  c.add("fit.json", fit_record(fit).dump(2) + "\n");
  c.metrics["fit"] = fit_record(fit);
  c.metrics["target"] = target;
  const bool ok = std::abs(fit.dimension - target) <= tolerance;
  c.criteria["dimension_within_tolerance"] = ok;
  c.pass = ok;
}

inline void perc_gasket(RunContext& c) {
  const int n = static_cast<int>(c.count("n"));
  const double p = c.num("p");
  const bool bc = c.p("boundary_color").get<bool>();
  const bool critical = std::abs(p - 0.5) < 1e-12;
  gasket_pipeline(
      c,
      [&](std::uint64_t s) {
        auto cfg = lattice::sample_percolation(n, p, s);
        cfg.boundary_color = bc;
        return cfg;
      },
      91.0 / 48.0, 0.05);
  if (!critical) {
    c.pass = std::nullopt;
    c.criteria.clear();
  }
}

inline void fk_gasket(RunContext& c) {
  const int n = static_cast<int>(c.count("n"));
  const double q = c.num("q");
  const double p = c.p("p").is_null() ? lattice::self_dual_p(q) : c.num("p");
  const std::size_t sweeps = c.count("sweeps");
  gasket_pipeline(c, [&](std::uint64_t s) { return lattice::sample_fk_config(n, q, p, sweeps, s); }, 15.0 / 8.0, 0.06);
  c.metrics["p"] = p;
  if (std::abs(p - lattice::self_dual_p(q)) > 1e-12) {
    c.pass = std::nullopt;
    c.criteria.clear();
  }
}

inline void dim_fit(RunContext& c) {
  const std::string input = c.p("input").get<std::string>();
  if (input.empty()) throw ConfigError("dim-fit needs params.input (a scale,count CSV)");
  const auto series = io::parse_boxcount_csv(io::read_file(input));
  const auto window = c.p("window").is_null() ? dimension::default_window(series) : c.pair("window");
  const auto fit = dimension::fit_box_dimension(series, window);
  c.add("fit.json", fit_record(fit).dump(2) + "\n");
  c.metrics = {{"fit", fit_record(fit)}};
}

inline void render(RunContext& c) {
  const std::string kind = c.p("kind").get<std::string>();
  io::SvgStyle st;
  st.size = c.num("size");
  st.allow_empty = c.p("allow_empty").get<bool>();
  const std::string input = c.p("input").get<std::string>();
  auto need_input = [&] {
    if (input.empty()) throw ConfigError("render kind '" + kind + "' needs params.input");
    return io::read_file(input);
  };
  std::string svg;
  if (kind == "circle") {
    svg = io::render_trace_svg(loewner::Trace{}, st);
  } else if (kind == "trace") {
    svg = io::render_trace_svg(io::parse_trace_csv(need_input()), st);
  } else if (kind == "loop") {
    const auto t = io::parse_trace_csv(need_input());
    const auto tg = c.pair("target");
    svg = io::render_loop_svg(t.points, cplx(tg.first, tg.second), static_cast<int>(c.num("winding")), st);
  } else if (kind == "mask") {
    svg = io::render_mask_svg(io::parse_pbm(need_input()), st);
  } else {
    throw ConfigError("render kind must be circle, trace, loop or mask");
  }
  c.add("render.svg", svg);
  c.metrics = {{"kind", kind}, {"bytes", svg.size()}};
}

}  // namespace detail

/// Runs the pipeline, writes its data files and result.json, then the
/// manifest (last, atomically).
inline RunManifest run(const ExperimentConfig& cfg) {
  static const std::map<std::string, std::function<void(RunContext&)>> pipelines{
      {"theta-exponent", detail::theta_exponent}, {"theta-lemmas", detail::theta_lemmas},
      {"event-prob", detail::event_prob},         {"sle-trace", detail::sle_trace},
      {"outermost-loop", detail::outermost_loop}, {"perc-gasket", detail::perc_gasket},
      {"fk-gasket", detail::fk_gasket},           {"dim-fit", detail::dim_fit},
      {"render", detail::render}};
  const auto start = std::chrono::steady_clock::now();
  RunContext ctx{cfg};
  pipelines.at(cfg.command)(ctx);
  json result = {{"command", cfg.command},
                 {"params", cfg.params},
                 {"seed", cfg.seed},
                 {"metrics", ctx.metrics},
                 {"pass", ctx.pass ? json(*ctx.pass) : json(nullptr)}};
  ctx.add("result.json", result.dump(2) + "\n");
  json files = json::array();
  for (const auto& [name, content] : ctx.files) {
    io::write_atomic(cfg.output_dir / name, content);
    files.push_back({{"name", name}, {"bytes", content.size()}, {"fnv1a64", io::hex64(io::fnv1a64(content))}});
  }
  json criteria = json::object();
  for (const auto& [k, v] : ctx.criteria) criteria[k] = v;
  RunManifest m;
  m.pass = ctx.pass;
  m.document = {{"tool", "cle"},
                {"version", kToolVersion},
                {"config",
                 {{"command", cfg.command},
                  {"params", cfg.params},
                  {"seed", cfg.seed},
                  {"seed_source", cfg.seed_source},
                  {"workers", cfg.workers},
                  {"output_dir", cfg.output_dir.string()}}},
                {"wall_time_s", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()},
                {"files", files},
                {"criteria", criteria},
                {"pass", result["pass"]}};
  io::write_atomic(cfg.output_dir / "manifest.json", m.document.dump(2) + "\n");
  return m;
}

}  // namespace cle::experiment
