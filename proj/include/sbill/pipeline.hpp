#pragma once

// Config-driven runs: direction set -> g -> f -> table -> curves -> spectrum,
// plus the twist-map track. Every cross-check lands in ReportBundle::checks and
// the exit status is 0 only when all of them pass.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "sbill/billiard_map.hpp"
#include "sbill/errors.hpp"
#include "sbill/invariant_curves.hpp"
#include "sbill/perturbation.hpp"
#include "sbill/spectrum.hpp"
#include "sbill/svg.hpp"
#include "sbill/table_builder.hpp"
#include "sbill/twist_example.hpp"
#include "sbill/vanishing_builder.hpp"

namespace sbill {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConflict = 2,
  kExitModuleError = 3,
  kExitConfigError = 4,
};

struct TwistConfig {
  int a{1};
  int b{1};
  PotentialSpec potential;
  int samples{40};
};

struct RunConfig {
  std::optional<DirectionSetSpec> spec;
  std::optional<TrigPoly> g;  // explicit odd trigonometric g instead of a spec
  Variant variant{Variant::Transversal};
  std::string backend{"bump"};
  double amplitude{0.05};
  double tau{1.0};
  std::optional<double> ell;  // empty = auto
  std::size_t scan_grid{kScanGrid};
  std::size_t curve_grid{kCurveGrid};
  std::size_t fit_grid{kDefaultFitGrid};
  int fit_degree{kDefaultFitDegree};
  double invariance_tol{1e-7};
  double slope_tol{1e-4};
  double symplectic_tol{1e-4};
  int symplectic_samples{100};
  std::uint32_t seed{1};
  std::vector<double> sweep{0.0, 0.25, 0.5, 1.0};
  double sweep_tol{1e-6};
  std::string out{"out"};
  bool emit_svg{false};
  std::optional<TwistConfig> twist;
};

inline RunConfig run_config_from_json(const nlohmann::json& j) {
  RunConfig c;
  if (j.contains("spec")) c.spec = direction_set_from_json(j.at("spec"));
  if (j.contains("g")) c.g = trig_poly_from_json(j.at("g"));
  if (c.spec && c.g) throw Error(ErrorCode::InvalidArgument, "give either spec or g, not both");
  if (j.contains("variant")) c.variant = variant_from_string(j.at("variant").get<std::string>());
  c.backend = j.value("backend", c.g ? std::string("trigpoly") : std::string("bump"));
  if (c.backend != "bump" && c.backend != "trigpoly") {
    throw Error(ErrorCode::InvalidArgument, "backend must be bump or trigpoly");
  }
  if (c.g && c.backend == "bump") throw Error(ErrorCode::InvalidArgument, "an explicit g needs the trigpoly backend");
  c.amplitude = j.value("amplitude", c.amplitude);
  c.tau = j.value("tau", c.tau);
  if (j.contains("ell") && !(j.at("ell").is_string() && j.at("ell").get<std::string>() == "auto")) {
    c.ell = j.at("ell").get<double>();
  }
  if (j.contains("grid")) {
    const auto& gj = j.at("grid");
    c.scan_grid = gj.value("scan", c.scan_grid);
    c.curve_grid = gj.value("curve", c.curve_grid);
    c.fit_grid = gj.value("fit", c.fit_grid);
    c.fit_degree = gj.value("fit_degree", c.fit_degree);
  }
  if (j.contains("tolerances")) {
    const auto& tj = j.at("tolerances");
    c.invariance_tol = tj.value("invariance", c.invariance_tol);
    c.slope_tol = tj.value("slope", c.slope_tol);
    c.symplectic_tol = tj.value("symplectic", c.symplectic_tol);
    c.sweep_tol = tj.value("sweep", c.sweep_tol);
  }
  c.symplectic_samples = j.value("symplectic_samples", c.symplectic_samples);
  c.seed = j.value("seed", c.seed);
  if (j.contains("sweep")) c.sweep = j.at("sweep").get<std::vector<double>>();
  c.out = j.value("out", c.out);
  c.emit_svg = j.value("emit_svg", c.emit_svg);
  if (j.contains("twist")) {
    const auto& tj = j.at("twist");
    TwistConfig t;
    t.a = tj.value("a", 1);
    t.b = tj.value("b", 1);
    if (tj.contains("potential")) t.potential = potential_spec_from_json(tj.at("potential"));
    t.samples = tj.value("samples", t.samples);
    c.twist = t;
  }

  for (double tol : {c.invariance_tol, c.slope_tol, c.symplectic_tol, c.sweep_tol}) {
    if (!(tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerances must be positive");
  }
  if (!(c.tau >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be non-negative");
  if (c.ell && !(*c.ell > 1.0)) throw Error(ErrorCode::InvalidArgument, "ell must exceed 1");
  if (c.scan_grid < 64 || c.curve_grid < 1024 || c.fit_grid < 64) {
    throw Error(ErrorCode::InvalidArgument, "grids too small (scan >= 64, curve >= 1024, fit >= 64)");
  }
  if (!(c.amplitude > 0.0)) throw Error(ErrorCode::InvalidArgument, "amplitude must be positive");
  return c;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::InvalidArgument, "cannot read config " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  return run_config_from_json(j);
}

struct Check {
  std::string name;
  double value{0.0};
  double tol{0.0};
  bool passed{false};
};

struct ReportBundle {
  nlohmann::json report;
  std::vector<Check> checks;
  std::vector<std::string> files;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }
  void check(const std::string& name, double value, double tol) { checks.push_back({name, value, tol, value <= tol}); }
};

inline nlohmann::json to_json(const std::vector<Check>& checks) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : checks) j.push_back({{"name", c.name}, {"value", c.value}, {"tol", c.tol}, {"passed", c.passed}});
  return j;
}

inline PerturbationData perturbation_for(const RunConfig& cfg) {
  if (cfg.g) return recover_perturbation(*cfg.g, cfg.fit_grid);
  const DirectionSetSpec spec = cfg.spec.value_or(DirectionSetSpec{});
  const auto g = build_g(spec, cfg.variant, cfg.amplitude);
  if (cfg.backend == "trigpoly") {
    return recover_perturbation(std::shared_ptr<const SymmetricFunction>(fit_symmetric(*g, cfg.fit_degree, cfg.fit_grid)),
                                cfg.fit_grid);
  }
  return recover_perturbation(std::shared_ptr<const SymmetricFunction>(g), cfg.fit_grid, cfg.fit_degree);
}

inline StringTable table_for(const RunConfig& cfg, double tau) {
  PerturbationData pd = perturbation_for(cfg);
  const double ell = cfg.ell.value_or(choose_string_length(pd, cfg.tau, cfg.scan_grid));
  return make_string_table(std::move(pd), tau, ell, cfg.scan_grid);
}

struct Stages {
  bool curves{true};
  bool spectrum{true};
};

namespace detail {

inline std::string out_path(const RunConfig& cfg, ReportBundle& b, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  const std::string p = (std::filesystem::path(cfg.out) / name).string();
  b.files.push_back(name);
  return p;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  os << j.dump(2) << '\n';
}

inline void table_svg(const StringTable& st, const DiameterSet& ds, const std::string& path) {
  std::vector<Point2> pts;
  double r = 0.0;
  for (int i = 0; i < 720; ++i) {
    pts.push_back(st.boundary(kTwoPi * i / 720.0));
    r = std::max(r, norm(pts.back()));
  }
  SvgPlot plot(-1.05 * r, 1.05 * r, -1.05 * r, 1.05 * r, 600, 600, true);
  plot.polyline(pts, "#1f4e79", 1.5, true);
  std::vector<Point2> circle;
  for (int i = 0; i < 180; ++i) circle.push_back(unit(kTwoPi * i / 180.0));
  plot.polyline(circle, "#888", 1.0, true);
  for (const auto& d : ds.isolated) plot.line(st.boundary(d.t0), st.boundary(d.t0 + kPi), "#c0392b", 0.8);
  plot.write(path);
}

inline void phase_svg(const CurveSample& cs, const SingularSet& ss, const std::string& path) {
  double lo = kPi, hi = 0.0;
  for (std::size_t i = 0; i < cs.t.size(); ++i) {
    lo = std::min(lo, cs.splice_min[i]);
    hi = std::max(hi, cs.splice[i]);
  }
  const double pad = 0.05 * std::max(hi - lo, 1e-9);
  SvgPlot plot(0.0, kTwoPi, lo - pad, hi + pad);
  plot.axes();
  std::vector<Point2> a, b;
  for (std::size_t i = 0; i < cs.t.size(); ++i) {
    a.push_back({cs.t[i], cs.plus[i]});
    b.push_back({cs.t[i], cs.minus[i]});
  }
  plot.polyline(a, "#1f77b4");
  plot.polyline(b, "#ff7f0e");
  for (const auto& p : ss.points) plot.marker({p.t0, kPi / 2.0}, "#c0392b");
  plot.label("lambda_+ (blue), lambda_- (orange), t in [0, 2pi)", 40, 20);
  plot.write(path);
}

}  // namespace detail

/// Table stage, then curves and spectrum as requested; writes every artifact under cfg.out.
inline ReportBundle run_pipeline(const RunConfig& cfg, Stages stages = {}) {
  ReportBundle b;
  const StringTable st = table_for(cfg, cfg.tau);
  const TableScan sc = scan_table(st, cfg.scan_grid);
  b.report["table"] = table_summary(st, sc);
  b.report["config"] = {{"tau", cfg.tau}, {"ell", st.ell()}, {"backend", cfg.backend}, {"variant", to_string(cfg.variant)}};
  if (cfg.spec) b.report["config"]["spec"] = to_json(*cfg.spec);
  b.check("reconstruction_defect", st.perturbation().reconstruction_defect, kReconstructionTol);
  write_table_csv(st, detail::out_path(cfg, b, "table.csv"), cfg.scan_grid);

  const DiameterSet ds = find_diameters(st, cfg.scan_grid);
  b.report["continuum"] = ds.full_continuum || !ds.continua.empty();
  nlohmann::json dj = nlohmann::json::array();
  for (const auto& d : ds.isolated) dj.push_back(to_json(d));
  b.report["diameters"] = dj;

  // area preservation at random phase points
  {
    std::mt19937 rng(cfg.seed);
    std::uniform_real_distribution<double> ut(0.0, kTwoPi), uth(0.3, kPi - 0.3);
    double worst = 0.0;
    for (int i = 0; i < cfg.symplectic_samples; ++i) {
      const PhasePoint p{ut(rng), uth(rng)};
      worst = std::max(worst, std::abs(area_preserving_det(st, p, 2) - 1.0));
    }
    b.check("symplectic_det", worst, cfg.symplectic_tol);
  }

  if (stages.curves) {
    const CurveSample cs = sample_curves(st, cfg.curve_grid);
    write_curves_csv(cs, detail::out_path(cfg, b, "curves.csv"));
    nlohmann::json res;
    for (Branch br : {Branch::Plus, Branch::Minus, Branch::SpliceMax, Branch::SpliceMin}) {
      const double r = invariance_residual(st, br, cs);
      res[to_string(br)] = r;
      b.check("invariance_" + to_string(br), r, cfg.invariance_tol);
    }
    b.report["invariance"] = res;
    const SingularSet ss = singular_points(st);
    for (const auto& p : ss.points) {
      const auto [left, right] = splice_slopes_fd(st, p.t0);
      const double m = std::abs(p.mean_slope);
      b.check("splice_slopes@" + std::to_string(p.t0), std::max(std::abs(left + m), std::abs(right - m)),
              cfg.slope_tol);
      b.check("radius_curvature@" + std::to_string(p.t0), std::abs(p.r_xixi - p.mean_slope), cfg.slope_tol);
    }
    b.report["singular"] = to_json(ss);
    detail::write_json(detail::out_path(cfg, b, "singular.json"), to_json(ss));
    if (cfg.emit_svg) {
      detail::phase_svg(cs, ss, detail::out_path(cfg, b, "phase.svg"));
    }
  }

  if (stages.spectrum) {
    const auto rows = spectrum(st);
    nlohmann::json sj = nlohmann::json::array();
    for (const auto& r : rows) {
      sj.push_back(to_json(r));
      b.check("eigenvalue_product@" + std::to_string(r.t0), std::abs(r.det - 1.0), cfg.symplectic_tol);
    }
    b.report["spectrum"] = sj;
    detail::write_json(detail::out_path(cfg, b, "spectrum.json"), sj);
    write_spectrum_csv(rows, detail::out_path(cfg, b, "spectrum.csv"));
  }

  if (cfg.emit_svg) detail::table_svg(st, ds, detail::out_path(cfg, b, "table.svg"));
  return b;
}

/// Singular points for each tau in cfg.sweep (as fractions of cfg.tau); locations must not move.
inline ReportBundle run_sweep(const RunConfig& cfg) {
  ReportBundle b;
  PerturbationData pd = perturbation_for(cfg);
  const double ell = cfg.ell.value_or(choose_string_length(pd, cfg.tau, cfg.scan_grid));
  nlohmann::json rows = nlohmann::json::array();
  std::optional<std::vector<double>> ref;
  double drift = 0.0;
  bool count_ok = true;
  for (double frac : cfg.sweep) {
    const StringTable st = make_string_table(pd, frac * cfg.tau, ell, cfg.scan_grid);
    const SingularSet ss = singular_points(st);
    std::vector<double> ts;
    for (const auto& p : ss.points) ts.push_back(p.t0);
    rows.push_back({{"tau", frac * cfg.tau}, {"continuum", ss.continuum}, {"points", ts}});
    if (frac == 0.0) continue;
    if (!ref) {
      ref = ts;
    } else if (ref->size() != ts.size()) {
      count_ok = false;
    } else {
      for (std::size_t i = 0; i < ts.size(); ++i) drift = std::max(drift, std::abs(ts[i] - (*ref)[i]));
    }
  }
  b.report["sweep"] = rows;
  b.report["ell"] = ell;
  b.check("sweep_location_drift", count_ok ? drift : 1.0, cfg.sweep_tol);
  detail::write_json(detail::out_path(cfg, b, "sweep.json"), rows);
  return b;
}

inline ReportBundle run_twist(const RunConfig& cfg, double invariance_tol = 1e-6) {
  ReportBundle b;
  const TwistConfig tc = cfg.twist.value_or(TwistConfig{});
  const auto pot = build_potential(tc.potential);
  const TwistSystem sys(tc.a, tc.b, pot);
  const auto P = curve_from_energy(pot, tc.b, sys.energy_level());
  write_twist_csv(P, 2000, detail::out_path(cfg, b, "twist_curve.csv"));

  nlohmann::json corners = nlohmann::json::array();
  for (const auto& c : pot->critical_points()) {
    if (!c.maximum) continue;
    const auto [l, r] = corner_slopes(*pot, tc.b, c.x);
    const auto [fl, fr] = corner_slopes_fd(P, c.x);
    corners.push_back({{"x", c.x}, {"degenerate", c.degenerate}, {"slopes", {l, r}}, {"fd_slopes", {fl, fr}}});
    if (c.degenerate) {
      b.check("flat_corner@" + std::to_string(c.x), std::max(std::abs(fl), std::abs(fr)), 1e-6);
    } else {
      b.check("corner@" + std::to_string(c.x), std::max(std::abs(fl - l), std::abs(fr - r)), 1e-4);
    }
  }
  b.report["corners"] = corners;
  detail::write_json(detail::out_path(cfg, b, "twist_corners.json"), corners);

  double drift = 0.0, dev = 0.0;
  for (int i = 0; i < tc.samples; ++i) {
    const double X = (i + 0.37) / tc.samples;
    const TwistState s0{X / tc.b, (P(X) + tc.a) / tc.b, 0.0};
    const TwistState s1 = time_one_map(sys, s0);
    const auto [X1, P1] = reduce(sys, s1.x, s1.p, s1.t);
    dev = std::max(dev, std::abs(P1 - P(X1)));
    if (i < 3) {
      // off-curve energy drift over 100 time units
      TwistState s{X / tc.b, (0.5 + P(X) + tc.a) / tc.b, 0.0};
      const auto [Xa, Pa] = reduce(sys, s.x, s.p, s.t);
      s = integrate(sys, s, 100.0);
      const auto [Xb, Pb] = reduce(sys, s.x, s.p, s.t);
      drift = std::max(drift, std::abs(sys.K(Xb, Pb) - sys.K(Xa, Pa)));
    }
  }
  b.check("twist_time_one_invariance", dev, invariance_tol);
  b.check("twist_energy_drift", drift, 1e-8);
  b.report["twist"] = {{"a", tc.a}, {"b", tc.b}, {"invariance", dev}, {"energy_drift", drift}};

  if (cfg.emit_svg) {
    double hi = 0.0;
    std::vector<Point2> pts;
    for (int i = 0; i <= 1000; ++i) {
      pts.push_back({i / 1000.0, P(i / 1000.0)});
      hi = std::max(hi, pts.back().y);
    }
    SvgPlot plot(0.0, 1.0, 0.0, 1.05 * hi);
    plot.axes();
    plot.polyline(pts, "#1f4e79");
    for (const auto& c : pot->critical_points()) {
      if (c.maximum) plot.marker({c.x, 0.0}, c.degenerate ? "#888" : "#c0392b");
    }
    plot.write(detail::out_path(cfg, b, "twist.svg"));
  }
  return b;
}

/// Writes report.json (sorted keys) and returns the process exit status.
inline int finish(const RunConfig& cfg, ReportBundle& b, const std::string& name = "report.json") {
  b.report["checks"] = to_json(b.checks);
  b.report["passed"] = b.passed();
  b.report["files"] = b.files;
  detail::write_json(detail::out_path(cfg, b, name), b.report);
  return b.passed() ? kExitOk : kExitCheckFailed;
}

inline int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ClassificationConflict: return kExitConflict;
    case ErrorCode::InvalidArgument: return kExitConfigError;
    default: return kExitModuleError;
  }
}

}  // namespace sbill
