#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "sbill/sbill.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  std::size_t grid{0};
  bool emit_svg{false};
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory (default: config \"out\", else ./out)");
  sub->add_option("--grid", c.grid, "curve grid size (default 4096, at least 1024)");
  sub->add_flag("--emit-svg", c.emit_svg, "also write SVG figures");
}

sbill::RunConfig resolve(const Common& c) {
  sbill::RunConfig cfg = c.config.empty() ? sbill::run_config_from_json(nlohmann::json::object())
                                          : sbill::load_run_config(c.config);
  if (!c.out.empty()) cfg.out = c.out;
  if (c.grid != 0) {
    if (c.grid < 1024) throw sbill::Error(sbill::ErrorCode::InvalidArgument, "--grid must be at least 1024");
    cfg.curve_grid = c.grid;
  }
  cfg.emit_svg = cfg.emit_svg || c.emit_svg;
  return cfg;
}

int report(const sbill::RunConfig& cfg, sbill::ReportBundle& b, const std::string& name = "report.json") {
  const int code = sbill::finish(cfg, b, name);
  for (const auto& ch : b.checks) {
    if (!ch.passed) std::cerr << "check failed: " << ch.name << " = " << ch.value << " > " << ch.tol << '\n';
  }
  std::cout << (b.passed() ? "ok" : "FAILED") << ": " << b.checks.size() << " checks, reports in " << cfg.out << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "String-construction billiard tables: invariant curves, singular points and 2-periodic orbit spectra.\n"
      "Config keys (all optional): spec {intervals, isolated, accumulations} | g [[k, re, im], ...],\n"
      "variant (transversal), backend (bump; trigpoly for g), amplitude (0.05), tau (1), ell (auto),\n"
      "grid {scan 8192, curve 4096, fit 4096, fit_degree 128}, tolerances {invariance 1e-7, slope 1e-4,\n"
      "symplectic 1e-4, sweep 1e-6}, symplectic_samples (100), seed (1), sweep ([0, 0.25, 0.5, 1]),\n"
      "out (out), emit_svg (false), twist {a 1, b 1, potential {maxima, degenerate, accumulations, amplitude}}.\n"
      "Exit status: 0 all checks passed, 1 a check failed, 2 classification conflict, 3 module error, 4 bad config."};
  app.require_subcommand(1);

  Common table_opts, curves_opts, spectrum_opts, twist_opts, sweep_opts;
  auto* table = app.add_subcommand("table", "build the table and write table.csv");
  auto* curves = app.add_subcommand("curves", "table plus invariant curves and singular points");
  auto* spec = app.add_subcommand("spectrum", "table, curves and diameter spectra");
  auto* twist = app.add_subcommand("twist", "twist-map example: potential, corners, time-1 map");
  auto* sweep = app.add_subcommand("sweep", "singular points across a tau sweep");
  add_common(table, table_opts);
  add_common(curves, curves_opts);
  add_common(spec, spectrum_opts);
  add_common(twist, twist_opts);
  add_common(sweep, sweep_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (table->parsed()) {
      const auto cfg = resolve(table_opts);
      auto b = sbill::run_pipeline(cfg, {false, false});
      return report(cfg, b);
    }
    if (curves->parsed()) {
      const auto cfg = resolve(curves_opts);
      auto b = sbill::run_pipeline(cfg, {true, false});
      return report(cfg, b);
    }
    if (spec->parsed()) {
      const auto cfg = resolve(spectrum_opts);
      auto b = sbill::run_pipeline(cfg, {true, true});
      return report(cfg, b);
    }
    if (twist->parsed()) {
      const auto cfg = resolve(twist_opts);
      auto b = sbill::run_twist(cfg);
      return report(cfg, b);
    }
    if (sweep->parsed()) {
      const auto cfg = resolve(sweep_opts);
      auto b = sbill::run_sweep(cfg);
      return report(cfg, b, "sweep_report.json");
    }
  } catch (const sbill::Error& e) {
    std::cerr << e.what() << '\n';
    return sbill::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return sbill::kExitConfigError;
  }
  return sbill::kExitOk;
}
