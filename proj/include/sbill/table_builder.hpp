#pragma once

// String construction around the unit circle. The perturbed inner body is
// gamma(t) = e^{it} (G + i(H - 1)) with G = tau g, H = tau h, and the table
// boundary is Gamma(t) = gamma(t) - s(t) i e^{it}, where
//   s = N / (2D),  N = l^2 - G^2 - (1 - H)^2,  D = l + 1 - H.
// In the frame rotating with e^{it}, Gamma = (A, B) = (G, H - 1 - s).

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sbill/errors.hpp"
#include "sbill/perturbation.hpp"
#include "sbill/point2.hpp"
#include "sbill/trig_series.hpp"

namespace sbill {

inline constexpr std::size_t kScanGrid = 8192;
inline constexpr double kCurvatureFdStep = 1e-4;

// ---------------------------------------------------------------------------
// Convex bodies from a curvature radius

struct ConvexBody {
  TrigPoly rho;
  Point2 base;

  Point2 point(double t) const { return base + path_integral(rho, t); }

  /// Constant width iff rho has no even harmonics beyond the mean.
  bool constant_width() const {
    return rho.max_coeff_where([](int k) { return k != 0 && k % 2 == 0; }) <= kSymmetryTol;
  }
};

inline ConvexBody make_body(const TrigPoly& rho, Point2 base, std::size_t grid = kScanGrid) {
  if (std::abs(rho.coeff(-1)) > kSymmetryTol) {
    throw Error(ErrorCode::NonClosedCurve, "curvature radius has alpha_{-1} != 0");
  }
  for (std::size_t j = 0; j < grid; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / grid;
    if (!(rho(t) > 0.0)) {
      throw Error(ErrorCode::NonpositiveCurvatureRadius, "rho(" + std::to_string(t) + ") <= 0");
    }
  }
  return {rho, base};
}

/// Distance between the two supporting lines orthogonal to e^{i theta}. The
/// outward normal at gamma(t) is -i e^{it}, so the support points sit at theta +- pi/2.
inline double width(const ConvexBody& body, double theta) {
  return dot(body.point(theta + kPi / 2.0) - body.point(theta - kPi / 2.0), unit(theta));
}

/// Support width of any closed parametrized curve: coarse scan for max and min
/// of <curve(t), u>, then golden-section refinement of each.
template <class Curve>
double support_width(Curve&& curve, double theta, std::size_t samples = 1024) {
  const Point2 u = unit(theta);
  auto proj = [&](double t) { return dot(curve(t), u); };
  auto refine = [&](double t0, double sign) {
    const double step = kTwoPi / samples;
    double a = t0 - step, b = t0 + step;
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = sign * proj(x1), f2 = sign * proj(x2);
    for (int it = 0; it < 100 && b - a > 1e-13; ++it) {
      if (f1 > f2) {
        b = x2, x2 = x1, f2 = f1;
        x1 = b - r * (b - a), f1 = sign * proj(x1);
      } else {
        a = x1, x1 = x2, f1 = f2;
        x2 = a + r * (b - a), f2 = sign * proj(x2);
      }
    }
    return proj(0.5 * (a + b));
  };
  double tmax = 0.0, tmin = 0.0, vmax = -1e300, vmin = 1e300;
  for (std::size_t j = 0; j < samples; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / samples;
    const double v = proj(t);
    if (v > vmax) vmax = v, tmax = t;
    if (v < vmin) vmin = v, tmin = t;
  }
  return refine(tmax, 1.0) - refine(tmin, -1.0);
}

// ---------------------------------------------------------------------------
// String tables

struct BoundaryJet {
  Point2 p;   // Gamma(t)
  Point2 d1;  // Gamma'(t)
  Point2 d2;  // Gamma''(t)
};

/// s and its first two derivatives.
struct StringJet {
  double s{0.0};
  double s1{0.0};
  double s2{0.0};
};

class StringTable {
 public:
  StringTable(PerturbationData pd, double tau, double ell) : pd_(std::move(pd)), tau_(tau), ell_(ell) {}

  double tau() const { return tau_; }
  double ell() const { return ell_; }
  const PerturbationData& perturbation() const { return pd_; }

  /// Scaled fields G = tau g, H = tau h and derivatives.
  FieldJet field(double t) const {
    if (tau_ == 0.0) return {};
    const FieldJet j = pd_.jet(t);
    return {tau_ * j.g, tau_ * j.g1, tau_ * j.g2, tau_ * j.h};
  }

  double h_of_t(double t) const { return field(t).h; }
  double g_of_t(double t) const { return field(t).g; }

  /// Perturbed inner body gamma(t) = -i e^{it} + tau p(t).
  Point2 inner(double t) const {
    const FieldJet f = field(t);
    return rotate(Point2{f.g, f.h - 1.0}, t);
  }

  /// s from the direct formula 1/2 (l^2 - |gamma|^2) / (l - <gamma, i e^{it}>).
  double s_of_t(double t) const {
    const Point2 gm = inner(t);
    return 0.5 * (ell_ * ell_ - dot(gm, gm)) / (ell_ - dot(gm, perp(unit(t))));
  }

  /// s in terms of h alone: 1/2 (l^2 - 1 + 2h - h^2 - h'^2) / (l + 1 - h).
  double s_from_h(double t) const {
    const FieldJet f = field(t);
    const double hd = f.hdot();
    return 0.5 * (ell_ * ell_ - 1.0 + 2.0 * f.h - f.h * f.h - hd * hd) / (ell_ + 1.0 - f.h);
  }

  StringJet s_jet(double t) const { return s_jet(field(t)); }

  Point2 boundary(double t) const {
    const FieldJet f = field(t);
    const StringJet sj = s_jet(f);
    return rotate(Point2{f.g, f.h - 1.0 - sj.s}, t);
  }

  double radius(double t) const { return norm(boundary(t)); }

  BoundaryJet boundary_jet(double t) const {
    const FieldJet f = field(t);
    const StringJet sj = s_jet(f);
    const double A = f.g, A1 = f.g1, A2 = f.g2;
    const double B = f.h - 1.0 - sj.s;
    const double B1 = -f.g - sj.s1;
    const double B2 = -f.g1 - sj.s2;
    const Point2 v{A, B};
    const Point2 v1{A1 - B, B1 + A};
    const Point2 v2{A2 - 2.0 * B1 - A, B2 + 2.0 * A1 - B};
    return {rotate(v, t), rotate(v1, t), rotate(v2, t)};
  }

  double curvature_analytic(double t) const {
    const BoundaryJet j = boundary_jet(t);
    const double sp = norm(j.d1);
    if (!(sp > 1e-14)) throw Error(ErrorCode::DegenerateTangent, "Gamma'(t) vanishes");
    return cross(j.d1, j.d2) / (sp * sp * sp);
  }

  /// Smallest feature width of g on either side of t.
  double local_scale(double t) const {
    if (tau_ == 0.0) return kPi;
    const auto& g = *pd_.g;
    return std::min({g.feature_scale(t), g.feature_scale(t - 1e-9), g.feature_scale(t + 1e-9)});
  }

  /// Curvature from central differences of Gamma with one Richardson step.
  double curvature_of_boundary(double t, double step = kCurvatureFdStep) const {
    step = std::min(step, local_scale(t) / 10.0);
    auto d1 = [&](double h) { return (boundary(t + h) - boundary(t - h)) / (2.0 * h); };
    auto d2 = [&](double h) { return (boundary(t + h) - 2.0 * boundary(t) + boundary(t - h)) / (h * h); };
    const Point2 g1 = (4.0 * d1(step / 2.0) - d1(step)) / 3.0;
    const Point2 g2 = (4.0 * d2(step / 2.0) - d2(step)) / 3.0;
    const double sp = norm(g1);
    if (!(sp > 1e-14)) throw Error(ErrorCode::DegenerateTangent, "Gamma'(t) vanishes");
    return cross(g1, g2) / (sp * sp * sp);
  }

  /// Arc-length speed |Gamma'(t)|.
  double speed(double t) const { return norm(boundary_jet(t).d1); }

  /// The perturbed body as a ConvexBody (polynomial backend only).
  std::optional<ConvexBody> inner_body() const {
    if (!pd_.f_poly) return std::nullopt;
    return make_body(TrigPoly::constant(1.0) + tau_ * *pd_.f_poly, tau_ * pd_.c + Point2{0.0, -1.0});
  }

 private:
  StringJet s_jet(const FieldJet& f) const {
    const double G = f.g, G1 = f.g1, G2 = f.g2, H = f.h;
    const double N = ell_ * ell_ - G * G - (1.0 - H) * (1.0 - H);
    const double N1 = -2.0 * G * G1 - 2.0 * (1.0 - H) * G;
    const double N2 = -2.0 * (G1 * G1 + G * G2) - 2.0 * (G * G + (1.0 - H) * G1);
    const double D = ell_ + 1.0 - H, D1 = G, D2 = G1;
    const double q = N / D;
    const double q1 = (N1 - q * D1) / D;
    const double q2 = (N2 - 2.0 * q1 * D1 - q * D2) / D;
    return {0.5 * q, 0.5 * q1, 0.5 * q2};
  }

  PerturbationData pd_;
  double tau_;
  double ell_;
};

/// Diagnostics gathered while validating a table.
struct TableScan {
  double min_rho{0.0};
  double min_s{0.0};
  double min_curvature{0.0};
  double turning{0.0};
  double max_s_route_gap{0.0};
  double max_s_radius_gap{0.0};
};

inline TableScan scan_table(const StringTable& st, std::size_t grid = kScanGrid) {
  TableScan out{1e300, 1e300, 1e300, 0.0, 0.0, 0.0};
  Point2 prev_tangent;
  Point2 first_tangent;
  for (std::size_t j = 0; j < grid; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / grid;
    const FieldJet f = st.field(t);
    // rho_2 = 1 + tau f = 1 + G' - H
    out.min_rho = std::min(out.min_rho, 1.0 + f.g1 - f.h);
    const double s = st.s_of_t(t);
    out.min_s = std::min(out.min_s, s);
    out.max_s_route_gap = std::max(out.max_s_route_gap, std::abs(s - st.s_from_h(t)));
    out.max_s_radius_gap = std::max(out.max_s_radius_gap, std::abs(s - (st.ell() - st.radius(t))));
    const BoundaryJet bj = st.boundary_jet(t);
    const double sp = norm(bj.d1);
    out.min_curvature = std::min(out.min_curvature, sp > 0.0 ? cross(bj.d1, bj.d2) / (sp * sp * sp) : 0.0);
    const Point2 tangent = sp > 0.0 ? bj.d1 / sp : Point2{};
    if (j == 0) {
      first_tangent = tangent;
    } else {
      out.turning += angle_between(prev_tangent, tangent);
    }
    prev_tangent = tangent;
  }
  out.turning += angle_between(prev_tangent, first_tangent);
  return out;
}

inline StringTable make_string_table(PerturbationData pd, double tau, double ell, std::size_t grid = kScanGrid) {
  if (!(ell > 1.0)) throw Error(ErrorCode::StringTooShort, "string length must exceed 1");
  StringTable st(std::move(pd), tau, ell);
  const TableScan sc = scan_table(st, grid);
  if (!(sc.min_rho > 0.0)) {
    throw Error(ErrorCode::StringTooShort, "1 + tau f <= 0 on the grid (min " + std::to_string(sc.min_rho) + ")");
  }
  if (!(sc.min_s > 0.0)) throw Error(ErrorCode::StringTooShort, "s <= 0 on the grid");
  if (!(sc.min_curvature > 0.0) || std::abs(sc.turning - kTwoPi) > 1e-6) {
    throw Error(ErrorCode::StringTooShort, "boundary is not strictly convex (min curvature " +
                                               std::to_string(sc.min_curvature) + ", turning " +
                                               std::to_string(sc.turning) + ")");
  }
  return st;
}

/// l = max(10, 4 (1 + |tau h|_{C^2})), doubled until 1 - 2 H''/(l + 1 - H) > 1/2 on the grid.
inline double choose_string_length(const PerturbationData& pd, double tau, std::size_t grid = kScanGrid) {
  if (tau == 0.0) return 10.0;
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  std::vector<FieldJet> jets;
  jets.reserve(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / grid;
    FieldJet f = pd.jet(t);
    f = {tau * f.g, tau * f.g1, tau * f.g2, tau * f.h};
    m0 = std::max(m0, std::abs(f.h));
    m1 = std::max(m1, std::abs(f.hdot()));
    m2 = std::max(m2, std::abs(f.hddot()));
    jets.push_back(f);
  }
  double ell = std::max(10.0, 4.0 * (1.0 + m0 + m1 + m2));
  auto factor_ok = [&](double l) {
    return std::all_of(jets.begin(), jets.end(),
                       [&](const FieldJet& f) { return 1.0 - 2.0 * f.hddot() / (l + 1.0 - f.h) > 0.5; });
  };
  while (!factor_ok(ell)) ell *= 2.0;
  return ell;
}

// ---------------------------------------------------------------------------
// Export

inline void write_table_csv(const StringTable& st, const std::string& path, std::size_t grid) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  os.precision(17);
  os << "t,x,y,s,h,g,curvature\n";
  for (std::size_t j = 0; j < grid; ++j) {
    const double t = kTwoPi * static_cast<double>(j) / grid;
    const Point2 p = st.boundary(t);
    const FieldJet f = st.field(t);
    os << t << ',' << p.x << ',' << p.y << ',' << st.s_of_t(t) << ',' << f.h << ',' << f.g << ','
       << st.curvature_analytic(t) << '\n';
  }
}

inline nlohmann::json table_summary(const StringTable& st, const TableScan& sc) {
  nlohmann::json j;
  j["tau"] = st.tau();
  j["ell"] = st.ell();
  j["backend"] = st.perturbation().backend;
  j["c"] = {st.perturbation().c.x, st.perturbation().c.y};
  j["min_rho"] = sc.min_rho;
  j["min_s"] = sc.min_s;
  j["min_curvature"] = sc.min_curvature;
  j["turning"] = sc.turning;
  j["s_route_gap"] = sc.max_s_route_gap;
  j["s_radius_gap"] = sc.max_s_radius_gap;
  j["reconstruction_defect"] = st.perturbation().reconstruction_defect;
  j["projection_defect"] = st.perturbation().projection_defect;
  j["fit_residual"] = st.perturbation().fit_residual;
  if (st.perturbation().f_poly) j["f"] = to_json(*st.perturbation().f_poly);
  return j;
}

}  // namespace sbill
