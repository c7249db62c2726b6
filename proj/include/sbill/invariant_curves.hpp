#pragma once

// The two invariant curves of T^2 built into a string table. Through every
// boundary point pass one chord along the line to the origin (the normal of
// the inner circle) and its mirror about the boundary normal:
//   lambda_-(t) = arccos(-<Gamma, Gamma'>/(|Gamma||Gamma'|)),  lambda_+ = pi - lambda_-.
// T swaps the two branches, so max(lambda_+, lambda_-) and min(...) are T-invariant.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sbill/billiard_map.hpp"
#include "sbill/errors.hpp"
#include "sbill/parallel.hpp"
#include "sbill/table_builder.hpp"

namespace sbill {

inline constexpr std::size_t kCurveGrid = 4096;
inline constexpr double kCriticalTol = 1e-9;
inline constexpr double kSddotTol = 1e-10;

enum class Branch { Plus, Minus, SpliceMax, SpliceMin };

inline std::string to_string(Branch b) {
  switch (b) {
    case Branch::Plus: return "plus";
    case Branch::Minus: return "minus";
    case Branch::SpliceMax: return "splice_max";
    case Branch::SpliceMin: return "splice_min";
  }
  return "?";
}

/// (lambda_+, lambda_-) at t.
inline std::pair<double, double> lambda_pm(const StringTable& st, double t) {
  const BoundaryJet j = st.boundary_jet(t);
  const double sp = norm(j.d1);
  if (!(sp > 1e-14)) throw Error(ErrorCode::DegenerateTangent, "Gamma'(t) vanishes");
  const double c = std::clamp(dot(j.p, j.d1) / (norm(j.p) * sp), -1.0, 1.0);
  return {std::acos(c), std::acos(-c)};
}

struct CurveSample {
  std::vector<double> t;
  std::vector<double> plus;
  std::vector<double> minus;
  std::vector<double> splice;      // max(lambda_+, lambda_-)
  std::vector<double> splice_min;  // min(lambda_+, lambda_-)
  std::vector<double> crossings;   // zeros of h' on [0, 2pi)
};

inline CurveSample sample_curves(const StringTable& st, std::size_t n = kCurveGrid) {
  CurveSample cs;
  cs.t.resize(n);
  cs.plus.resize(n);
  cs.minus.resize(n);
  parallel_for(n, [&](std::size_t i) {
    cs.t[i] = kTwoPi * static_cast<double>(i) / n;
    std::tie(cs.plus[i], cs.minus[i]) = lambda_pm(st, cs.t[i]);
  });
  cs.splice.resize(n);
  cs.splice_min.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cs.splice[i] = std::max(cs.plus[i], cs.minus[i]);
    cs.splice_min[i] = std::min(cs.plus[i], cs.minus[i]);
  }
  const DiameterSet ds = find_diameters(st);
  for (const auto& d : ds.isolated) {
    cs.crossings.push_back(d.t0);
    cs.crossings.push_back(d.t0 + kPi);
  }
  std::sort(cs.crossings.begin(), cs.crossings.end());
  return cs;
}

namespace detail {

/// Periodic 4-point Lagrange interpolation on a uniform grid over [0, 2pi).
inline double interp_cubic(const std::vector<double>& v, double t) {
  const std::size_t n = v.size();
  const double x = wrap_2pi(t) / kTwoPi * static_cast<double>(n);
  const double fl = std::floor(x);
  const double u = x - fl;
  const auto i1 = static_cast<long>(fl);
  auto at = [&](long k) { return v[static_cast<std::size_t>(((k % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n))]; };
  const double p0 = at(i1 - 1), p1 = at(i1), p2 = at(i1 + 1), p3 = at(i1 + 2);
  return p0 * (-u * (u - 1.0) * (u - 2.0) / 6.0) + p1 * ((u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0) +
         p2 * (-(u + 1.0) * u * (u - 2.0) / 2.0) + p3 * ((u + 1.0) * u * (u - 1.0) / 6.0);
}

}  // namespace detail

/// Max over samples of |theta' - lambda(t')| with (t', theta') = T^k(t_i, lambda(t_i)),
/// k = 2 for the branches and k = 1 for the splices. Splices are interpolated as
/// the max/min of the interpolated branches so the corner is never smoothed.
inline double invariance_residual(const StringTable& st, Branch branch, const CurveSample& cs) {
  const std::size_t n = cs.t.size();
  const int order = branch == Branch::Plus || branch == Branch::Minus ? 2 : 1;
  auto curve_at = [&](double t) {
    const double a = detail::interp_cubic(cs.plus, t), b = detail::interp_cubic(cs.minus, t);
    switch (branch) {
      case Branch::Plus: return a;
      case Branch::Minus: return b;
      case Branch::SpliceMax: return std::max(a, b);
      case Branch::SpliceMin: return std::min(a, b);
    }
    return a;
  };
  const std::vector<double>& src = branch == Branch::Plus        ? cs.plus
                                   : branch == Branch::Minus     ? cs.minus
                                   : branch == Branch::SpliceMax ? cs.splice
                                                                 : cs.splice_min;
  std::vector<double> res(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    const PhasePoint q = iterate(st, {cs.t[i], src[i]}, order);
    res[i] = std::abs(q.theta - curve_at(q.t));
  });
  return *std::max_element(res.begin(), res.end());
}

inline double invariance_residual(const StringTable& st, Branch branch, std::size_t n = kCurveGrid) {
  return invariance_residual(st, branch, sample_curves(st, n));
}

// ---------------------------------------------------------------------------
// Singular points

enum class SingularClass { Transversal, Tangential, ContinuumBoundary };

inline std::string to_string(SingularClass c) {
  switch (c) {
    case SingularClass::Transversal: return "transversal";
    case SingularClass::Tangential: return "tangential";
    case SingularClass::ContinuumBoundary: return "continuum-boundary";
  }
  return "?";
}

struct SingularPoint {
  double t0{0.0};
  double slope_left{0.0};   // of the max-splice, in arc length
  double slope_right{0.0};
  double mean_slope{0.0};  // 1/|Gamma| - k
  double sddot{0.0};        // route (a): closed form at h' = 0
  double r_xixi{0.0};       // route (b): numerical d^2|Gamma|/dxi^2
  double r_xixi_noise{0.0};
  SingularClass cls{SingularClass::Transversal};
};

/// (d lambda_+/dxi, d lambda_-/dxi) = (-(1/|Gamma| - k), +(1/|Gamma| - k)) at a foot.
inline std::pair<double, double> one_sided_slopes(const StringTable& st, double t0) {
  if (std::abs(st.g_of_t(t0)) > kCriticalTol) {
    throw Error(ErrorCode::NotACriticalPoint, "h'(" + std::to_string(t0) + ") != 0");
  }
  const double m = 1.0 / st.radius(t0) - st.curvature_of_boundary(t0);
  return {-m, m};
}

/// Slopes of lambda_+ and lambda_- in arc length from central differences.
inline std::pair<double, double> branch_slopes_fd(const StringTable& st, double t0, double h = 1e-5) {
  h = std::min(h, st.local_scale(t0) / 50.0);
  const auto [p1, m1] = lambda_pm(st, t0 + h);
  const auto [p0, m0] = lambda_pm(st, t0 - h);
  const double sp = st.speed(t0);
  return {(p1 - p0) / (2.0 * h * sp), (m1 - m0) / (2.0 * h * sp)};
}

/// One-sided slopes of the max-splice from one-sided differences.
inline std::pair<double, double> splice_slopes_fd(const StringTable& st, double t0, double h = 1e-5) {
  h = std::min(h, st.local_scale(t0) / 50.0);
  auto lam = [&](double t) {
    const auto [a, b] = lambda_pm(st, t);
    return std::max(a, b);
  };
  const double sp = st.speed(t0);
  const double c = lam(t0);
  // second-order one-sided stencils
  const double right = (-3.0 * c + 4.0 * lam(t0 + h) - lam(t0 + 2.0 * h)) / (2.0 * h * sp);
  const double left = (3.0 * c - 4.0 * lam(t0 - h) + lam(t0 - 2.0 * h)) / (2.0 * h * sp);
  return {left, right};
}

/// s'' at a foot in terms of h alone: (H''/2)(1 - 2H''/(l + 1 - H)).
inline double sddot_closed_form(const StringTable& st, double t0) {
  const FieldJet f = st.field(t0);
  const double hdd = f.hddot();
  return 0.5 * hdd * (1.0 - 2.0 * hdd / (st.ell() + 1.0 - f.h));
}

/// d^2|Gamma|/dxi^2 by Richardson-extrapolated central differences and its roundoff floor.
inline std::pair<double, double> radius_second_derivative(const StringTable& st, double t0) {
  const double h = std::clamp(st.local_scale(t0) / 8.0, 1e-5, 1e-3);
  auto d2 = [&](double s) { return (st.radius(t0 + s) - 2.0 * st.radius(t0) + st.radius(t0 - s)) / (s * s); };
  const double r_tt = (4.0 * d2(h / 2.0) - d2(h)) / 3.0;
  const double sp = st.speed(t0);
  const double noise = 64.0 * 2.2e-16 * st.radius(t0) / (h * h) / (sp * sp);
  return {r_tt / (sp * sp), noise};
}

/// Two verdicts on the crossing at a foot: (a) the closed-form s'' and (b) the
/// measured curvature of |Gamma|. d^2|Gamma|/dxi^2 = -s''/|Gamma'|^2, so a transversal
/// crossing needs both non-zero with opposite signs.
inline SingularPoint transversality(const StringTable& st, double t0) {
  if (std::abs(st.g_of_t(t0)) > kCriticalTol) {
    throw Error(ErrorCode::NotACriticalPoint, "h'(" + std::to_string(t0) + ") != 0");
  }
  SingularPoint sp;
  sp.t0 = t0;
  sp.sddot = sddot_closed_form(st, t0);
  std::tie(sp.r_xixi, sp.r_xixi_noise) = radius_second_derivative(st, t0);
  const bool a = std::abs(sp.sddot) > kSddotTol;
  const bool b = std::abs(sp.r_xixi) > sp.r_xixi_noise;
  if (a != b || (a && (sp.sddot > 0.0) == (sp.r_xixi > 0.0))) {
    throw Error(ErrorCode::ClassificationConflict,
                "transversality at t0 = " + std::to_string(t0) + ": closed form s'' = " + std::to_string(sp.sddot) +
                    ", measured |Gamma|'' = " + std::to_string(sp.r_xixi) + " (noise " +
                    std::to_string(sp.r_xixi_noise) + ")");
  }
  sp.cls = a ? SingularClass::Transversal : SingularClass::Tangential;
  const auto [mplus, mminus] = one_sided_slopes(st, t0);
  sp.mean_slope = mminus;
  sp.slope_left = -std::abs(mminus);
  sp.slope_right = std::abs(mminus);
  return sp;
}

struct SingularSet {
  std::vector<SingularPoint> points;      // transversal crossings on [0, 2pi), sorted
  std::vector<SingularPoint> degenerate;  // tangential feet and continuum ends
  bool continuum{false};
  double min_gap{0.0};
};

inline SingularSet singular_points(const StringTable& st) {
  SingularSet out;
  const DiameterSet ds = find_diameters(st);
  out.continuum = ds.full_continuum || !ds.continua.empty();
  if (ds.full_continuum) return out;
  std::vector<double> feet;
  for (const auto& d : ds.isolated) {
    feet.push_back(d.t0);
    feet.push_back(d.t0 + kPi);
  }
  std::vector<SingularPoint> pts(feet.size());
  parallel_for(feet.size(), [&](std::size_t i) { pts[i] = transversality(st, feet[i]); });
  for (const auto& p : pts) (p.cls == SingularClass::Transversal ? out.points : out.degenerate).push_back(p);
  for (const auto& [lo, hi] : ds.continua) {
    for (double e : {lo, hi, lo + kPi, hi + kPi}) {
      SingularPoint sp;
      sp.t0 = e;
      sp.cls = SingularClass::ContinuumBoundary;
      out.degenerate.push_back(sp);
    }
  }
  auto by_t = [](const SingularPoint& a, const SingularPoint& b) { return a.t0 < b.t0; };
  std::sort(out.points.begin(), out.points.end(), by_t);
  std::sort(out.degenerate.begin(), out.degenerate.end(), by_t);
  if (out.points.size() > 1) {
    out.min_gap = kTwoPi;
    for (std::size_t i = 0; i < out.points.size(); ++i) {
      const double next = i + 1 < out.points.size() ? out.points[i + 1].t0 : out.points[0].t0 + kTwoPi;
      out.min_gap = std::min(out.min_gap, next - out.points[i].t0);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Export

inline void write_curves_csv(const CurveSample& cs, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  os.precision(17);
  os << "t,lambda_plus,lambda_minus,spliced,spliced_min\n";
  for (std::size_t i = 0; i < cs.t.size(); ++i) {
    os << cs.t[i] << ',' << cs.plus[i] << ',' << cs.minus[i] << ',' << cs.splice[i] << ',' << cs.splice_min[i]
       << '\n';
  }
}

inline nlohmann::json to_json(const SingularPoint& p) {
  nlohmann::json j;
  j["t0"] = p.t0;
  j["slopes"] = {p.slope_left, p.slope_right};
  j["sddot"] = p.sddot;
  j["r_xixi"] = p.r_xixi;
  j["class"] = to_string(p.cls);
  return j;
}

inline nlohmann::json to_json(const SingularSet& s) {
  nlohmann::json j;
  j["points"] = nlohmann::json::array();
  for (const auto& p : s.points) j["points"].push_back(to_json(p));
  j["degenerate"] = nlohmann::json::array();
  for (const auto& p : s.degenerate) j["degenerate"].push_back(to_json(p));
  j["continuum"] = s.continuum;
  j["min_gap"] = s.min_gap;
  return j;
}

}  // namespace sbill
