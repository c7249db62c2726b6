#pragma once

// Billiard map of a string table in (t, theta) coordinates: t is the boundary
// parameter, theta in (0, pi) the angle from the forward tangent Gamma'(t) to
// the outgoing chord.

#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sbill/errors.hpp"
#include "sbill/point2.hpp"
#include "sbill/table_builder.hpp"

namespace sbill {

inline constexpr double kThetaMin = 1e-6;
inline constexpr double kJacobianStep = 1e-6;
inline constexpr double kPlateauTol = 1e-11;
inline constexpr int kBounceScan = 512;

struct PhasePoint {
  double t{0.0};
  double theta{kPi / 2.0};
};

using Mat2 = std::array<std::array<double, 2>, 2>;

inline double det(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
inline double trace(const Mat2& m) { return m[0][0] + m[1][1]; }
inline Mat2 operator*(const Mat2& a, const Mat2& b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return c;
}

inline PhasePoint next_bounce(const StringTable& st, const PhasePoint& p) {
  if (!(p.theta > kThetaMin && p.theta < kPi - kThetaMin)) {
    throw Error(ErrorCode::TangentialShot, "theta = " + std::to_string(p.theta) + " is too close to tangential");
  }
  const double t = wrap_2pi(p.t);
  const BoundaryJet j0 = st.boundary_jet(t);
  const Point2 P = j0.p;
  const Point2 T = normalized(j0.d1);

  // phi(u) = angle from T to Gamma(u) - P increases from 0 to pi on (t, t + 2pi).
  auto F = [&](double u) {
    const Point2 c = st.boundary(u) - P;
    return std::atan2(cross(T, c), dot(T, c)) - p.theta;
  };
  double a = t, fa = -p.theta;
  double b = t + kTwoPi, fb = kPi - p.theta;
  for (int k = 1; k < kBounceScan; ++k) {
    const double u = t + kTwoPi * k / kBounceScan;
    const double fu = F(u);
    if (fu >= 0.0) {
      b = u, fb = fu;
      break;
    }
    a = u, fa = fu;
  }
  if (fb == 0.0) a = b;
  for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(b)); ++it) {
    const double mid = 0.5 * (a + b);
    double u = mid;
    if (b - a < 1e-4) {
      const BoundaryJet ju = st.boundary_jet(mid);
      const Point2 c = ju.p - P;
      const double fm = std::atan2(cross(T, c), dot(T, c)) - p.theta;
      const double dfm = cross(c, ju.d1) / dot(c, c);
      const double un = mid - fm / dfm;
      if (un > a && un < b) u = un;
    }
    const double fu = F(u);
    if (fu == 0.0) {
      a = b = u;
      break;
    }
    if (fu < 0.0) a = u, fa = fu;
    else b = u, fb = fu;
  }
  if (!(b - a <= 1e-12)) throw Error(ErrorCode::NoConvergence, "bounce root did not converge");
  const double u = std::abs(fa) < std::abs(fb) ? a : b;
  const BoundaryJet j1 = st.boundary_jet(u);
  const Point2 w = j1.p - P;
  const double theta_out = -angle_between(j1.d1, w);
  return {wrap_2pi(u), theta_out};
}

inline PhasePoint iterate(const StringTable& st, PhasePoint p, int n) {
  for (int k = 0; k < n; ++k) p = next_bounce(st, p);
  return p;
}

/// Time reversal: (t, theta) -> (t, pi - theta).
inline PhasePoint reversed(const PhasePoint& p) { return {p.t, kPi - p.theta}; }

/// Central differences of T^order with one Richardson step; t differences are wrapped.
inline Mat2 jacobian_fd(const StringTable& st, const PhasePoint& p, int order, double step = kJacobianStep) {
  if (order != 1 && order != 2) throw Error(ErrorCode::InvalidArgument, "order must be 1 or 2");
  auto diff = [&](int var, double h) {
    PhasePoint lo = p, hi = p;
    (var == 0 ? lo.t : lo.theta) -= h;
    (var == 0 ? hi.t : hi.theta) += h;
    const PhasePoint a = iterate(st, lo, order), b = iterate(st, hi, order);
    return std::array<double, 2>{wrap_pi(b.t - a.t) / (2.0 * h), (b.theta - a.theta) / (2.0 * h)};
  };
  Mat2 m{};
  for (int var = 0; var < 2; ++var) {
    const auto d1 = diff(var, step);
    const auto d2 = diff(var, step / 2.0);
    for (int row = 0; row < 2; ++row) m[row][var] = (4.0 * d2[row] - d1[row]) / 3.0;
  }
  return m;
}

/// det dT^order rescaled to the invariant measure sin(theta) |Gamma'(t)| dt dtheta.
inline double area_preserving_det(const StringTable& st, const PhasePoint& p, int order) {
  const Mat2 m = jacobian_fd(st, p, order);
  const PhasePoint q = iterate(st, p, order);
  return det(m) * (st.speed(q.t) * std::sin(q.theta)) / (st.speed(p.t) * std::sin(p.theta));
}

// ---------------------------------------------------------------------------
// 2-periodic orbits: zeros of h' = -G

enum class DiameterKind { Transversal, Flat };

struct Diameter {
  double t0{0.0};
  double d{0.0};
  double h{0.0};
  double hddot{0.0};
  DiameterKind kind{DiameterKind::Transversal};
};

struct DiameterSet {
  std::vector<Diameter> isolated;                   // representatives in [0, pi)
  std::vector<std::pair<double, double>> continua;  // plateaus of h' = 0 in [0, pi)
  bool full_continuum{false};

  bool degenerate_continuum() const { return full_continuum; }
};

inline Diameter make_diameter(const StringTable& st, double t0, DiameterKind kind) {
  const FieldJet f = st.field(t0);
  return {t0, st.radius(t0) + st.radius(t0 + kPi), f.h, f.hddot(), kind};
}

namespace detail {

inline double bisect_zero(const StringTable& st, double a, double b) {
  double fa = st.g_of_t(a);
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = st.g_of_t(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) a = m, fa = fm;
    else b = m;
  }
  // Newton polish on G with G' known analytically.
  double x = 0.5 * (a + b);
  for (int it = 0; it < 3; ++it) {
    const FieldJet f = st.field(x);
    if (f.g == 0.0 || f.g1 == 0.0) break;
    const double xn = x - f.g / f.g1;
    if (std::abs(xn - x) > 1e-12) break;
    x = xn;
  }
  return x;
}

inline bool contains(double lo, double hi, double x) {
  // circular containment on [0, pi) with lo <= hi possibly beyond pi
  const double y = lo + wrap_half(x - lo);
  return y <= hi;
}

}  // namespace detail

/// Zeros of h' on [0, pi): sign-change scan + bisection/Newton, with plateau
/// detection. When g carries its exact zero set, that set is authoritative and
/// the scan only adds zeros it does not explain.
inline DiameterSet find_diameters(const StringTable& st, std::size_t grid = kScanGrid) {
  DiameterSet out;
  const std::size_t M = grid;
  std::vector<double> ts(M), vs(M);
  bool all_tiny = true;
  for (std::size_t j = 0; j < M; ++j) {
    ts[j] = kPi * static_cast<double>(j) / M;
    vs[j] = st.g_of_t(ts[j]);
    if (std::abs(vs[j]) >= kPlateauTol) all_tiny = false;
  }
  if (all_tiny) {
    out.full_continuum = true;
    out.continua.push_back({0.0, kPi});
    return out;
  }
  // Circular sequence with G(t + pi) = -G(t): index j stands for t = j pi / M.
  auto val = [&](std::size_t j) { return (j / M) % 2 == 0 ? vs[j % M] : -vs[j % M]; };
  auto tt = [&](std::size_t j) { return kPi * static_cast<double>(j) / M; };
  auto tiny = [&](std::size_t j) { return std::abs(vs[j % M]) < kPlateauTol; };

  const CircleSet* known = st.tau() != 0.0 ? st.perturbation().g->zero_set() : nullptr;
  std::vector<std::pair<double, double>> known_spans;  // in [0, pi), hi may exceed pi
  if (known != nullptr) {
    for (const auto& c : known->components) {
      if (c.lo >= kPi) continue;
      known_spans.push_back({c.lo, c.hi});
      if (c.kind == ComponentKind::Interval) {
        out.continua.push_back({c.lo, c.hi});
      } else {
        out.isolated.push_back(make_diameter(
            st, c.lo, c.kind == ComponentKind::Node ? DiameterKind::Transversal : DiameterKind::Flat));
      }
    }
  }
  auto explained = [&](double lo, double hi) {
    for (const auto& [a, b] : known_spans) {
      if (detail::contains(lo, hi, a) || detail::contains(lo, hi, b) || detail::contains(a, b, lo)) return true;
    }
    return false;
  };

  // Start at a non-tiny point so runs never wrap around the start.
  std::size_t start = 0;
  while (tiny(start)) ++start;
  std::size_t j = 0;
  while (j < M) {
    const std::size_t i = start + j;
    if (!tiny(i)) {
      const std::size_t n = i + 1;
      if (!tiny(n) && (val(i) < 0.0) != (val(n) < 0.0)) {
        const double lo = tt(i), hi = tt(n);
        if (!explained(wrap_half(lo), wrap_half(lo) + (hi - lo))) {
          const double z = detail::bisect_zero(st, lo, hi);
          out.isolated.push_back(make_diameter(st, wrap_half(z), DiameterKind::Transversal));
        }
      }
      ++j;
      continue;
    }
    // run of tiny values [i, k)
    std::size_t k = i;
    while (tiny(k) && k - i < M) ++k;
    const double lo = wrap_half(tt(i)), hi = lo + (tt(k - 1) - tt(i));
    if (!explained(lo, hi)) {
      if (k - i >= 3) {
        out.continua.push_back({lo, hi});
      } else {
        double z;
        if ((val(i - 1) < 0.0) != (val(k) < 0.0)) {
          z = detail::bisect_zero(st, tt(i - 1), tt(k));
        } else {
          std::size_t best = i;
          for (std::size_t q = i; q < k; ++q) {
            if (std::abs(val(q)) < std::abs(val(best))) best = q;
          }
          z = tt(best);
        }
        const DiameterKind kind =
            std::abs(st.field(z).g1) > kPlateauTol ? DiameterKind::Transversal : DiameterKind::Flat;
        out.isolated.push_back(make_diameter(st, wrap_half(z), kind));
      }
    }
    j += k - i;
  }
  std::sort(out.isolated.begin(), out.isolated.end(), [](const Diameter& a, const Diameter& b) { return a.t0 < b.t0; });
  std::sort(out.continua.begin(), out.continua.end());
  return out;
}

// ---------------------------------------------------------------------------
// Export

inline void write_orbit_csv(const StringTable& st, PhasePoint p, int iterations, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  os.precision(17);
  os << "iteration,t,theta,x,y\n";
  for (int k = 0; k <= iterations; ++k) {
    const Point2 q = st.boundary(p.t);
    os << k << ',' << p.t << ',' << p.theta << ',' << q.x << ',' << q.y << '\n';
    if (k < iterations) p = next_bounce(st, p);
  }
}

inline std::string to_string(DiameterKind k) { return k == DiameterKind::Transversal ? "transversal" : "flat"; }

inline nlohmann::json to_json(const Diameter& d, const std::string& cls = "") {
  nlohmann::json j;
  j["t0"] = d.t0;
  j["d"] = d.d;
  j["h"] = d.h;
  j["hddot"] = d.hddot;
  j["class"] = cls.empty() ? to_string(d.kind) : cls;
  return j;
}

}  // namespace sbill
