#pragma once

// Time-periodic twist system H(p, x, t) = p^2/2 + V(b x - a t) with a 1-periodic
// potential whose maxima sit on a prescribed closed set. In X = b x - a t,
// P = b p - a the flow is autonomous with K = P^2/2 + b^2 V(X), and the level
// through the maxima gives an invariant curve with a corner at each
// non-degenerate maximum.

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "json.hpp"

#include "sbill/errors.hpp"
#include "sbill/smooth_step.hpp"
#include "sbill/vanishing_builder.hpp"

namespace sbill {

inline constexpr double kTwistStep = 1e-3;
inline constexpr double kCriticalValueTol = 1e-10;
inline constexpr int kPotentialCells = 64;

struct CriticalPoint {
  double x{0.0};
  bool maximum{true};
  bool degenerate{false};
};

class PeriodicPotential {
 public:
  virtual ~PeriodicPotential() = default;
  virtual double V(double x) const = 0;
  virtual double dV(double x) const = 0;
  virtual double d2V(double x) const = 0;
  virtual const std::vector<CriticalPoint>& critical_points() const = 0;
  /// Common value of V at the maxima.
  virtual double max_level() const = 0;
};

inline double wrap_unit(double x) {
  double r = std::fmod(x, 1.0);
  if (r < 0.0) r += 1.0;
  return r >= 1.0 ? 0.0 : r;
}

/// -cos(2 pi x) s / (2 pi)^2: a single maximum at 1/2 with V'' = -s.
class CosinePotential final : public PeriodicPotential {
 public:
  explicit CosinePotential(double s = 1.0) : s_(s), crit_{{0.5, true, false}, {0.0, false, false}} {}
  double V(double x) const override { return -s_ * std::cos(kTwoPi * x) / (kTwoPi * kTwoPi); }
  double dV(double x) const override { return s_ * std::sin(kTwoPi * x) / kTwoPi; }
  double d2V(double x) const override { return s_ * std::cos(kTwoPi * x); }
  const std::vector<CriticalPoint>& critical_points() const override { return crit_; }
  double max_level() const override { return s_ / (kTwoPi * kTwoPi); }

 private:
  double s_;
  std::vector<CriticalPoint> crit_;
};

struct PotentialSpec {
  std::vector<double> maxima;
  std::vector<double> degenerate;  // maxima with V'' = 0 (V ~ -x^4 nearby)
  std::vector<Accumulation> accumulations;
  double amplitude{1.0};
};

inline PotentialSpec potential_spec_from_json(const nlohmann::json& j) {
  PotentialSpec s;
  if (j.contains("maxima")) s.maxima = j.at("maxima").get<std::vector<double>>();
  if (j.contains("degenerate")) s.degenerate = j.at("degenerate").get<std::vector<double>>();
  if (j.contains("accumulations")) s.accumulations = direction_set_from_json(j).accumulations;
  s.amplitude = j.value("amplitude", 1.0);
  return s;
}

/// V' on a gap [x_l, x_l + w] in u = x - x_l, v = u / w:
///   f = (w S(v) - u) * sigma(u) * (1 + kappa B(v)),
///   sigma = c (u^{m_l} (1 - S(v)) + (w - u)^{m_r} S(v)),  m = 0 or 2.
/// w S(v) - u vanishes only at v = 0, 1/2, 1, so f has exactly those zeros;
/// near each end f = -c (x - node)^{1+m}. B is flat at 0, 1/2 and 1 and lives on
/// the smaller lobe; kappa makes the gap integral zero so every maximum sits at V = 0.
class BumpPotential final : public PeriodicPotential {
 public:
  struct Gap {
    double lo{0.0};
    double w{1.0};
    int ml{0};
    int mr{0};
    double kappa{0.0};
    bool tilt_right{false};
    std::vector<double> cum;  // integral of V' from the left node to each cell boundary
    std::vector<double> suf;  // integral of V' from each cell boundary to the right node
  };

  BumpPotential(std::vector<Gap> gaps, std::vector<CriticalPoint> crit, double c)
      : gaps_(std::move(gaps)), crit_(std::move(crit)), c_(c) {
    for (auto& g : gaps_) {
      g.cum.assign(kPotentialCells + 1, 0.0);
      const double h = g.w / kPotentialCells;
      g.suf.assign(kPotentialCells + 1, 0.0);
      for (int k = 0; k < kPotentialCells; ++k) g.cum[k + 1] = g.cum[k] + cell(g, k * h, (k + 1) * h);
      for (int k = kPotentialCells; k-- > 0;) g.suf[k] = g.suf[k + 1] + cell(g, k * h, (k + 1) * h);
    }
  }

  double dV(double x) const override {
    if (gaps_.empty()) return 0.0;
    const auto [g, u] = locate(x);
    return f(*g, u).v;
  }
  double d2V(double x) const override {
    if (gaps_.empty()) return 0.0;
    const auto [g, u] = locate(x);
    return f(*g, u).d1;
  }
  double V(double x) const override {
    if (gaps_.empty()) return 0.0;
    const auto [g, u] = locate(x);
    const double h = g->w / kPotentialCells;
    const int k = std::min(kPotentialCells - 1, static_cast<int>(u / h));
    // both nodes sit at V = 0; integrate from the nearer one
    if (2.0 * u <= g->w) return g->cum[k] + cell(*g, k * h, u);
    return -(g->suf[k + 1] + cell(*g, u, (k + 1) * h));
  }
  const std::vector<CriticalPoint>& critical_points() const override { return crit_; }
  double max_level() const override { return 0.0; }
  const std::vector<Gap>& gaps() const { return gaps_; }

  /// Integral of V' over [u0, u1] of a gap on the fixed cell grid.
  double integrate(const Gap& g, double u0, double u1) const {
    if (u1 <= u0) return 0.0;
    const double h = g.w / kPotentialCells;
    double total = 0.0;
    for (int k = 0; k < kPotentialCells; ++k) {
      const double a = std::max(u0, k * h), b = std::min(u1, (k + 1) * h);
      if (b > a) total += cell(g, a, b);
    }
    return total;
  }

  double cell(const Gap& g, double a, double b) const {
    return boost::math::quadrature::gauss<double, 20>::integrate([&](double u) { return f(g, u).v; }, a, b);
  }

  static Jet2 bump(double v, bool right) {
    // 1 on the inner part of one lobe, flat to all orders at v = 0, 1/2, 1
    const double lo = right ? 0.5 : 0.0;
    const double s = 16.0;
    const Jet2 a = smooth_step(s * (v - lo) - 1.0), b = smooth_step(s * (lo + 0.5 - v) - 1.0);
    return {a.v * b.v, s * (a.d1 * b.v - a.v * b.d1), s * s * (a.d2 * b.v - 2.0 * a.d1 * b.d1 + a.v * b.d2)};
  }

  /// (f, f') at u in a gap; f' is with respect to u.
  Jet2 f(const Gap& g, double u) const {
    const double w = g.w, v = u / w;
    const Jet2 S = smooth_step(v - 1.0);
    const double s1 = S.d1 / w;
    const double A = w * S.v - u, dA = w * s1 - 1.0;
    const double pl = g.ml == 0 ? 1.0 : u * u, dpl = g.ml == 0 ? 0.0 : 2.0 * u;
    const double q = w - u;
    const double pr = g.mr == 0 ? 1.0 : q * q, dpr = g.mr == 0 ? 0.0 : -2.0 * q;
    const double sig = c_ * (pl * (1.0 - S.v) + pr * S.v);
    const double dsig = c_ * (dpl * (1.0 - S.v) - pl * s1 + dpr * S.v + pr * s1);
    double T = 1.0, dT = 0.0;
    if (g.kappa != 0.0) {
      const Jet2 B = bump(v, g.tilt_right);
      T = 1.0 + g.kappa * B.v;
      dT = g.kappa * B.d1 / w;
    }
    return {A * sig * T, dA * sig * T + A * dsig * T + A * sig * dT, 0.0};
  }

 private:
  std::pair<const Gap*, double> locate(double x) const {
    const double y = wrap_unit(x);
    for (const auto& g : gaps_) {
      double u = y - g.lo;
      if (u < 0.0) u += 1.0;
      if (u <= g.w) return {&g, std::min(u, g.w)};
    }
    return {&gaps_.back(), 0.0};
  }

  std::vector<Gap> gaps_;
  std::vector<CriticalPoint> crit_;
  double c_;
};

namespace detail {

inline std::vector<double> accumulation_nodes(const Accumulation& acc, const std::vector<double>& others) {
  double room = 1.0;
  for (double o : others) {
    const double dist = acc.side == Side::Left ? wrap_unit(acc.target - o) : wrap_unit(o - acc.target);
    if (dist > 0.0) room = std::min(room, dist);
  }
  const double span = acc.span.value_or(0.4 * room);
  if (!(span > 0.0) || span >= room || acc.ratio <= 0.0 || acc.ratio >= 1.0 || acc.count < 1) {
    throw Error(ErrorCode::SpecOverlap, "accumulation does not fit in its room");
  }
  std::vector<double> out{acc.target};
  for (int j = 0; j < acc.count; ++j) {
    const double off = span * std::pow(acc.ratio, j);
    out.push_back(wrap_unit(acc.side == Side::Left ? acc.target - off : acc.target + off));
  }
  return out;
}

}  // namespace detail

inline std::shared_ptr<const BumpPotential> build_potential(const PotentialSpec& spec) {
  if (!(spec.amplitude > 0.0)) throw Error(ErrorCode::InvalidArgument, "amplitude must be positive");
  struct Node {
    double x;
    bool degenerate;
  };
  std::vector<Node> nodes;
  std::vector<double> listed;
  for (double x : spec.maxima) listed.push_back(x);
  for (double x : spec.degenerate) listed.push_back(x);
  for (const auto& a : spec.accumulations) listed.push_back(a.target);
  for (double x : listed) {
    if (!(x >= 0.0 && x < 1.0)) throw Error(ErrorCode::SpecOverlap, "points must lie in [0, 1)");
  }
  for (double x : spec.maxima) nodes.push_back({x, false});
  for (double x : spec.degenerate) nodes.push_back({x, true});
  for (const auto& a : spec.accumulations) {
    std::vector<double> others;
    for (double x : listed) {
      if (x != a.target) others.push_back(x);
    }
    for (double x : detail::accumulation_nodes(a, others)) nodes.push_back({x, false});
  }
  std::sort(nodes.begin(), nodes.end(), [](const Node& a, const Node& b) { return a.x < b.x; });
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (nodes[i + 1].x - nodes[i].x < 1e-9) throw Error(ErrorCode::SpecOverlap, "coincident maxima");
  }
  std::vector<BumpPotential::Gap> gaps;
  std::vector<CriticalPoint> crit;
  const std::size_t n = nodes.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Node& l = nodes[i];
    const Node& r = nodes[(i + 1) % n];
    double w = r.x - l.x;
    if (w <= 0.0) w += 1.0;
    gaps.push_back({l.x, w, l.degenerate ? 2 : 0, r.degenerate ? 2 : 0, 0.0, false, {}, {}});
    crit.push_back({l.x, true, l.degenerate});
    crit.push_back({wrap_unit(l.x + 0.5 * w), false, false});
  }
  BumpPotential raw(gaps, {}, spec.amplitude);
  for (auto& g : gaps) {
    const double neg = raw.integrate(g, 0.0, 0.5 * g.w), pos = raw.integrate(g, 0.5 * g.w, g.w);
    if (std::abs(neg + pos) <= 1e-15 * (pos - neg)) continue;
    // grow the smaller lobe
    g.tilt_right = pos < -neg;
    const double lo = g.tilt_right ? 0.5 * g.w : 0.0;
    auto fb = [&](double u) { return raw.f(g, u).v * BumpPotential::bump(u / g.w, g.tilt_right).v; };
    double ib = 0.0;
    const double h = g.w / kPotentialCells;
    for (int k = 0; k < kPotentialCells / 2; ++k) {
      ib += boost::math::quadrature::gauss<double, 20>::integrate(fb, lo + k * h, lo + (k + 1) * h);
    }
    g.kappa = -(neg + pos) / ib;
  }
  std::sort(crit.begin(), crit.end(), [](const CriticalPoint& a, const CriticalPoint& b) { return a.x < b.x; });
  return std::make_shared<BumpPotential>(std::move(gaps), std::move(crit), spec.amplitude);
}

// ---------------------------------------------------------------------------
// Dynamics

struct TwistSystem {
  int a{1};
  int b{1};
  std::shared_ptr<const PeriodicPotential> pot;

  TwistSystem(int a_, int b_, std::shared_ptr<const PeriodicPotential> p) : a(a_), b(b_), pot(std::move(p)) {
    if (a == 0 || b == 0) throw Error(ErrorCode::InvalidArgument, "a and b must be nonzero");
  }

  double energy_level() const { return static_cast<double>(b) * b * pot->max_level(); }
  double K(double X, double P) const { return 0.5 * P * P + static_cast<double>(b) * b * pot->V(X); }
};

struct TwistState {
  double x{0.0};
  double p{0.0};
  double t{0.0};
};

/// (X, P) = (b x - a t, b p - a).
inline std::pair<double, double> reduce(const TwistSystem& sys, double x, double p, double t) {
  return {sys.b * x - sys.a * t, sys.b * p - sys.a};
}

/// Fourth-order symplectic composition of drift (x, t) and kick (p).
inline TwistState integrate(const TwistSystem& sys, TwistState s, double duration, double step = kTwistStep) {
  static const double cbrt2 = std::cbrt(2.0);
  static const double w1 = 1.0 / (2.0 - cbrt2), w0 = -cbrt2 / (2.0 - cbrt2);
  static const std::array<double, 4> c{0.5 * w1, 0.5 * (w0 + w1), 0.5 * (w0 + w1), 0.5 * w1};
  static const std::array<double, 3> d{w1, w0, w1};
  const auto steps = static_cast<long>(std::llround(std::abs(duration) / step));
  const double h = steps > 0 ? duration / static_cast<double>(steps) : 0.0;
  const double b = sys.b, a = sys.a;
  for (long k = 0; k < steps; ++k) {
    for (int i = 0; i < 4; ++i) {
      s.x += c[i] * h * s.p;
      s.t += c[i] * h;
      if (i < 3) s.p -= d[i] * h * b * sys.pot->dV(b * s.x - a * s.t);
    }
  }
  return s;
}

inline TwistState time_one_map(const TwistSystem& sys, TwistState s, double step = kTwistStep) {
  return integrate(sys, s, 1.0, step);
}

// ---------------------------------------------------------------------------
// Invariant curve on the level of the maxima

/// X -> P(X) = sqrt(2 (E - b^2 V(X))), the positive-momentum branch.
inline std::function<double(double)> curve_from_energy(std::shared_ptr<const PeriodicPotential> pot, int b, double E) {
  const double level = static_cast<double>(b) * b * pot->max_level();
  if (E < level - 1e-14 * std::max(1.0, std::abs(level))) {
    throw Error(ErrorCode::NegativeRadicand, "energy below the level of the maxima");
  }
  return [pot, b, E](double X) { return std::sqrt(std::max(0.0, 2.0 * (E - static_cast<double>(b) * b * pot->V(X)))); };
}

/// (left, right) slopes of P at a critical point on the curve: (-b sqrt|V''|, +b sqrt|V''|).
inline std::pair<double, double> corner_slopes(const PeriodicPotential& pot, int b, double X0) {
  if (std::abs(pot.dV(X0)) > kCriticalValueTol) {
    throw Error(ErrorCode::NotCritical, "V'(" + std::to_string(X0) + ") != 0");
  }
  const double s = std::abs(b) * std::sqrt(std::abs(pot.d2V(X0)));
  return {-s, s};
}

inline std::pair<double, double> corner_slopes_fd(const std::function<double(double)>& P, double X0, double h = 1e-7) {
  const double c = P(X0);
  return {(c - P(X0 - h)) / h, (P(X0 + h) - c) / h};
}

inline void write_twist_csv(const std::function<double(double)>& P, std::size_t n, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  os.precision(17);
  os << "X,P\n";
  for (std::size_t i = 0; i <= n; ++i) {
    const double X = static_cast<double>(i) / n;
    os << X << ',' << P(X) << '\n';
  }
}

}  // namespace sbill
