#pragma once

// Odd-symmetric functions g(t) = -g(t + pi) vanishing on a prescribed closed
// set of directions, built from localized bumps.
//
// A direction set lives in [0, pi) (undirected directions). Its lift to the
// circle contains every component at u and u + pi. Around each isolated point
// ("node") g is an odd bump with non-zero slope; between consecutive nodes
// the bumps carry alternating signs so that g crosses zero transversally.
// Interval endpoints and accumulation targets are "flat" ends where g
// vanishes to all orders.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "sbill/errors.hpp"
#include "sbill/point2.hpp"
#include "sbill/smooth_step.hpp"
#include "sbill/trig_series.hpp"

namespace sbill {

enum class Side { Left, Right };

struct Accumulation {
  double target{0.0};
  Side side{Side::Left};
  double ratio{0.5};
  int count{12};
  /// Distance from the target to the first generated point. Defaults to 0.4
  /// of the free room on that side.
  std::optional<double> span;
};

struct DirectionSetSpec {
  std::vector<std::pair<double, double>> intervals;
  std::vector<double> isolated;
  std::vector<Accumulation> accumulations;

  bool empty() const { return intervals.empty() && isolated.empty() && accumulations.empty(); }
};

inline DirectionSetSpec direction_set_from_json(const nlohmann::json& j) {
  DirectionSetSpec spec;
  if (j.contains("intervals")) {
    for (const auto& iv : j.at("intervals")) {
      if (!iv.is_array() || iv.size() != 2) {
        throw Error(ErrorCode::InvalidArgument, "intervals must be [u, v] pairs");
      }
      spec.intervals.emplace_back(iv[0].get<double>(), iv[1].get<double>());
    }
  }
  if (j.contains("isolated")) {
    for (const auto& u : j.at("isolated")) spec.isolated.push_back(u.get<double>());
  }
  if (j.contains("accumulations")) {
    for (const auto& a : j.at("accumulations")) {
      Accumulation acc;
      acc.target = a.at("target").get<double>();
      const std::string side = a.value("side", std::string("left"));
      if (side == "left") acc.side = Side::Left;
      else if (side == "right") acc.side = Side::Right;
      else throw Error(ErrorCode::InvalidArgument, "accumulation side must be left or right");
      acc.ratio = a.value("ratio", 0.5);
      acc.count = a.value("count", 12);
      if (a.contains("span")) acc.span = a.at("span").get<double>();
      spec.accumulations.push_back(acc);
    }
  }
  return spec;
}

inline nlohmann::json to_json(const DirectionSetSpec& spec) {
  nlohmann::json j;
  j["intervals"] = nlohmann::json::array();
  for (const auto& [u, v] : spec.intervals) j["intervals"].push_back({u, v});
  j["isolated"] = spec.isolated;
  j["accumulations"] = nlohmann::json::array();
  for (const auto& a : spec.accumulations) {
    nlohmann::json e{{"target", a.target},
                     {"side", a.side == Side::Left ? "left" : "right"},
                     {"ratio", a.ratio},
                     {"count", a.count}};
    if (a.span) e["span"] = *a.span;
    j["accumulations"].push_back(e);
  }
  return j;
}

enum class ComponentKind { Node, FlatPoint, Interval };

struct Component {
  double lo{0.0};
  double hi{0.0};
  ComponentKind kind{ComponentKind::Node};

  bool is_flat() const { return kind != ComponentKind::Node; }
};

/// Components of the lifted set on [0, 2pi), sorted; invariant under t -> t + pi.
struct CircleSet {
  std::vector<Component> components;

  std::vector<double> nodes() const {
    std::vector<double> out;
    for (const auto& c : components) {
      if (c.kind == ComponentKind::Node) out.push_back(c.lo);
    }
    return out;
  }

  /// Distance (mod 2pi) from t to the set.
  double distance(double t) const {
    double best = kPi;
    for (const auto& c : components) {
      const double x = wrap_2pi(t);
      if (x >= c.lo && x <= c.hi) return 0.0;
      best = std::min({best, std::abs(wrap_pi(x - c.lo)), std::abs(wrap_pi(x - c.hi))});
    }
    return best;
  }
};

namespace detail {

/// Forward distance (mod pi) from a to b.
inline double forward_half(double a, double b) { return wrap_half(b - a); }

}  // namespace detail

/// Realized set in [0, pi): validated, deduplicated, sorted by position.
inline std::vector<Component> realize_half(const DirectionSetSpec& spec) {
  constexpr double kMinSeparation = 1e-12;
  std::vector<Component> base;
  for (auto [u, v] : spec.intervals) {
    if (!(u >= 0.0 && v < kPi && u <= v)) {
      throw Error(ErrorCode::InvalidArgument, "intervals must satisfy 0 <= u <= v < pi");
    }
    base.push_back({u, v, u == v ? ComponentKind::FlatPoint : ComponentKind::Interval});
  }
  for (const auto& a : spec.accumulations) {
    if (!(a.target >= 0.0 && a.target < kPi)) {
      throw Error(ErrorCode::InvalidArgument, "accumulation target must lie in [0, pi)");
    }
    if (!(a.ratio > 0.0 && a.ratio < 1.0) || a.count < 0) {
      throw Error(ErrorCode::InvalidArgument, "accumulation needs ratio in (0,1) and count >= 0");
    }
    const bool seen = std::any_of(base.begin(), base.end(), [&](const Component& c) {
      return c.kind == ComponentKind::FlatPoint && c.lo == a.target;
    });
    if (!seen) base.push_back({a.target, a.target, ComponentKind::FlatPoint});
  }
  for (double u : spec.isolated) {
    if (!(u >= 0.0 && u < kPi)) throw Error(ErrorCode::InvalidArgument, "isolated points must lie in [0, pi)");
    const bool is_target = std::any_of(spec.accumulations.begin(), spec.accumulations.end(),
                                       [&](const Accumulation& a) { return std::abs(a.target - u) < kMinSeparation; });
    if (!is_target) base.push_back({u, u, ComponentKind::Node});
  }

  std::vector<Component> all = base;
  for (const auto& a : spec.accumulations) {
    const Component* self = nullptr;
    for (const auto& c : base) {
      if (c.kind == ComponentKind::FlatPoint && c.lo == a.target) self = &c;
    }
    // Free room on the requested side of the target.
    double room = kPi;
    for (const auto& c : base) {
      if (&c == self) continue;
      for (double e : {c.lo, c.hi}) {
        const double d = a.side == Side::Left ? detail::forward_half(e, a.target)
                                              : detail::forward_half(a.target, e);
        if (d > 0.0) room = std::min(room, d);
      }
    }
    const double span = a.span.value_or(0.4 * room);
    if (!(span > 0.0 && span < room)) {
      throw Error(ErrorCode::OverlappingComponents, "accumulation span leaves its free room");
    }
    double offset = span;
    for (int j = 0; j < a.count; ++j) {
      const double x = wrap_half(a.side == Side::Left ? a.target - offset : a.target + offset);
      all.push_back({x, x, ComponentKind::Node});
      offset *= a.ratio;
    }
  }

  std::sort(all.begin(), all.end(), [](const Component& l, const Component& r) { return l.lo < r.lo; });
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    if (all[i + 1].lo - all[i].hi < kMinSeparation) {
      throw Error(ErrorCode::OverlappingComponents,
                  "components at " + std::to_string(all[i].lo) + " and " + std::to_string(all[i + 1].lo) +
                      " overlap");
    }
  }
  if (all.size() > 1 && all.front().lo + kPi - all.back().hi < kMinSeparation) {
    throw Error(ErrorCode::OverlappingComponents, "first and last components overlap across pi");
  }
  return all;
}

/// Lift to the circle: every component appears at u and u + pi.
inline CircleSet lift(const DirectionSetSpec& spec) {
  const auto half = realize_half(spec);
  CircleSet out;
  for (const auto& c : half) {
    out.components.push_back(c);
    out.components.push_back({c.lo + kPi, c.hi + kPi, c.kind});
  }
  std::sort(out.components.begin(), out.components.end(),
            [](const Component& l, const Component& r) { return l.lo < r.lo; });
  return out;
}

/// e^{-1/a-1/b} psi(t/a) psi(-t/b) arctan(t): vanishes exactly on (-a,b)^c and at 0.
inline double bump(double a, double b, double t) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error(ErrorCode::NonpositiveWidth, "bump widths must be positive");
  return std::exp(-1.0 / a - 1.0 / b) * smooth_step_value(t / a) * smooth_step_value(-t / b) * std::atan(t);
}

/// psi(t/a) psi(-t/b) arctan(t) with two derivatives (no normalization).
inline Jet2 bump_profile(double a, double b, double t) {
  if (t <= -a || t >= b) return {};
  const Jet2 p = smooth_step(t / a);
  const Jet2 q = smooth_step(-t / b);
  const double pd1 = p.d1 / a, pd2 = p.d2 / (a * a);
  const double qd1 = -q.d1 / b, qd2 = q.d2 / (b * b);
  const double r = std::atan(t);
  const double rd1 = 1.0 / (1.0 + t * t);
  const double rd2 = -2.0 * t * rd1 * rd1;
  Jet2 out;
  out.v = p.v * q.v * r;
  out.d1 = pd1 * q.v * r + p.v * qd1 * r + p.v * q.v * rd1;
  out.d2 = pd2 * q.v * r + p.v * qd2 * r + p.v * q.v * rd2 +
           2.0 * (pd1 * qd1 * r + pd1 * q.v * rd1 + p.v * qd1 * rd1);
  return out;
}

/// Non-negative flat bump on (lo, hi), equal to 1 near the midpoint.
inline Jet2 plateau_profile(double lo, double hi, double t) {
  if (t <= lo || t >= hi) return {};
  const double r = 0.5 * (hi - lo);
  const double m = lo + r;
  const Jet2 p = smooth_step((t - m) / r);
  const Jet2 q = smooth_step(-(t - m) / r);
  return {p.v * q.v, (p.d1 * q.v - p.v * q.d1) / r, (p.d2 * q.v - 2.0 * p.d1 * q.d1 + p.v * q.d2) / (r * r)};
}

enum class Variant { Transversal, Flat };

inline std::string to_string(Variant v) { return v == Variant::Transversal ? "transversal" : "flat"; }

inline Variant variant_from_string(const std::string& s) {
  if (s == "transversal") return Variant::Transversal;
  if (s == "flat") return Variant::Flat;
  throw Error(ErrorCode::InvalidArgument, "variant must be transversal or flat");
}

/// g with g(t) = -g(t + pi), plus two derivatives.
class SymmetricFunction {
 public:
  virtual ~SymmetricFunction() = default;

  virtual Jet2 jet(double t) const = 0;
  double operator()(double t) const { return jet(t).v; }

  virtual Variant tag() const = 0;
  /// The exact zero set when the construction knows it.
  virtual const CircleSet* zero_set() const { return nullptr; }
  /// Points where the integrand changes character (support ends, nodes).
  virtual std::vector<double> breakpoints() const { return {}; }
  /// Length scale of the finest feature near t; finite-difference steps stay well below it.
  virtual double feature_scale(double t) const = 0;
};

/// g given as a trigonometric polynomial with odd harmonics only.
class TrigFunction final : public SymmetricFunction {
 public:
  explicit TrigFunction(TrigPoly g) : g_(std::move(g)), d1_(g_.derivative()), d2_(d1_.derivative()) {
    if (g_.max_coeff_where([](int k) { return k % 2 == 0; }) > 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "g must contain odd harmonics only (g(t) = -g(t+pi))");
    }
  }

  Jet2 jet(double t) const override { return {g_(t), d1_(t), d2_(t)}; }
  Variant tag() const override { return Variant::Transversal; }
  double feature_scale(double) const override { return 1.0 / std::max(1, g_.degree()); }

  const TrigPoly& poly() const { return g_; }

 private:
  TrigPoly g_, d1_, d2_;
};

/// Weight of the odd bump around a node with neighbouring gaps a (left) and b (right).
/// It is the slope of g at the node and decays like sqrt(width) along accumulating chains.
inline double node_weight(double a, double b, double amplitude) {
  return amplitude * std::sqrt(std::min(a, b) / kPi);
}

class BumpFunction final : public SymmetricFunction {
 public:
  struct Node {
    double x;       // position in [0, 2pi)
    double left;    // width of the gap to the left
    double right;   // width of the gap to the right
    double weight;  // signed slope at x
  };
  struct Gap {
    double lo, hi;  // lo in [0, 2pi), hi may exceed 2pi
    int left_node{-1};
    int right_node{-1};
    double plateau{0.0};  // signed amplitude of a flat bump filling the gap
  };

  BumpFunction(std::vector<Node> nodes, std::vector<Gap> gaps, CircleSet zeros, Variant variant)
      : nodes_(std::move(nodes)), gaps_(std::move(gaps)), zeros_(std::move(zeros)), variant_(variant) {
    std::sort(gaps_.begin(), gaps_.end(), [](const Gap& l, const Gap& r) { return l.lo < r.lo; });
  }

  Jet2 jet(double t) const override {
    const double x = wrap_2pi(t);
    const Gap* gap = find_gap(x);
    if (gap == nullptr) return {};
    double y = x;
    if (y < gap->lo) y += kTwoPi;
    if (y >= gap->hi && gap->right_node < 0) return {};  // inside a component
    Jet2 out;
    auto add = [&](const Jet2& j, double s) {
      out.v += s * j.v;
      out.d1 += s * j.d1;
      out.d2 += s * j.d2;
    };
    if (gap->left_node >= 0) {
      const Node& n = nodes_[gap->left_node];
      add(bump_profile(n.left, n.right, y - gap->lo), n.weight);
    }
    if (gap->right_node >= 0) {
      const Node& n = nodes_[gap->right_node];
      add(bump_profile(n.left, n.right, y - gap->hi), n.weight);
    }
    if (gap->plateau != 0.0) add(plateau_profile(gap->lo, gap->hi, y), gap->plateau);
    return out;
  }

  Variant tag() const override { return variant_; }
  const CircleSet* zero_set() const override { return &zeros_; }

  std::vector<double> breakpoints() const override {
    std::vector<double> out;
    for (const auto& g : gaps_) {
      out.push_back(wrap_2pi(g.lo));
      out.push_back(wrap_2pi(g.hi));
      if (g.plateau != 0.0) out.push_back(wrap_2pi(0.5 * (g.lo + g.hi)));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  double feature_scale(double t) const override {
    const double x = wrap_2pi(t);
    const Gap* gap = find_gap(x);
    if (gap == nullptr) return kPi;
    double scale = gap->hi - gap->lo;
    for (int idx : {gap->left_node, gap->right_node}) {
      if (idx >= 0) scale = std::min({scale, nodes_[idx].left, nodes_[idx].right});
    }
    return scale;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Gap>& gaps() const { return gaps_; }

 private:
  const Gap* find_gap(double x) const {
    if (gaps_.empty()) return nullptr;
    auto it = std::upper_bound(gaps_.begin(), gaps_.end(), x, [](double v, const Gap& g) { return v < g.lo; });
    if (it == gaps_.begin()) return &gaps_.back();  // wrapped gap
    return &*std::prev(it);
  }

  std::vector<Node> nodes_;
  std::vector<Gap> gaps_;
  CircleSet zeros_;
  Variant variant_;
};

/// Build g vanishing exactly on the lift of the spec.
///   transversal: non-zero slope at isolated points, alternating signs along each chain
///   flat: g > 0 on the half-circle gaps, vanishing to all orders at every zero
inline std::shared_ptr<const BumpFunction> build_g(const DirectionSetSpec& spec, Variant variant,
                                                   double amplitude = 1.0) {
  if (spec.empty()) throw Error(ErrorCode::EmptyComplement, "direction set is empty; g cannot be odd-symmetric");
  std::vector<Component> half = realize_half(spec);
  if (variant == Variant::Flat) {
    for (auto& c : half) {
      if (c.kind == ComponentKind::Node) c.kind = ComponentKind::FlatPoint;
    }
  }
  const std::size_t n = half.size();
  double total_gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double next = i + 1 < n ? half[i + 1].lo : half[0].lo + kPi;
    total_gap += next - half[i].hi;
  }
  if (!(total_gap > 1e-12)) throw Error(ErrorCode::EmptyComplement, "direction set covers every direction");

  // Start at a flat component when there is one, so chains never wrap.
  std::size_t start = 0;
  bool cyclic = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (half[i].is_flat()) {
      start = i;
      cyclic = false;
      break;
    }
  }
  if (cyclic && n % 2 == 0) {
    throw Error(ErrorCode::ParityObstruction,
                "an even number of isolated directions with no flat component admits no odd g "
                "with transversal zeros at all of them");
  }

  struct HalfGap {
    double lo, hi;
    std::size_t left, right;  // indices into `half`
    double sign;
  };
  // Walk the chain once around [start, start + pi); after the gap that wraps
  // past pi every position is shifted by pi, so signs stay consistent.
  std::vector<HalfGap> hgaps;
  double sign = 1.0;
  double offset = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t i = (start + s) % n;
    const std::size_t j = (i + 1) % n;
    const double lo = half[i].hi + offset;
    double hi = half[j].lo + offset;
    if (j <= i) {
      hi += kPi;
      offset = kPi;
    }
    if (half[i].is_flat() || s == 0) sign = 1.0;
    else sign = -sign;
    hgaps.push_back({lo, hi, i, j, sign});
  }
  std::vector<BumpFunction::Node> nodes;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t i = (start + s) % n;
    if (half[i].kind != ComponentKind::Node) continue;
    const HalfGap& right = hgaps[s];
    const HalfGap& left = hgaps[(s + n - 1) % n];
    const double a = left.hi - left.lo;
    const double b = right.hi - right.lo;
    const double w = node_weight(a, b, amplitude) * right.sign;
    // right.lo is half[i].lo or half[i].lo + pi in the chain frame
    const bool shifted = right.lo >= kPi;
    nodes.push_back({half[i].lo, a, b, shifted ? -w : w});
    nodes.push_back({half[i].lo + kPi, a, b, shifted ? w : -w});
  }
  auto node_at = [&](double x) {
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (std::abs(wrap_pi(nodes[k].x - x)) < 1e-13) return static_cast<int>(k);
    }
    return -1;
  };
  std::vector<BumpFunction::Gap> gaps;
  for (const auto& hg : hgaps) {
    const bool left_node = half[hg.left].kind == ComponentKind::Node;
    const bool right_node = half[hg.right].kind == ComponentKind::Node;
    double plateau = 0.0;
    if (!left_node && !right_node) {
      const double r = 0.5 * (hg.hi - hg.lo);
      plateau = hg.sign * amplitude * std::sqrt(r / kPi) * r / 2.0;
    }
    const double lo0 = half[hg.left].hi;
    const double width = hg.hi - hg.lo;
    const double sgn = hg.lo >= kPi ? -1.0 : 1.0;
    for (double shift : {0.0, kPi}) {
      const double lo = lo0 + shift;
      const double hi = lo + width;
      gaps.push_back({lo, hi, left_node ? node_at(lo) : -1, right_node ? node_at(hi) : -1,
                      (shift == 0.0 ? sgn : -sgn) * plateau});
    }
  }
  CircleSet zeros = lift(spec);
  return std::make_shared<const BumpFunction>(std::move(nodes), std::move(gaps), std::move(zeros), variant);
}

}  // namespace sbill
