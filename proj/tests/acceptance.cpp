// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sbill/sbill.hpp"

using namespace sbill;

namespace {

constexpr double kEps = 0.01;

int failures = 0;

void verdict(int n, bool ok, const std::string& what) {
  std::printf("%s %2d  %s\n", ok ? "PASS" : "FAIL", n, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

StringTable sin3_table() { return make_string_table(recover_perturbation(TrigPoly::sine(3, kEps)), 1.0, 10.0); }
StringTable circle_table() { return make_string_table(recover_perturbation(TrigPoly::sine(3, 0.0)), 0.0, 3.0); }

StringTable bump_table(const DirectionSetSpec& spec, double amp, Variant v = Variant::Transversal) {
  return make_string_table(recover_perturbation(std::shared_ptr<const SymmetricFunction>(build_g(spec, v, amp))), 1.0,
                           10.0);
}

DirectionSetSpec isolated_spec() {
  DirectionSetSpec s;
  s.isolated = {0.3, 1.4, 2.2};
  return s;
}

DirectionSetSpec interval_spec() {
  DirectionSetSpec s;
  s.intervals = {{0.2, 0.4}};
  s.isolated = {1.5, 2.5};
  return s;
}

DirectionSetSpec accumulation_spec() {
  DirectionSetSpec s;
  s.accumulations.push_back({1.2, Side::Left, 0.5, 12, std::nullopt});
  return s;
}

struct Named {
  std::string name;
  StringTable st;
};

// ---------------------------------------------------------------------------

void circle_sanity() {
  const auto t0 = std::chrono::steady_clock::now();
  const StringTable st = circle_table();
  double rdev = 0.0;
  for (int j = 0; j < 4096; ++j) rdev = std::max(rdev, std::abs(st.radius(kTwoPi * j / 4096.0) - 2.0));
  double mdev = 0.0;
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> ut(0.0, kTwoPi), uth(0.05, kPi - 0.05);
  for (int i = 0; i < 200; ++i) {
    const PhasePoint p{ut(rng), uth(rng)};
    const PhasePoint q = next_bounce(st, p);
    mdev = std::max(mdev, std::abs(wrap_pi(q.t - p.t - 2.0 * p.theta)) + std::abs(q.theta - p.theta));
  }
  const double secs = seconds_since(t0);
  verdict(1, rdev < 1e-10 && mdev < 1e-9 && secs < 5.0,
          "circle: radius dev " + fmt("%.2e", rdev) + ", map dev " + fmt("%.2e", mdev) + ", " + fmt("%.2f s", secs));
}

void perturbation_routes() {
  const TrigPoly g = TrigPoly::sine(3, kEps);
  const TrigPoly want = TrigPoly::cosine(3, 8.0 * kEps / 3.0);
  const PerturbationData pd = recover_perturbation(g);
  const SpectralPerturbation sp = spectral_from_g(g);
  double diff = 0.0, spec = 0.0;
  for (int k = -8; k <= 8; ++k) {
    diff = std::max(diff, std::abs(pd.f_poly->coeff(k) - want.coeff(k)));
    spec = std::max(spec, std::abs(sp.f.coeff(k) - want.coeff(k)));
  }
  verdict(2, diff < 1e-10 && spec < 1e-10 && pd.reconstruction_defect < 1e-8,
          "f = (8e/3) cos 3t: differential " + fmt("%.2e", diff) + ", spectral " + fmt("%.2e", spec) +
              ", reconstruction " + fmt("%.2e", pd.reconstruction_defect));
}

void sin3_diameters() {
  const StringTable st = sin3_table();
  const SingularSet ss = singular_points(st);
  bool ok = ss.points.size() == 6 && !ss.continuum;
  double loc = 0.0, chord = 0.0, i1_meas = 0.0, i1_stated = 0.0, i1_exact = 0.0;
  int hyper = 0;
  std::string conflict;
  for (std::size_t k = 0; k < ss.points.size() && k < 6; ++k) {
    const double t0 = ss.points[k].t0;
    loc = std::max(loc, std::abs(t0 - k * kPi / 3.0));
    chord = std::max(chord, std::abs(st.radius(t0) + st.radius(t0 + kPi) - 11.0));
    try {
      const DiameterSpectrum ds = classify(st, t0);
      hyper += ds.cls == OrbitClass::Hyperbolic;
      if (k == 0) {
        const double d = ds.k.d, h = ds.h, hd = ds.hddot;
        i1_meas = ds.ind.i1;
        i1_stated = 4.0 * d * hd / ((d * d - h * h) * (d * d - (h + 2.0 * hd) * (h + 2.0 * hd)));
        i1_exact = i1_closed_form(d, h, hd);
      }
    } catch (const Error& e) {
      conflict = e.what();
    }
  }
  ok = ok && loc < 1e-9 && chord < 1e-9 && hyper == 6 && conflict.empty();
  const bool i1_ok = std::abs(i1_meas - (-9.02e-5)) < 0.02 * 9.02e-5;
  verdict(3, ok && i1_ok,
          std::to_string(ss.points.size()) + " diameters, location " + fmt("%.1e", loc) + ", chord " +
              fmt("%.1e", chord) + ", hyperbolic " + std::to_string(hyper) + "/6" +
              (conflict.empty() ? "" : ", conflict: " + conflict) + "; I1 measured " + fmt("%.4e", i1_meas) +
              " vs target -9.02e-5 (unsquared formula gives " + fmt("%.4e", i1_stated) + ", 4dH''^2 form gives " +
              fmt("%.4e", i1_exact) + ")");
}

void invariance() {
  const auto t0 = std::chrono::steady_clock::now();
  const StringTable st = sin3_table();
  const CurveSample cs = sample_curves(st, 4096);
  double worst = 0.0;
  std::string parts;
  for (Branch b : {Branch::Plus, Branch::Minus, Branch::SpliceMax, Branch::SpliceMin}) {
    const double r = invariance_residual(st, b, cs);
    worst = std::max(worst, r);
    parts += " " + to_string(b) + " " + fmt("%.1e", r);
  }
  const double secs = seconds_since(t0);
  verdict(4, worst < 1e-7 && secs < 60.0, "residuals" + parts + ", " + fmt("%.1f s", secs));
}

void splice_corners() {
  const StringTable st = sin3_table();
  const SingularSet ss = singular_points(st);
  double slope = 0.0, rxx = 0.0;
  for (const auto& p : ss.points) {
    const auto [mp, mm] = one_sided_slopes(st, p.t0);
    const double m = std::abs(mm);
    const auto [left, right] = splice_slopes_fd(st, p.t0);
    slope = std::max({slope, std::abs(left + m), std::abs(right - m)});
    const auto [r2, noise] = radius_second_derivative(st, p.t0);
    rxx = std::max(rxx, std::abs(r2 - mm));
    (void)mp;
    (void)noise;
  }
  verdict(5, ss.points.size() == 6 && slope < 1e-4 && rxx < 1e-4,
          "splice slopes " + fmt("%.1e", slope) + ", r_xixi " + fmt("%.1e", rxx) + " over " +
              std::to_string(ss.points.size()) + " diameters");
}

void classification_agreement(const std::vector<Named>& tables) {
  int checked = 0;
  std::string bad;
  auto check_at = [&](const std::string& name, const StringTable& st, double t) {
    try {
      const DiameterSpectrum ds = classify(st, t);
      const SingularPoint sp = transversality(st, t);
      const bool hyper = ds.cls == OrbitClass::Hyperbolic;
      const bool trans = sp.cls == SingularClass::Transversal;
      if (hyper != trans) bad += " " + name + "@" + fmt("%.6f", t) + " spectrum/transversality disagree;";
    } catch (const Error& e) {
      bad += " " + name + ": " + e.what() + ";";
    }
    ++checked;
  };
  for (const auto& [name, st] : tables) {
    const DiameterSet ds = find_diameters(st);
    for (const auto& d : ds.isolated) {
      check_at(name, st, d.t0);
      check_at(name, st, d.t0 + kPi);
    }
    for (const auto& [lo, hi] : ds.continua) check_at(name, st, 0.5 * (lo + hi));
    if (ds.full_continuum) {
      for (double t : {0.0, 0.7, 2.1}) check_at(name, st, t);
    }
  }
  verdict(6, bad.empty() && checked > 0,
          std::to_string(checked) + " diameters on " + std::to_string(tables.size()) + " tables" +
              (bad.empty() ? ", no conflicts" : ":" + bad));
}

void accumulation(const StringTable& st) {
  const SingularSet ss = singular_points(st);
  std::vector<double> dist;
  for (const auto& p : ss.points) {
    const double d = std::fmod(1.2 - p.t0 + 4.0 * kPi, kPi);
    if (d > 1e-12) dist.push_back(d);
  }
  std::sort(dist.begin(), dist.end(), std::greater<>());
  dist.erase(std::unique(dist.begin(), dist.end(), [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             dist.end());
  double rlo = 1e9, rhi = -1e9;
  for (std::size_t i = 0; i + 2 < dist.size(); ++i) {
    const double r = (dist[i + 1] - dist[i + 2]) / (dist[i] - dist[i + 1]);
    rlo = std::min(rlo, r), rhi = std::max(rhi, r);
  }

  std::vector<std::pair<double, double>> chain;
  bool all_hyper = true;
  for (const auto& s : spectrum(st)) {
    const double d = std::fmod(1.2 - s.t0 + kTwoPi, kPi);
    if (d < 1e-12) continue;
    all_hyper = all_hyper && s.cls == OrbitClass::Hyperbolic;
    chain.emplace_back(d, s.max_modulus());
  }
  std::sort(chain.begin(), chain.end(), std::greater<>());
  bool monotone = chain.size() == 12;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) monotone = monotone && chain[i].second > chain[i + 1].second;
  const bool to_one = !chain.empty() && chain.back().second - 1.0 < 0.1 * (chain.front().second - 1.0);

  verdict(7, ss.points.size() == 24 && dist.size() == 12 && rlo >= 0.4 && rhi <= 0.6 && all_hyper && monotone && to_one,
          std::to_string(ss.points.size()) + " transversal points, gap ratios in [" + fmt("%.3f", rlo) + ", " +
              fmt("%.3f", rhi) + "], moduli " + (chain.empty() ? "-" : fmt("%.6f", chain.front().second)) + " -> " +
              (chain.empty() ? "-" : fmt("%.6f", chain.back().second)) + (monotone ? " monotone" : " NOT monotone"));
}

void constant_width(const std::vector<Named>& tables) {
  double worst = 0.0;
  for (const auto& [name, st] : tables) {
    if (st.tau() == 0.0) continue;
    const auto body = st.inner_body();
    double lo = 1e9, hi = -1e9;
    for (int j = 0; j < 256; ++j) {
      const double th = kPi * j / 128.0;
      const double w = body ? width(*body, th) : support_width([&](double t) { return st.inner(t); }, th);
      lo = std::min(lo, w), hi = std::max(hi, w);
    }
    worst = std::max(worst, hi - lo);
  }
  const ConvexBody even = make_body(TrigPoly::constant(1.0) + TrigPoly::cosine(3, 8.0 * kEps / 3.0) +
                                        TrigPoly::cosine(2, 0.05),
                                    {0.0, -1.0});
  double lo = 1e9, hi = -1e9;
  for (int j = 0; j < 256; ++j) {
    const double w = support_width([&](double t) { return even.point(t); }, kPi * j / 128.0);
    lo = std::min(lo, w), hi = std::max(hi, w);
  }
  verdict(8, worst < 1e-10 && hi - lo > 1e-3,
          "width spread " + fmt("%.1e", worst) + ", even-harmonic control " + fmt("%.1e", hi - lo));
}

void twist() {
  PotentialSpec s;
  s.maxima = {0.2};
  s.degenerate = {0.7};
  const auto pot = build_potential(s);
  const int b = 2;
  const auto P = curve_from_energy(pot, b, 0.0);
  const auto [l, r] = corner_slopes(*pot, b, 0.2);
  const double want = b * std::sqrt(std::abs(pot->d2V(0.2)));
  const auto [fl, fr] = corner_slopes_fd(P, 0.2);
  const double corner = std::max({std::abs(fl + want), std::abs(fr - want), std::abs(l + want), std::abs(r - want)});
  const auto [gl, gr] = corner_slopes_fd(P, 0.7);
  const double flat = std::max(std::abs(gl), std::abs(gr));

  const TwistSystem sys(1, b, pot);
  double drift = 0.0;
  for (const TwistState s0 : {TwistState{0.13, 0.9, 0.0}, TwistState{0.41, 0.2, 0.0}, TwistState{0.7, 1.6, 0.0}}) {
    const auto [X0, P0] = reduce(sys, s0.x, s0.p, s0.t);
    const TwistState s1 = integrate(sys, s0, 100.0);
    const auto [X1, P1] = reduce(sys, s1.x, s1.p, s1.t);
    drift = std::max(drift, std::abs(sys.K(X1, P1) - sys.K(X0, P0)));
  }
  verdict(9, corner < 1e-4 && flat < 1e-6 && drift < 1e-8,
          "corner slope error " + fmt("%.1e", corner) + " (b sqrt|V''| = " + fmt("%.6f", want) + "), flat " +
              fmt("%.1e", flat) + ", energy drift " + fmt("%.1e", drift));
}

void symplectic(const std::vector<Named>& tables) {
  double worst = 0.0;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ut(0.0, kTwoPi), uth(0.3, kPi - 0.3);
  for (const auto& [name, st] : tables) {
    for (int i = 0; i < 100; ++i) {
      const PhasePoint p{ut(rng), uth(rng)};
      worst = std::max(worst, std::abs(area_preserving_det(st, p, 2) - 1.0));
    }
  }
  verdict(10, worst < 1e-4,
          "det dT^2 - 1 at most " + fmt("%.1e", worst) + " over " + std::to_string(100 * tables.size()) + " points");
}

template <class Fn>
void guarded(int n, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    verdict(n, false, std::string("threw: ") + e.what());
  }
}

}  // namespace

int main() {
  guarded(1, circle_sanity);
  guarded(2, perturbation_routes);
  guarded(3, sin3_diameters);
  guarded(4, invariance);
  guarded(5, splice_corners);

  std::vector<Named> tables;
  tables.push_back({"sin3", sin3_table()});
  tables.push_back({"isolated", bump_table(isolated_spec(), 0.05)});
  tables.push_back({"isolated-flat", bump_table(isolated_spec(), 0.05, Variant::Flat)});
  tables.push_back({"interval", bump_table(interval_spec(), 0.02)});
  tables.push_back({"accumulation", bump_table(accumulation_spec(), 0.2)});
  tables.push_back({"circle", circle_table()});

  guarded(6, [&] { classification_agreement(tables); });
  guarded(7, [&] { accumulation(tables[4].st); });
  guarded(8, [&] { constant_width(tables); });
  guarded(9, twist);
  guarded(10, [&] { symplectic(tables); });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
