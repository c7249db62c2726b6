#include <gtest/gtest.h>

#include <random>

#include "sbill/twist_example.hpp"

using namespace sbill;

namespace {

std::shared_ptr<const BumpPotential> single(double x) {
  PotentialSpec s;
  s.maxima = {x};
  return build_potential(s);
}

}  // namespace

TEST(Potential, SingleNode) {
  const auto pot = single(0.5);
  EXPECT_EQ(pot->dV(0.5), 0.0);
  EXPECT_LT(pot->d2V(0.5), 0.0);
  EXPECT_NEAR(pot->d2V(0.5), -1.0, 1e-12);
  EXPECT_NEAR(pot->V(0.5), 0.0, 1e-15);
  EXPECT_NEAR(pot->V(0.4999999), pot->V(0.5000001), 1e-15);
  for (double x : {0.1, 0.3, 0.7, 0.95}) EXPECT_LT(pot->V(x), 0.0);
}

TEST(Potential, Empty) {
  const auto pot = build_potential(PotentialSpec{});
  for (double x : {0.0, 0.3, 0.9}) {
    EXPECT_EQ(pot->V(x), 0.0);
    EXPECT_EQ(pot->dV(x), 0.0);
  }
}

TEST(Potential, CommonLevelAndGapIntegrals) {
  PotentialSpec s;
  s.maxima = {0.1, 0.35, 0.8};
  s.degenerate = {0.6};
  const auto pot = build_potential(s);
  for (const auto& g : pot->gaps()) {
    const double end = pot->integrate(g, 0.0, g.w);
    EXPECT_NEAR(end, 0.0, 1e-12);
    // left and right integrations meet at the minimum
    const double mid = g.lo + 0.5 * g.w;
    EXPECT_NEAR(pot->V(mid - 1e-13), pot->V(mid + 1e-13), 1e-12);
  }
  for (const auto& c : pot->critical_points()) {
    EXPECT_NEAR(pot->dV(c.x), 0.0, 1e-10) << c.x;
    if (c.maximum) {
      EXPECT_NEAR(pot->V(c.x), 0.0, 1e-10);
      if (c.degenerate) {
        EXPECT_NEAR(pot->d2V(c.x), 0.0, 1e-12);
      } else {
        EXPECT_LT(pot->d2V(c.x), 0.0);
      }
    } else {
      EXPECT_GT(pot->d2V(c.x), 0.0);
      EXPECT_LT(pot->V(c.x), 0.0);
    }
  }
}

TEST(Potential, CriticalSetIsExactlyListed) {
  PotentialSpec s;
  s.maxima = {0.1, 0.35, 0.8};
  s.degenerate = {0.6};
  const auto pot = build_potential(s);
  const auto& crit = pot->critical_points();
  ASSERT_EQ(crit.size(), 8u);
  const int n = 40000;
  int changes = 0;
  for (int i = 0; i < n; ++i) {
    const double a = pot->dV((i + 0.5) / n), b = pot->dV((i + 1.5) / n);
    changes += (a > 0.0) != (b > 0.0);
  }
  // every maximum and minimum is a simple sign change, the degenerate maximum too (cubic)
  EXPECT_EQ(changes, 8);
}

TEST(Potential, DerivativesMatchFiniteDifferences) {
  PotentialSpec s;
  s.maxima = {0.1, 0.35};
  s.degenerate = {0.6};
  const auto pot = build_potential(s);
  const double h = 1e-5;
  for (double x : {0.05, 0.2, 0.3, 0.45, 0.58, 0.7, 0.99}) {
    EXPECT_NEAR((pot->V(x + h) - pot->V(x - h)) / (2 * h), pot->dV(x), 1e-8) << x;
    EXPECT_NEAR((pot->dV(x + h) - pot->dV(x - h)) / (2 * h), pot->d2V(x), 1e-6) << x;
  }
}

TEST(Potential, SpecOverlap) {
  PotentialSpec s;
  s.maxima = {0.2, 0.2};
  EXPECT_THROW(build_potential(s), Error);
  s.maxima = {1.2};
  try {
    build_potential(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpecOverlap);
  }
}

TEST(Reduce, Basic) {
  const TwistSystem sys(1, 1, std::make_shared<CosinePotential>());
  const auto [X, P] = reduce(sys, 0.0, 0.0, 0.0);
  EXPECT_EQ(X, 0.0);
  EXPECT_EQ(P, -1.0);
}

TEST(Reduce, EnergyConservation) {
  for (auto pot : {std::shared_ptr<const PeriodicPotential>(std::make_shared<CosinePotential>()),
                   std::shared_ptr<const PeriodicPotential>(single(0.3))}) {
    const TwistSystem sys(1, 2, pot);
    TwistState s{0.13, 0.9, 0.0};
    const auto [X0, P0] = reduce(sys, s.x, s.p, s.t);
    const double K0 = sys.K(X0, P0);
    s = integrate(sys, s, 100.0);
    const auto [X1, P1] = reduce(sys, s.x, s.p, s.t);
    EXPECT_LT(std::abs(sys.K(X1, P1) - K0), 1e-8);
  }
}

TEST(Reduce, EquilibriumPeriod) {
  // an orbit sitting at a critical X advances x by 1 in time b/a
  const TwistSystem sys(2, 3, single(0.4));
  const double X0 = 0.4;
  TwistState s{X0 / 3.0, 2.0 / 3.0, 0.0};
  s = integrate(sys, s, 1.5);
  EXPECT_NEAR(s.x, X0 / 3.0 + 1.0, 1e-10);
  EXPECT_NEAR(s.p, 2.0 / 3.0, 1e-10);
}

TEST(Curve, ZeroPotential) {
  const auto P = curve_from_energy(build_potential(PotentialSpec{}), 1, 0.5);
  for (double X : {0.0, 0.4, 0.8}) EXPECT_DOUBLE_EQ(P(X), 1.0);
}

TEST(Curve, NegativeRadicand) {
  try {
    curve_from_energy(std::make_shared<CosinePotential>(), 1, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeRadicand);
  }
}

TEST(Corner, CosineClosedForm) {
  const auto pot = std::make_shared<CosinePotential>();
  EXPECT_NEAR(pot->d2V(0.5), -1.0, 1e-15);
  for (int b : {1, 2}) {
    const auto [l, r] = corner_slopes(*pot, b, 0.5);
    EXPECT_DOUBLE_EQ(l, -b);
    EXPECT_DOUBLE_EQ(r, b);
    const auto P = curve_from_energy(pot, b, b * b * pot->max_level());
    const auto [fl, fr] = corner_slopes_fd(P, 0.5, 1e-5);
    EXPECT_NEAR(fl, l, 1e-4);
    EXPECT_NEAR(fr, r, 1e-4);
  }
}

TEST(Corner, BumpNondegenerateAndDegenerate) {
  PotentialSpec s;
  s.maxima = {0.2};
  s.degenerate = {0.7};
  const auto pot = build_potential(s);
  const auto P = curve_from_energy(pot, 2, 0.0);
  const auto [l, r] = corner_slopes(*pot, 2, 0.2);
  EXPECT_NEAR(r, 2.0 * std::sqrt(std::abs(pot->d2V(0.2))), 1e-15);
  const auto [fl, fr] = corner_slopes_fd(P, 0.2);
  EXPECT_NEAR(fl, l, 1e-4);
  EXPECT_NEAR(fr, r, 1e-4);
  const auto [dl, dr] = corner_slopes(*pot, 2, 0.7);
  EXPECT_EQ(dl, 0.0);
  EXPECT_EQ(dr, 0.0);
  const auto [gl, gr] = corner_slopes_fd(P, 0.7);
  EXPECT_LT(std::abs(gl), 1e-6);
  EXPECT_LT(std::abs(gr), 1e-6);
  EXPECT_THROW(corner_slopes(*pot, 1, 0.3), Error);
}

TEST(Curve, InvariantUnderTimeOneMap) {
  PotentialSpec s;
  s.maxima = {0.2, 0.55};
  const auto pot = build_potential(s);
  const TwistSystem sys(1, 1, pot);
  const auto P = curve_from_energy(pot, 1, sys.energy_level());
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double X = (i + 0.37) / 40.0;
    TwistState st{X, P(X) + 1.0, 0.0};
    st = time_one_map(sys, st);
    const auto [X1, P1] = reduce(sys, st.x, st.p, st.t);
    worst = std::max(worst, std::abs(P1 - P(X1)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Corner, AccumulatingCorners) {
  PotentialSpec s;
  s.accumulations.push_back({0.5, Side::Left, 0.5, 10, std::nullopt});
  const auto pot = build_potential(s);
  std::vector<double> xs;
  for (const auto& c : pot->critical_points()) {
    if (c.maximum && !c.degenerate) xs.push_back(c.x);
  }
  ASSERT_EQ(xs.size(), 11u);
  std::sort(xs.begin(), xs.end());
  EXPECT_NEAR(xs.back(), 0.5, 1e-15);
  // the last gap, up to the target itself, repeats the previous one
  for (std::size_t i = 0; i + 3 < xs.size(); ++i) {
    EXPECT_NEAR((xs[i + 2] - xs[i + 1]) / (xs[i + 1] - xs[i]), 0.5, 0.1);
  }
  for (double x : xs) {
    const auto [l, r] = corner_slopes(*pot, 1, x);
    EXPECT_LT(l, 0.0);
    EXPECT_GT(r, 0.0);
  }
}
