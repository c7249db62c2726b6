#include <gtest/gtest.h>

#include <random>

#include "sbill/invariant_curves.hpp"

using namespace sbill;

namespace {

constexpr double kEps = 0.01;

StringTable sin3_table() { return make_string_table(recover_perturbation(TrigPoly::sine(3, kEps)), 1.0, 10.0); }
StringTable circle_table() { return make_string_table(recover_perturbation(TrigPoly::sine(3, 0.0)), 0.0, 3.0); }

StringTable bump_table(const DirectionSetSpec& spec, Variant v, double amp) {
  const auto g = build_g(spec, v, amp);
  return make_string_table(recover_perturbation(std::shared_ptr<const SymmetricFunction>(g)), 1.0, 10.0);
}

DirectionSetSpec accumulation_spec() {
  DirectionSetSpec spec;
  spec.accumulations.push_back({1.2, Side::Left, 0.5, 12, std::nullopt});
  return spec;
}

}  // namespace

TEST(LambdaPm, Circle) {
  const StringTable st = circle_table();
  for (double t : {0.0, 0.4, 2.0, 5.5}) {
    const auto [p, m] = lambda_pm(st, t);
    EXPECT_NEAR(p, kPi / 2.0, 1e-12);
    EXPECT_NEAR(m, kPi / 2.0, 1e-12);
  }
}

TEST(LambdaPm, SinThree) {
  const StringTable st = sin3_table();
  const auto [p0, m0] = lambda_pm(st, 0.0);
  EXPECT_NEAR(p0, kPi / 2.0, 1e-12);
  EXPECT_NEAR(m0, kPi / 2.0, 1e-12);
  const auto [p, m] = lambda_pm(st, kPi / 6.0);
  EXPECT_GT(std::abs(p - m), 1e-5);
  EXPECT_NEAR(p + m, kPi, 1e-12);
  // lambda_- from the raw definition
  const BoundaryJet j = st.boundary_jet(kPi / 6.0);
  EXPECT_NEAR(m, std::acos(-dot(j.p, j.d1) / (norm(j.p) * norm(j.d1))), 1e-15);
}

TEST(CurveSample, MirrorAndSplice) {
  const StringTable st = sin3_table();
  const CurveSample cs = sample_curves(st, 1024);
  for (std::size_t i = 0; i < cs.t.size(); ++i) {
    EXPECT_NEAR(cs.plus[i] + cs.minus[i], kPi, 1e-9);
    EXPECT_EQ(cs.splice[i], std::max(cs.plus[i], cs.minus[i]));
    EXPECT_EQ(cs.splice_min[i], std::min(cs.plus[i], cs.minus[i]));
  }
  ASSERT_EQ(cs.crossings.size(), 6u);
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(cs.crossings[k], k * kPi / 3.0, 1e-12);
}

TEST(CurveSample, CrossingsMatchSignChanges) {
  DirectionSetSpec spec;
  spec.isolated = {0.3, 1.4, 2.2};
  const StringTable st = bump_table(spec, Variant::Transversal, 0.05);
  const CurveSample cs = sample_curves(st, 4096);
  std::vector<double> changes;
  const std::size_t n = cs.t.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = cs.plus[i] - cs.minus[i], b = cs.plus[(i + 1) % n] - cs.minus[(i + 1) % n];
    if ((a > 0.0) != (b > 0.0)) changes.push_back(cs.t[i]);
  }
  ASSERT_EQ(changes.size(), cs.crossings.size());
  const double h = kTwoPi / n;
  for (std::size_t i = 0; i < changes.size(); ++i) {
    EXPECT_GE(cs.crossings[i], changes[i] - 1e-8);
    EXPECT_LE(cs.crossings[i], changes[i] + h + 1e-8);
  }
}

TEST(Invariance, Circle) {
  const StringTable st = circle_table();
  EXPECT_LT(invariance_residual(st, Branch::Plus, 1024), 1e-10);
}

TEST(Invariance, SinThreeAllBranches) {
  const StringTable st = sin3_table();
  const CurveSample cs = sample_curves(st, kCurveGrid);
  for (Branch b : {Branch::Plus, Branch::Minus, Branch::SpliceMax, Branch::SpliceMin}) {
    EXPECT_LT(invariance_residual(st, b, cs), 1e-7) << to_string(b);
  }
}

TEST(Invariance, BumpTable) {
  DirectionSetSpec spec;
  spec.isolated = {0.3, 1.4, 2.2};
  const StringTable st = bump_table(spec, Variant::Transversal, 0.05);
  const CurveSample cs = sample_curves(st, 1024);
  EXPECT_LT(invariance_residual(st, Branch::Plus, cs), 1e-7);
  EXPECT_LT(invariance_residual(st, Branch::SpliceMax, cs), 1e-7);
}

TEST(Invariance, SpliceIsNotInvariantUnderWrongPartner) {
  // The branch itself is only T^2-invariant: T sends it to the other branch.
  const StringTable st = sin3_table();
  const CurveSample cs = sample_curves(st, 1024);
  double worst = 0.0;
  for (std::size_t i = 0; i < cs.t.size(); i += 16) {
    const PhasePoint q = next_bounce(st, {cs.t[i], cs.plus[i]});
    worst = std::max(worst, std::abs(q.theta - detail::interp_cubic(cs.plus, q.t)));
  }
  EXPECT_GT(worst, 1e-5);
}

TEST(OneSidedSlopes, Circle) {
  const auto [a, b] = one_sided_slopes(circle_table(), 1.0);
  EXPECT_NEAR(a, 0.0, 1e-6);
  EXPECT_NEAR(b, 0.0, 1e-6);
}

TEST(OneSidedSlopes, SinThreeMatchesFiniteDifferences) {
  const StringTable st = sin3_table();
  for (int k = 0; k < 6; ++k) {
    const double t0 = k * kPi / 3.0;
    const auto [mp, mm] = one_sided_slopes(st, t0);
    EXPECT_NEAR(mp, -mm, 1e-15);
    EXPECT_GT(std::abs(mm), 1e-4);
    const double r = st.radius(t0);
    EXPECT_NEAR(r, k % 2 == 0 ? (11.0 - kEps / 3.0) / 2.0 : (11.0 + kEps / 3.0) / 2.0, 1e-12);
    const auto [fp, fm] = branch_slopes_fd(st, t0);
    EXPECT_NEAR(fp, mp, 1e-4);
    EXPECT_NEAR(fm, mm, 1e-4);
    const auto [left, right] = splice_slopes_fd(st, t0);
    EXPECT_NEAR(left, -std::abs(mm), 1e-4);
    EXPECT_NEAR(right, std::abs(mm), 1e-4);
    EXPECT_NEAR(right - left, 2.0 * std::abs(mm), 1e-4);
    const auto [rxx, noise] = radius_second_derivative(st, t0);
    EXPECT_NEAR(rxx, mm, 1e-4);
  }
}

TEST(OneSidedSlopes, NotCritical) {
  try {
    one_sided_slopes(sin3_table(), 0.2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotACriticalPoint);
  }
}

TEST(Transversality, SinThreeAtZero) {
  const StringTable st = sin3_table();
  const SingularPoint sp = transversality(st, 0.0);
  EXPECT_NEAR(sp.sddot, -0.015 * (1.0 + 0.06 / (11.0 - kEps / 3.0)), 1e-12);
  EXPECT_NEAR(sp.sddot, -1.509e-2, 1e-5);
  EXPECT_EQ(sp.cls, SingularClass::Transversal);
  EXPECT_GT(sp.r_xixi, 0.0);
  EXPECT_NEAR(sp.r_xixi, -sp.sddot / std::pow(st.speed(0.0), 2), 1e-7);
  EXPECT_LT(sp.slope_left, sp.slope_right);
}

TEST(Transversality, AccumulationTargetIsTangential) {
  const StringTable st = bump_table(accumulation_spec(), Variant::Transversal, 0.2);
  const SingularPoint sp = transversality(st, 1.2);
  EXPECT_EQ(sp.cls, SingularClass::Tangential);
  EXPECT_EQ(sp.sddot, 0.0);
}

TEST(Transversality, FlatVariantIsTangential) {
  DirectionSetSpec spec;
  spec.isolated = {0.3, 1.4, 2.2};
  const StringTable st = bump_table(spec, Variant::Flat, 0.05);
  for (double t : {0.3, 1.4, 2.2}) EXPECT_EQ(transversality(st, t).cls, SingularClass::Tangential);
}

TEST(SingularPoints, SinThree) {
  const SingularSet ss = singular_points(sin3_table());
  EXPECT_FALSE(ss.continuum);
  ASSERT_EQ(ss.points.size(), 6u);
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(ss.points[k].t0, k * kPi / 3.0, 1e-9);
  EXPECT_NEAR(ss.min_gap, kPi / 3.0, 1e-9);
}

TEST(SingularPoints, Circle) {
  const SingularSet ss = singular_points(circle_table());
  EXPECT_TRUE(ss.continuum);
  EXPECT_TRUE(ss.points.empty());
}

TEST(SingularPoints, Interval) {
  DirectionSetSpec spec;
  spec.intervals = {{0.2, 0.4}};
  spec.isolated = {1.5, 2.5};
  const SingularSet ss = singular_points(bump_table(spec, Variant::Transversal, 0.02));
  EXPECT_TRUE(ss.continuum);
  EXPECT_EQ(ss.points.size(), 4u);
  int ends = 0;
  for (const auto& p : ss.degenerate) ends += p.cls == SingularClass::ContinuumBoundary;
  EXPECT_EQ(ends, 4);
}

TEST(SingularPoints, AccumulationGapsHalve) {
  const SingularSet ss = singular_points(bump_table(accumulation_spec(), Variant::Transversal, 0.2));
  ASSERT_EQ(ss.points.size(), 24u);
  EXPECT_GT(ss.min_gap, 0.0);
  // distances to the target modulo pi; each node shows up once per half-turn
  std::vector<double> chain;
  for (const auto& p : ss.points) {
    const double d = std::fmod(1.2 - p.t0 + 4.0 * kPi, kPi);
    if (d < 1.3) chain.push_back(d);
  }
  ASSERT_EQ(chain.size(), 24u);
  std::sort(chain.begin(), chain.end(), std::greater<>());
  for (std::size_t i = 0; i < 24; i += 2) EXPECT_NEAR(chain[i], chain[i + 1], 1e-12);
  for (std::size_t i = 0; i + 4 < chain.size(); i += 2) {
    const double ratio = (chain[i + 2] - chain[i + 4]) / (chain[i] - chain[i + 2]);
    EXPECT_NEAR(ratio, 0.5, 0.1);
  }
}

TEST(SplicedCurve, SmoothAwayFromSingularPoints) {
  const StringTable st = sin3_table();
  const CurveSample cs = sample_curves(st, 4096);
  const double h = kTwoPi / 4096;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < cs.t.size(); ++i) {
    bool near = false;
    for (double c : cs.crossings) near = near || std::abs(cs.t[i] - c) < 2.0 * h;
    if (near) continue;
    worst = std::max(worst, std::abs(cs.splice[i + 1] - 2.0 * cs.splice[i] + cs.splice[i - 1]) / (h * h));
  }
  EXPECT_LT(worst, 0.1);
}

TEST(Export, SingularJson) {
  const auto j = to_json(singular_points(sin3_table()));
  ASSERT_EQ(j["points"].size(), 6u);
  EXPECT_EQ(j["points"][0]["class"], "transversal");
  EXPECT_EQ(j["points"][0]["slopes"].size(), 2u);
}
