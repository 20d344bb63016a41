#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "mfbm/limits.hpp"

using namespace mfbm;

namespace {

const std::shared_ptr<const ModeBasis>& basis() {
  static const auto b = std::make_shared<const ModeBasis>(build_mode_basis({2, 0.5}, {4, 8}, 32));
  return b;
}

const RkhsProjector& projector() {
  static const RkhsProjector p(basis(), 16);
  return p;
}

FieldFn linear_field() {
  return [](std::span<const double> x) { return 0.3 * x[0] - 0.2 * x[1]; };
}

}  // namespace

TEST(Examples, NormalizationFunctions) {
  EXPECT_NEAR(example_h(Example::local_lil, std::exp(-std::exp(2.0)), 2), 2.0, 1e-14);
  EXPECT_NEAR(example_h(Example::global_lil, std::exp(std::exp(1.0)), 2), 1.0, 1e-14);
  EXPECT_NEAR(example_h(Example::levy, 0.25, 2), 2 * std::log(4.0), 1e-14);
  EXPECT_THROW(example_h(Example::local_lil, 0.5, 2), DomainError);
  EXPECT_THROW(example_h(Example::global_lil, 2.0, 2), DomainError);
  EXPECT_THROW(example_h(Example::levy, 1.0, 2), DomainError);
  EXPECT_EQ(parse_example("global_lil"), Example::global_lil);
  EXPECT_THROW(parse_example("brownian"), ConfigError);
}

TEST(Examples, LevyLabelsRespectConstraint) {
  const auto labels = levy_labels(0.5, 2);
  ASSERT_FALSE(labels.empty());
  for (const Point& y : labels) EXPECT_LE(std::hypot(y[0], y[1]), 0.5 + 1e-12);
  // spacing u/2 = 0.25: (0,0), (±0.25,0), (0,±0.25), (±0.5,0), (0,±0.5), (±0.25,±0.25)
  EXPECT_EQ(labels.size(), 13u);
}

TEST(Examples, ConditionAudit) {
  EXPECT_TRUE(h_increasing(Example::local_lil, {0.3, 0.1, 0.03, 0.01, 0.003}, 2));
  EXPECT_TRUE(h_increasing(Example::global_lil, {5, 10, 20, 40, 80}, 2));
  EXPECT_TRUE(h_increasing(Example::levy, {0.125, 0.0625, 0.03125}, 2));
  EXPECT_DOUBLE_EQ(critical_exponent(example_asymptotics(Example::local_lil, 2)), 1.0);
  EXPECT_DOUBLE_EQ(critical_exponent(example_asymptotics(Example::global_lil, 3)), 1.0);
  EXPECT_DOUBLE_EQ(critical_exponent(example_asymptotics(Example::levy, 2)), 1.0);
  EXPECT_DOUBLE_EQ(critical_exponent(example_asymptotics(Example::levy, 3)), 1.0);
}

TEST(Cloud, MembersVanishAtOriginAndMatchFormula) {
  const ModelParams p{2, 0.5};
  const SpectralField f(p, Band{}, FrequencyGrid{64}, 3, 0);
  const FieldFn fn = [&](std::span<const double> x) { return f.value(x); };
  const std::vector<Point> eval{{0.0, 0.0}, {0.5, 0.5}, {-1.0, 0.0}};
  const double u = 0.25;
  const IncrementCloud c = build_cloud({Example::levy, p}, u, fn, eval);
  EXPECT_EQ(c.members.size(), levy_labels(u, 2).size());
  const double denom = std::sqrt(2 * 2 * std::log(4.0)) * std::sqrt(u);
  EXPECT_DOUBLE_EQ(c.denominator, denom);
  for (const CloudMember& m : c.members) {
    EXPECT_EQ(m.values[0], 0.0);
    const Point z{m.y[0] + u * 0.5, m.y[1] + u * 0.5};
    EXPECT_EQ(m.values[1], (f.value(z) - f.value(m.y)) / denom);
  }
}

TEST(Cloud, GlobalRescalingAndCoverage) {
  const ModelParams p{2, 0.5};
  const std::vector<Point> eval{{1.0, 0.0}};
  const IncrementCloud c = build_cloud({Example::global_lil, p, 80.0}, 20.0, linear_field(), eval);
  ASSERT_EQ(c.members.size(), 1u);
  // η = T^H f(t x / T) / (√(2h) t^H) with f linear
  const double expect = std::sqrt(80.0) * 0.3 * 0.25 / (std::sqrt(2 * std::log(std::log(20.0))) * std::sqrt(20.0));
  EXPECT_NEAR(c.members[0].values[0], expect, 1e-15);
  EXPECT_THROW(build_cloud({Example::global_lil, p, 10.0}, 20.0, linear_field(), eval), CoverageError);
  const std::vector<Point> outside{{1.5, 0.0}};
  EXPECT_THROW(build_cloud({Example::levy, p}, 0.5, linear_field(), outside), CoverageError);
}

TEST(Cloud, MemberVarianceMatchesCovarianceLevel) {
  // local example, single member: E η(x)² = ‖x‖^{2H}/(2h) for the band the
  // sampler covers
  const ModelParams p{2, 0.5};
  const double u = 0.1;
  const Point x{0.5, 0.0};
  const std::vector<Point> eval{x};
  FrequencyGrid g;
  g.shells = 64;
  const int R = 600;
  double s2 = 0, s4 = 0;
  for (int k = 0; k < R; ++k) {
    const SpectralField f(p, Band{}, g, 77, k);
    const FieldFn fn = [&](std::span<const double> z) { return f.value(z); };
    const double v = build_cloud({Example::local_lil, p}, u, fn, eval).members[0].values[0];
    s2 += v * v;
    s4 += v * v * v * v;
  }
  const double m = s2 / R, se = std::sqrt((s4 / R - m * m) / R);
  const auto [lo, hi] = effective_band(Band{}, g);
  const double h = example_h(Example::local_lil, u, 2);
  const double expect = spectral_variance(p, {lo, hi}, u * 0.5) / (2 * h * u);
  EXPECT_NEAR(m, expect, 5 * se);
  EXPECT_NEAR(expect, 0.5 / (2 * h), 0.05 * 0.5 / (2 * h));
}

TEST(Attract, ZeroAndInsideMembers) {
  const RkhsProjector& P = projector();
  IncrementCloud zero;
  zero.members.push_back({Point{0, 0}, 0.1, std::vector<double>(P.grid().size(), 0.0)});
  AttractStat a = attract_stat(zero, P);
  EXPECT_EQ(a.excess, 0.0);
  EXPECT_EQ(a.supdist, 0.0);

  const RkhsFunction rep = representer(basis(), Point{0.4, 0.3});
  const RkhsFunction half{basis(), 0.5 * rep.coeffs / strassen_norm(rep)};
  IncrementCloud inside;
  inside.members.push_back({Point{0, 0}, 0.1, synthesize(P, half)});
  a = attract_stat(inside, P);
  EXPECT_EQ(a.excess, 0.0);
  EXPECT_EQ(a.supdist, 0.0);
}

TEST(Attract, SurrogateSandwichAndOrderIndependence) {
  const RkhsProjector& P = projector();
  const RkhsFunction rep = representer(basis(), Point{0.6, -0.2});
  IncrementCloud c;
  for (double s : {0.3, 2.5, 0.9, 1.7, 0.1}) {
    c.members.push_back({Point{0, 0}, 0.1, synthesize(P, RkhsFunction{basis(), s * rep.coeffs / strassen_norm(rep)})});
  }
  const AttractStat a = attract_stat(c, P);
  EXPECT_NEAR(a.excess, 1.5, 1e-9);
  EXPECT_GT(a.supdist, 0.0);
  EXPECT_NEAR(a.excess_median, 0.0, 1e-12);
  std::reverse(c.members.begin(), c.members.end());
  const AttractStat b = attract_stat(c, P);
  EXPECT_NEAR(b.excess, a.excess, 1e-14);
  EXPECT_NEAR(b.supdist, a.supdist, 1e-14);
  for (const CloudMember& m : c.members) {
    IncrementCloud one;
    one.members.push_back(m);
    const AttractStat s = attract_stat(one, P);
    if (s.excess == 0.0) {
      EXPECT_EQ(s.supdist, 0.0);
    }
  }
}

TEST(Enter, TargetsAndErrors) {
  const RkhsProjector& P = projector();
  const RkhsFunction rep = representer(basis(), Point{0.5, 0.0});
  const RkhsFunction target{basis(), 0.7 * rep.coeffs / strassen_norm(rep)};
  IncrementCloud c;
  c.members.push_back({Point{0, 0}, 0.1, synthesize(P, RkhsFunction{basis(), 0.2 * rep.coeffs})});
  c.members.push_back({Point{0, 0}, 0.1, synthesize(P, target)});
  EXPECT_NEAR(enter_stat(c, P, target), 0.0, 1e-15);
  auto sup_of = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  const double s0 = sup_of(c.members[0].values), s1 = sup_of(c.members[1].values);
  EXPECT_NEAR(enter_stat(c, P, zero_function(basis())), std::min(s0, s1), 1e-15);
  EXPECT_EQ(functional_sup(c), std::max(s0, s1));
  const RkhsFunction big{basis(), 1.2 * rep.coeffs / strassen_norm(rep)};
  EXPECT_THROW(enter_stat(c, P, big), DomainError);
}

TEST(Modulus, DeterministicFields) {
  const ModelParams p{2, 0.5};
  LatticeField constant{CartesianGrid{21}, std::vector<double>(21 * 21, 3.0)};
  EXPECT_EQ(modulus_statistic(constant, 0.1, p), 0.0);
  LatticeField coord{CartesianGrid{21}, {}};
  for (int i = 0; i < 21; ++i) {
    for (int j = 0; j < 21; ++j) coord.values.push_back(coord.grid.coord(i));
  }
  EXPECT_NEAR(modulus_statistic(coord, 0.1, p), 0.1 / (std::sqrt(4 * std::log(10.0)) * std::sqrt(0.1)), 1e-12);
  EXPECT_NEAR(modulus_statistic(coord, 0.1, p), 0.1042, 5e-5);
  EXPECT_THROW(modulus_statistic(coord, 0.013, p), ResolutionError);
}

TEST(Campaign, RowsInScheduleOrderWithRunningMinimum) {
  const ModelParams p{2, 0.5};
  const SpectralField f(p, Band{}, FrequencyGrid{64}, 5, 0);
  const FieldFn fn = [&](std::span<const double> x) { return f.value(x); };
  const RkhsFunction rep = representer(basis(), Point{0.5, 0.0});
  const RkhsFunction target{basis(), 0.7 * rep.coeffs / strassen_norm(rep)};
  const std::vector<double> sched{0.3, 0.1, 0.03, 0.01, 0.003};
  const auto rows = run_campaign({Example::local_lil, p}, sched, fn, projector(), target);
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].scale, sched[i]);
    EXPECT_EQ(rows[i].stats.members, 1u);
    if (i) {
      EXPECT_LE(rows[i].enter_running_min, rows[i - 1].enter_running_min);
    }
    EXPECT_GE(rows[i].stats.attract_excess, 0.0);
  }
}
