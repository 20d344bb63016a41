#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "mfbm/rkhs.hpp"
#include "mfbm/rng.hpp"

using namespace mfbm;

namespace {

// One basis for the whole file; building it dominates the runtime.
const std::shared_ptr<const ModeBasis>& basis() {
  static const auto b = std::make_shared<const ModeBasis>(build_mode_basis({2, 0.5}, {6, 12}, 64));
  return b;
}

const RkhsProjector& projector() {
  static const RkhsProjector p(basis(), 32);
  return p;
}

RkhsFunction random_function(std::uint64_t seed, int modes) {
  RkhsFunction f = zero_function(basis());
  RngStream rng(seed, {9});
  for (int k = 0; k < modes; ++k) {
    const auto idx = static_cast<Eigen::Index>(rng.next_u64() % 40);
    f.coeffs(idx) = basis()->lambda(basis()->modes[static_cast<std::size_t>(idx)]) * (2 * rng.uniform() - 1);
  }
  return f;
}

}  // namespace

TEST(Rkhs, ZeroFunctionHasZeroNorm) {
  EXPECT_EQ(strassen_norm(zero_function(basis())), 0.0);
}

TEST(Rkhs, RepresenterNormIsVarianceRoot) {
  // ‖R(·,y)‖² = R(y,y) = ‖y‖^{2H}; ‖y‖ = 0.6 → 0.6. The truncated series
  // approaches it from below (about 5% short at (6,12)).
  const Point y{0.36, 0.48};
  const RkhsFunction r = representer(basis(), y);
  EXPECT_LE(inner_product(r, r), 0.6);
  EXPECT_GT(inner_product(r, r), 0.6 * 0.92);
}

TEST(Rkhs, ReproducingPropertyOnFiniteFunctions) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const RkhsFunction f = random_function(seed, 6);
    const Point y{0.3 * seed / 5.0, -0.4};
    EXPECT_NEAR(inner_product(f, representer(basis(), y)), evaluate(f, y), 1e-10);
  }
}

TEST(Rkhs, ParsevalOnGrid) {
  // synthesize then analyse returns the coefficients
  const RkhsFunction f = random_function(11, 8);
  const std::vector<double> v = synthesize(projector(), f);
  const RkhsFunction g = fourier_coeffs(projector(), v);
  EXPECT_NEAR((g.coeffs - f.coeffs).cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(Rkhs, CoefficientsOfCovarianceSliceMatchRepresenter) {
  const Point y0{0.5, 0.2};
  const ModelParams p{2, 0.5};
  const RkhsFunction a = fourier_coeffs(projector(), [&](std::span<const double> x) { return covariance(x, y0, p); });
  const RkhsFunction b = representer(basis(), y0);
  EXPECT_LT((a.coeffs - b.coeffs).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Rkhs, NormNondecreasingInTruncation) {
  const Point y{0.7, 0.1};
  double prev = 0.0;
  for (Truncation t : {Truncation{1, 4}, Truncation{2, 4}, Truncation{2, 8}, Truncation{4, 8}, Truncation{6, 12}}) {
    auto b = std::make_shared<const ModeBasis>(build_mode_basis({2, 0.5}, t, 48));
    const double n = strassen_norm(representer(b, y));
    EXPECT_GE(n, prev - 1e-12);
    prev = n;
  }
}

TEST(Rkhs, ProjectToBall) {
  const Point y{0.9, 0.0};
  RkhsFunction f = representer(basis(), y);
  f.coeffs *= 3.0;
  EXPECT_NEAR(strassen_norm(project_to_ball(f)), 1.0, 1e-12);
  const RkhsFunction small{basis(), f.coeffs * 0.1};
  EXPECT_EQ(project_to_ball(small).coeffs, small.coeffs);
}

TEST(Rkhs, CoefficientLookup) {
  const RkhsFunction f = representer(basis(), Point{0.2, 0.3});
  EXPECT_EQ(f.coeff(0, 1, 1), f.coeffs(0));
  EXPECT_THROW(f.coeff(7, 1, 1), DomainError);
}

TEST(Rkhs, ResolutionAndBasisErrors) {
  EXPECT_THROW(RkhsProjector(basis(), 8), ResolutionError);
  auto other = std::make_shared<const ModeBasis>(build_mode_basis({2, 0.5}, {1, 2}, 8));
  EXPECT_THROW(inner_product(zero_function(basis()), zero_function(other)), DomainError);
  const std::vector<double> wrong(3, 0.0);
  EXPECT_THROW(fourier_coeffs(projector(), wrong), DomainError);
}

TEST(Rkhs, FlooredModeRejectedByNorm) {
  // a kernel of rank one leaves every other mode on the floor
  std::vector<EigenSystem> systems;
  systems.push_back(mercer_decompose([](double r, double s) { return r * s; }, 16, 2));
  auto b = std::make_shared<const ModeBasis>(make_mode_basis({2, 0.5}, {0, 2}, systems));
  RkhsFunction f = zero_function(b);
  f.coeffs(1) = 1.0;
  EXPECT_THROW(strassen_norm(f), IllConditionedModeError);
}

TEST(Bernstein, Verdicts) {
  const std::vector<Truncation> sched{{1, 3}, {2, 6}, {4, 9}, {6, 12}};
  const ModelParams p{2, 0.5};
  const Point y0{0.5, 0.0};
  std::vector<double> cov, zero, rough;
  for (const Point& x : projector().grid().points) {
    cov.push_back(covariance(x, y0, p));
    zero.push_back(0.0);
    rough.push_back(std::pow(std::hypot(x[0], x[1]), 0.1));
  }
  EXPECT_EQ(bernstein_membership(projector(), zero, sched).verdict, Membership::converged);
  const MembershipReport c = bernstein_membership(projector(), cov, sched);
  EXPECT_EQ(c.verdict, Membership::converged);
  EXPECT_NEAR(c.limit, 0.5, 0.05);
  EXPECT_EQ(bernstein_membership(projector(), rough, sched).verdict, Membership::diverging);
  EXPECT_THROW(bernstein_membership(projector(), zero, {{1, 3}, {2, 6}}), DomainError);
}
