#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#if defined(__GNUC__) && !defined(__clang__) && defined(__SIZEOF_FLOAT128__)
#define MFBM_HAVE_FLOAT128 1
#include <quadmath.h>
#endif

#include "mfbm/error.hpp"

namespace mfbm {

/// Quadrature nodes and weights on some interval.
template <class Real>
struct GaussRule {
  std::vector<Real> nodes;
  std::vector<Real> weights;
};

namespace detail {

// Minimal math shims so the same Newton iteration serves double and the
// quad-precision oracle type.
inline double rcos(double x) { return std::cos(x); }
inline double rsin(double x) { return std::sin(x); }
inline double rabs(double x) { return std::abs(x); }
inline double rpow(double x, double y) { return std::pow(x, y); }
inline double rsqrt(double x) { return std::sqrt(x); }
template <class Real>
Real rpi() {
  return static_cast<Real>(std::numbers::pi);
}

#ifdef MFBM_HAVE_FLOAT128
using quad_t = __float128;
inline quad_t rcos(quad_t x) { return cosq(x); }
inline quad_t rsin(quad_t x) { return sinq(x); }
inline quad_t rabs(quad_t x) { return fabsq(x); }
inline quad_t rpow(quad_t x, quad_t y) { return powq(x, y); }
inline quad_t rsqrt(quad_t x) { return sqrtq(x); }
template <>
inline quad_t rpi<quad_t>() {
  return 4 * atanq(quad_t(1));
}
#else
using quad_t = long double;
inline long double rcos(long double x) { return std::cos(x); }
inline long double rsin(long double x) { return std::sin(x); }
inline long double rabs(long double x) { return std::abs(x); }
inline long double rpow(long double x, long double y) { return std::pow(x, y); }
inline long double rsqrt(long double x) { return std::sqrt(x); }
template <>
inline long double rpi<long double>() {
  return 3.141592653589793238462643383279502884L;
}
#endif

}  // namespace detail

/// Gauss–Legendre rule with n points on [-1, 1], computed by Newton iteration
/// on the Legendre three-term recurrence in the working precision Real.
template <class Real = double>
GaussRule<Real> gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need at least one node");
  GaussRule<Real> rule;
  rule.nodes.assign(static_cast<std::size_t>(n), Real(0));
  rule.weights.assign(static_cast<std::size_t>(n), Real(0));
  const Real one(1);
  const Real two(2);
  const Real tol = static_cast<Real>(sizeof(Real) > 8 ? 1e-30 : 1e-15);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Real x = detail::rcos(detail::rpi<Real>() * (Real(i) + Real(0.75)) / (Real(n) + Real(0.5)));
    Real dp(0);
    for (int iter = 0; iter < 100; ++iter) {
      Real p0 = one;
      Real p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Real p2 = ((two * Real(k) - one) * x * p1 - (Real(k) - one) * p0) / Real(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = one;
      dp = Real(n) * (x * p1 - p0) / (x * x - one);
      const Real dx = p1 / dp;
      x -= dx;
      if (detail::rabs(dx) <= tol) {
        // one more refresh of dp at the converged node
        p0 = one;
        p1 = x;
        for (int k = 2; k <= n; ++k) {
          const Real p2 = ((two * Real(k) - one) * x * p1 - (Real(k) - one) * p0) / Real(k);
          p0 = p1;
          p1 = p2;
        }
        dp = Real(n) * (x * p1 - p0) / (x * x - one);
        break;
      }
    }
    const Real w = two / ((one - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = Real(0);
  return rule;
}

/// Gauss–Legendre rule mapped to [a, b].
template <class Real = double>
GaussRule<Real> gauss_legendre(int n, Real a, Real b) {
  GaussRule<Real> rule = gauss_legendre<Real>(n);
  const Real half = (b - a) / Real(2);
  const Real mid = (b + a) / Real(2);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

/// Breakpoints of a panel partition of [a, b] refined geometrically toward
/// the chosen endpoints (ratio `ratio`, `levels` refinements per end).
inline std::vector<double> graded_breakpoints(double a, double b, bool grade_a, bool grade_b,
                                              int levels = 18, double ratio = 0.2) {
  if (!(b > a)) return {a, b};
  if (grade_a && grade_b) {
    const double mid = 0.5 * (a + b);
    auto left = graded_breakpoints(a, mid, true, false, levels, ratio);
    const auto right = graded_breakpoints(mid, b, false, true, levels, ratio);
    left.pop_back();
    left.insert(left.end(), right.begin(), right.end());
    return left;
  }
  const double len = b - a;
  std::vector<double> pts{a};
  if (grade_a) {
    for (int k = levels; k >= 1; --k) pts.push_back(a + len * std::pow(ratio, k));
  }
  if (grade_b) {
    for (int k = 1; k <= levels; ++k) pts.push_back(b - len * std::pow(ratio, k));
  }
  pts.push_back(b);
  return pts;
}

/// Composite Gauss–Legendre integral of f over [a, b] with panels graded
/// geometrically toward the flagged endpoints; suited to integrands with
/// algebraic endpoint singularities or kinks.
template <class F>
double integrate_graded(F&& f, double a, double b, bool grade_a, bool grade_b, int order = 16) {
  if (b <= a) return 0.0;
  static thread_local int cached_order = -1;
  static thread_local GaussRule<double> cached;
  if (cached_order != order) {
    cached = gauss_legendre<double>(order);
    cached_order = order;
  }
  const std::vector<double> bp = graded_breakpoints(a, b, grade_a, grade_b);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    const double lo = bp[p];
    const double hi = bp[p + 1];
    if (hi <= lo) continue;
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double panel = 0.0;
    for (std::size_t i = 0; i < cached.nodes.size(); ++i) {
      panel += cached.weights[i] * f(mid + half * cached.nodes[i]);
    }
    total += half * panel;
  }
  return total;
}

}  // namespace mfbm
