#pragma once

// Covariance of the multiparameter fractional Brownian field and its radial
// degree-m kernels b_m(r, s), evaluated two independent ways: a closed form
// through ₂F₁ and a quad-precision quadrature over the angle between x and y.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mfbm/error.hpp"
#include "mfbm/quadrature.hpp"
#include "mfbm/specfun.hpp"

namespace mfbm {

/// Dimension N and Hurst index H.
struct ModelParams {
  int N = 2;
  double H = 0.5;

  void validate() const {
    if (N < 1) throw DomainError("ModelParams: N must be >= 1, got " + std::to_string(N));
    if (!(H > 0.0 && H < 1.0)) {
      throw DomainError("ModelParams: H must lie in (0,1), got " + std::to_string(H));
    }
  }
};

/// Radial kernel of harmonic degree m.
struct RadialKernelSpec {
  ModelParams params;
  int m = 0;

  void validate() const {
    params.validate();
    if (m < 0) throw DomainError("RadialKernelSpec: m must be >= 0");
  }
};

/// R(x, y) = ½(‖x‖^{2H} + ‖y‖^{2H} − ‖x − y‖^{2H}).
inline double covariance(std::span<const double> x, std::span<const double> y,
                         const ModelParams& params) {
  if (x.size() != y.size()) throw DomainError("covariance: dimension mismatch");
  double nx = 0.0;
  double ny = 0.0;
  double nd = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    nx += x[i] * x[i];
    ny += y[i] * y[i];
    nd += (x[i] - y[i]) * (x[i] - y[i]);
  }
  const double H = params.H;
  return 0.5 * (std::pow(nx, H) + std::pow(ny, H) - std::pow(nd, H));
}

/// Covariance as a function of the radii r, s and the cosine t of the angle
/// between the two points.
inline double covariance_reduced(double r, double s, double t, const ModelParams& params) {
  if (r < 0.0 || s < 0.0) throw DomainError("covariance_reduced: negative radius");
  if (!(std::abs(t) <= 1.0)) throw DomainError("covariance_reduced: |t| > 1");
  if (r == 0.0 || s == 0.0) return 0.0;
  const double H = params.H;
  // (r - s)² + 2rs(1 - t) avoids cancellation when the points nearly coincide.
  const double d2 = (r - s) * (r - s) + 2.0 * r * s * (1.0 - t);
  return 0.5 * (std::pow(r, 2.0 * H) + std::pow(s, 2.0 * H) - std::pow(d2, H));
}

namespace detail {

// Panel breakpoints on [0, π]: geometric toward 0 down to π·ratio^levels,
// then `tail` equal panels on [π·ratio, π].
template <class Real>
std::vector<Real> angle_breakpoints(int levels, Real ratio, int tail) {
  const Real pi = rpi<Real>();
  std::vector<Real> bp{Real(0)};
  for (int k = levels; k >= 1; --k) bp.push_back(pi * rpow(ratio, Real(k)));
  const Real lo = pi * ratio;
  for (int j = 1; j <= tail; ++j) bp.push_back(lo + (pi - lo) * Real(j) / Real(tail));
  return bp;
}

}  // namespace detail

/// b_m(r, s) for every m = 0..m_max by quadrature over the angle θ between
/// the two points:
///
///   b_m = 2π^{(N−1)/2}/Γ((N−1)/2) ∫₀^π R(r, s, cos θ) C_m^λ(cos θ)/C_m^λ(1) sin^{N−2}θ dθ,
///
/// λ = (N−2)/2 (Chebyshev limit cos mθ for N = 2). Composite Gauss–Legendre
/// with `nodes` points per panel on panels graded toward θ = 0, where the
/// integrand has its |x − y|^{2H} singularity. Arithmetic is done in quad
/// precision so that tiny high-degree values survive the cancellation.
inline std::vector<double> kernel_quadrature_all(const ModelParams& params, int m_max, double r,
                                                 double s, int nodes = 24) {
  params.validate();
  if (params.N < 2) throw DomainError("kernel_quadrature: requires N >= 2");
  if (nodes < 2) throw DomainError("kernel_quadrature: quadrature size must be >= 2");
  if (m_max < 0) throw DomainError("kernel_quadrature: m_max must be >= 0");
  if (r < 0.0 || s < 0.0 || r > 1.0 || s > 1.0) {
    throw DomainError("kernel_quadrature: radii must lie in [0,1]");
  }
  std::vector<double> out(static_cast<std::size_t>(m_max + 1), 0.0);
  if (r == 0.0 || s == 0.0) return out;

  using Q = detail::quad_t;
  const int N = params.N;
  const Q H = static_cast<Q>(params.H);
  const Q qr = static_cast<Q>(r);
  const Q qs = static_cast<Q>(s);
  const Q half(0.5);
  const Q base = detail::rpow(qr, 2 * H) + detail::rpow(qs, 2 * H);
  const Q lambda = Q(N - 2) / Q(2);

  // C_k^λ(1) = (2λ)_k / k!
  std::vector<Q> at_one(static_cast<std::size_t>(m_max + 1), Q(1));
  for (int k = 1; k <= m_max; ++k) {
    at_one[static_cast<std::size_t>(k)] =
        at_one[static_cast<std::size_t>(k - 1)] * (2 * lambda + Q(k - 1)) / Q(k);
  }

  const GaussRule<Q> rule = gauss_legendre<Q>(nodes);
  const std::vector<Q> bp = detail::angle_breakpoints<Q>(40, Q(0.3), 8);
  std::vector<Q> acc(static_cast<std::size_t>(m_max + 1), Q(0));
  std::vector<Q> ratio(static_cast<std::size_t>(m_max + 1), Q(1));

  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    const Q hw = (bp[p + 1] - bp[p]) / 2;
    const Q mid = (bp[p + 1] + bp[p]) / 2;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const Q theta = mid + hw * rule.nodes[i];
      const Q sh = detail::rsin(theta / 2);
      const Q d2 = (qr - qs) * (qr - qs) + 4 * qr * qs * sh * sh;
      Q f = half * (base - detail::rpow(d2, H)) * hw * rule.weights[i];
      if (N == 2) {
        for (int k = 0; k <= m_max; ++k) ratio[static_cast<std::size_t>(k)] = detail::rcos(Q(k) * theta);
      } else {
        const Q t = detail::rcos(theta);
        f *= detail::rpow(detail::rsin(theta), Q(N - 2));
        Q cm1(1);
        Q ck = 2 * lambda * t;
        ratio[0] = Q(1);
        if (m_max >= 1) ratio[1] = ck / at_one[1];
        for (int k = 2; k <= m_max; ++k) {
          const Q next = (2 * t * (Q(k) + lambda - 1) * ck - (Q(k) + 2 * lambda - 2) * cm1) / Q(k);
          cm1 = ck;
          ck = next;
          ratio[static_cast<std::size_t>(k)] = ck / at_one[static_cast<std::size_t>(k)];
        }
      }
      for (int k = 0; k <= m_max; ++k) {
        acc[static_cast<std::size_t>(k)] += f * ratio[static_cast<std::size_t>(k)];
      }
    }
  }
  // 2π^{(N−1)/2}/Γ((N−1)/2) is the area of S^{N−2}; Γ at a positive
  // half-integer by upward recursion keeps it in quad precision.
  Q gamma_nm1 = N % 2 == 1 ? Q(1) : detail::rsqrt(detail::rpi<Q>());
  for (Q x = N % 2 == 1 ? Q(1) : half; x + Q(0.25) < Q(N - 1) / 2; x += 1) gamma_nm1 *= x;
  const Q pref = Q(2) * detail::rpow(detail::rpi<Q>(), Q(N - 1) / 2) / gamma_nm1;
  for (int k = 0; k <= m_max; ++k) {
    out[static_cast<std::size_t>(k)] = static_cast<double>(pref * acc[static_cast<std::size_t>(k)]);
  }
  return out;
}

/// Quadrature oracle for a single degree; see kernel_quadrature_all.
inline double kernel_quadrature(const RadialKernelSpec& spec, double r, double s, int nodes = 24) {
  spec.validate();
  return kernel_quadrature_all(spec.params, spec.m, r, s, nodes)[static_cast<std::size_t>(spec.m)];
}

/// Closed form
///
///   b_m = π^{N/2}/Γ(N/2+m) [δ_{m0}(r^{2H}+s^{2H})
///         − Γ(m−H)/Γ(−H) (z/4)^m (r+s)^{2H} ₂F₁(m+(N−1)/2, m−H; 2m+N−1; z)],
///
/// z = 4rs/(r+s)². `gamma_scale` multiplies Γ(m−H)/Γ(−H) and exists only for
/// fault injection; leave it at 1.
inline double kernel_closed_form(const RadialKernelSpec& spec, double r, double s,
                                 double gamma_scale = 1.0) {
  spec.validate();
  const int N = spec.params.N;
  const int m = spec.m;
  const double H = spec.params.H;
  if (N < 2) throw DomainError("kernel_closed_form: requires N >= 2");
  if (r < 0.0 || s < 0.0 || r > 1.0 || s > 1.0) {
    throw DomainError("kernel_closed_form: radii must lie in [0,1]");
  }
  if (r == 0.0 || s == 0.0) return 0.0;

  const double sum = r + s;
  const double z = r == s ? 1.0 : std::min(1.0, 4.0 * r * s / (sum * sum));
  // For m ≥ 1 the numerator is positive and Γ(−H) negative; gamma_quotient
  // carries the signs.
  const double gratio = gamma_quotient({m - H}, {-H}) * gamma_scale;
  const double f = gauss_2f1(m + 0.5 * (N - 1), m - H, 2.0 * m + N - 1, z);
  const double zm = std::pow(0.25 * z, m);
  double bracket = -gratio * zm * std::pow(sum, 2.0 * H) * f;
  if (m == 0) bracket += std::pow(r, 2.0 * H) + std::pow(s, 2.0 * H);
  const double log_pref = 0.5 * N * std::log(std::numbers::pi) - log_gamma(0.5 * N + m).value;
  return std::exp(log_pref) * bracket;
}

}  // namespace mfbm
