#pragma once

// Special-function primitives: log-gamma, Gegenbauer polynomials, the Gauss
// hypergeometric function on [0,1], real spherical harmonics for N = 2, 3 and
// the harmonic multiplicity h(m, N).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mfbm/error.hpp"

namespace mfbm {

/// ln|Γ(x)| together with the sign of Γ(x).
struct LogGamma {
  double value = 0.0;
  int sign = 1;
};

namespace detail {

inline bool is_nonpositive_integer(double x) {
  return x <= 0.0 && x == std::nearbyint(x);
}

// Lanczos approximation, g = 7, nine coefficients; valid for x >= 0.5.
inline double lanczos_log_gamma(double x) {
  static constexpr std::array<double, 9> kCoeff = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double kG = 7.0;
  const double xm1 = x - 1.0;
  double series = kCoeff[0];
  for (std::size_t i = 1; i < kCoeff.size(); ++i) {
    series += kCoeff[i] / (xm1 + static_cast<double>(i));
  }
  const double t = xm1 + kG + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (xm1 + 0.5) * std::log(t) - t +
         std::log(series);
}

}  // namespace detail

/// ln|Γ(x)| and sign(Γ(x)). Throws DomainError at the poles x = 0, -1, -2, ...
inline LogGamma log_gamma(double x) {
  if (!std::isfinite(x)) {
    throw DomainError("log_gamma: non-finite argument");
  }
  if (detail::is_nonpositive_integer(x)) {
    throw DomainError("log_gamma: pole at non-positive integer " + std::to_string(x));
  }
  if (x >= 0.5) {
    return {detail::lanczos_log_gamma(x), 1};
  }
  // Reflection: Γ(x)Γ(1-x) = π / sin(πx); Γ(1-x) > 0 here.
  const double s = std::sin(std::numbers::pi * x);
  return {std::log(std::numbers::pi / std::abs(s)) - detail::lanczos_log_gamma(1.0 - x),
          s > 0.0 ? 1 : -1};
}

/// Π Γ(num_i) / Π Γ(den_j), accumulated in log space with sign tracking.
/// A pole in the denominator makes the quotient zero; a pole in the numerator
/// is a domain error.
inline double gamma_quotient(std::initializer_list<double> num,
                             std::initializer_list<double> den) {
  for (double d : den) {
    if (detail::is_nonpositive_integer(d)) return 0.0;
  }
  double log_sum = 0.0;
  int sign = 1;
  for (double a : num) {
    const LogGamma lg = log_gamma(a);
    log_sum += lg.value;
    sign *= lg.sign;
  }
  for (double d : den) {
    const LogGamma lg = log_gamma(d);
    log_sum -= lg.value;
    sign *= lg.sign;
  }
  return sign * std::exp(log_sum);
}

/// Gegenbauer polynomial C_m^λ(t) by the three-term recurrence.
///
/// For λ = 0 the standard polynomials vanish identically for m ≥ 1; this
/// function returns the normalized limit lim_{λ→0} C_m^λ(t)/λ = (2/m) T_m(t)
/// instead (and 1 for m = 0), so that ratios against the value at t = 1 stay
/// meaningful. Prefer gegenbauer_ratio when a ratio is what is needed.
inline double gegenbauer(int m, double lambda, double t) {
  if (m < 0) throw DomainError("gegenbauer: degree must be >= 0");
  if (lambda < 0.0) throw DomainError("gegenbauer: lambda must be >= 0");
  if (m == 0) return 1.0;
  if (lambda == 0.0) {
    double tm1 = 1.0;
    double tk = t;
    for (int k = 2; k <= m; ++k) {
      const double next = 2.0 * t * tk - tm1;
      tm1 = tk;
      tk = next;
    }
    return 2.0 * tk / m;
  }
  double cm1 = 1.0;
  double ck = 2.0 * lambda * t;
  for (int k = 2; k <= m; ++k) {
    const double next = (2.0 * t * (k + lambda - 1.0) * ck - (k + 2.0 * lambda - 2.0) * cm1) / k;
    cm1 = ck;
    ck = next;
  }
  return ck;
}

/// C_m^λ(t) / C_m^λ(1); equals the Chebyshev polynomial T_m(t) when λ = 0.
inline double gegenbauer_ratio(int m, double lambda, double t) {
  // C_m^λ(1) = (2λ)_m / m!, and the λ→0 convention above gives C_m^0(1) = 2/m.
  return gegenbauer(m, lambda, t) / gegenbauer(m, lambda, 1.0);
}

namespace detail {

inline double hyp2f1_power_series(double a, double b, double c, double z) {
  if (is_nonpositive_integer(c)) {
    throw DomainError("gauss_2f1: c is a non-positive integer");
  }
  constexpr int kMaxTerms = 200000;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < kMaxTerms; ++k) {
    const double ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    term *= ratio;
    sum += term;
    if (term == 0.0) return sum;
    if (std::abs(term) <= 0.25 * kEps * std::abs(sum) && std::abs(ratio) < 1.0) {
      return sum;
    }
  }
  throw NumericError("gauss_2f1: power series did not converge (z=" + std::to_string(z) + ")");
}

// Linear transformation to 1 - z for non-integer c - a - b.
inline double hyp2f1_one_minus_z(double a, double b, double c, double z) {
  const double w = 1.0 - z;
  const double s = c - a - b;
  double result = 0.0;
  const double front = gamma_quotient({c, s}, {c - a, c - b});
  if (front != 0.0) result += front * hyp2f1_power_series(a, b, 1.0 - s, w);
  const double back = gamma_quotient({c, -s}, {a, b});
  if (back != 0.0) result += back * std::pow(w, s) * hyp2f1_power_series(c - a, c - b, s + 1.0, w);
  return result;
}

}  // namespace detail

/// Threshold above which gauss_2f1 switches from the direct series to the
/// 1 - z transformation. The transformation cancels badly for large a, b
/// (about 1e-7 relative at a, b ≈ 8, z = 0.75), while the series stays at
/// rounding level up to z ≈ 0.999 and needs only a few thousand terms at 0.99.
inline constexpr double kHyp2f1SwitchPoint = 0.99;

/// Distance of c - a - b to an integer below which the transformation is
/// treated as degenerate.
inline constexpr double kHyp2f1DegenerateGap = 1e-6;

/// Direct power series of ₂F₁(a, b; c; z). Slow near z = 1.
inline double hyp2f1_series(double a, double b, double c, double z) {
  return detail::hyp2f1_power_series(a, b, c, z);
}

/// ₂F₁ through the 1 - z linear transformation. When c - a - b sits within
/// kHyp2f1DegenerateGap of an integer the transformation is evaluated at four
/// shifted b values (c - a - b = k ± 1e-3, k ± 2e-3) and interpolated back to
/// the requested b. The step balances interpolation error against the
/// cancellation in the transformation: about 1e-10 relative for the kernel's
/// parameters (m ≤ 8).
inline double hyp2f1_reflected(double a, double b, double c, double z) {
  const double s = c - a - b;
  const double k = std::nearbyint(s);
  if (std::abs(s - k) >= kHyp2f1DegenerateGap) {
    return detail::hyp2f1_one_minus_z(a, b, c, z);
  }
  constexpr double kStep = 1e-3;
  static constexpr std::array<double, 4> kOffsets = {-2.0 * kStep, -kStep, kStep, 2.0 * kStep};
  // Shift b by t_j so that c - a - (b + t_j) = k + offset_j; target is t = 0.
  std::array<double, 4> shifts{};
  std::array<double, 4> values{};
  for (std::size_t j = 0; j < 4; ++j) {
    shifts[j] = (s - k) - kOffsets[j];
    values[j] = detail::hyp2f1_one_minus_z(a, b + shifts[j], c, z);
  }
  double result = 0.0;
  for (std::size_t j = 0; j < 4; ++j) {
    double basis = 1.0;
    for (std::size_t i = 0; i < 4; ++i) {
      if (i != j) basis *= (0.0 - shifts[i]) / (shifts[j] - shifts[i]);
    }
    result += basis * values[j];
  }
  return result;
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for real parameters and
/// z ∈ [0, 1]. Direct series for z ≤ kHyp2f1SwitchPoint, 1 - z transformation above, Gauss
/// summation at z = 1 (requires c - a - b > 0).
inline double gauss_2f1(double a, double b, double c, double z) {
  if (!(z >= 0.0 && z <= 1.0)) {
    throw DomainError("gauss_2f1: z must lie in [0,1], got " + std::to_string(z));
  }
  if (detail::is_nonpositive_integer(c)) {
    throw DomainError("gauss_2f1: c is a non-positive integer");
  }
  if (z == 0.0 || a == 0.0 || b == 0.0) return 1.0;
  const bool terminating = detail::is_nonpositive_integer(a) || detail::is_nonpositive_integer(b);
  if (terminating || z <= kHyp2f1SwitchPoint) {
    return detail::hyp2f1_power_series(a, b, c, z);
  }
  if (z == 1.0) {
    if (c - a - b <= 0.0) {
      throw DomainError("gauss_2f1: divergent at z=1 with c-a-b <= 0");
    }
    return gamma_quotient({c, c - a - b}, {c - a, c - b});
  }
  return hyp2f1_reflected(a, b, c, z);
}

/// Number h(m, N) of linearly independent degree-m spherical harmonics on
/// S^{N-1}: C(m+N-1, N-1) - C(m+N-3, N-1). Equal to 1 for m = 0.
inline std::uint64_t multiplicity(int m, int N) {
  if (N < 2) throw DomainError("multiplicity: dimension must be >= 2");
  if (m < 0) throw DomainError("multiplicity: degree must be >= 0");
  auto binom = [](std::int64_t n, std::int64_t k) -> std::uint64_t {
    if (n < k || k < 0) return 0;
    std::uint64_t result = 1;
    for (std::int64_t i = 1; i <= k; ++i) {
      result = result * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return result;
  };
  return binom(m + N - 1, N - 1) - binom(m + N - 3, N - 1);
}

/// Spherical coordinates of a direction: azimuth φ ∈ [0, 2π) and N-2 polar
/// angles ϑ ∈ [0, π].
struct AngleCoords {
  double phi = 0.0;
  std::vector<double> thetas;

  void validate(int N) const {
    if (static_cast<int>(thetas.size()) != N - 2) {
      throw DomainError("AngleCoords: expected " + std::to_string(N - 2) + " polar angles");
    }
    if (!(phi >= 0.0 && phi < 2.0 * std::numbers::pi)) {
      throw DomainError("AngleCoords: phi outside [0, 2pi)");
    }
    for (double t : thetas) {
      if (!(t >= 0.0 && t <= std::numbers::pi)) {
        throw DomainError("AngleCoords: theta outside [0, pi]");
      }
    }
  }
};

/// Angles of a nonzero vector in R^2 or R^3. For N = 3 the polar angle is
/// measured from the third axis.
inline AngleCoords angles_of(std::span<const double> x) {
  const std::size_t N = x.size();
  if (N != 2 && N != 3) {
    throw DomainError("angles_of: dimension not supported for synthesis");
  }
  AngleCoords a;
  a.phi = std::atan2(x[1], x[0]);
  if (a.phi < 0.0) a.phi += 2.0 * std::numbers::pi;
  if (a.phi >= 2.0 * std::numbers::pi) a.phi = 0.0;
  if (N == 3) {
    const double rho = std::hypot(x[0], x[1]);
    a.thetas.push_back(std::atan2(rho, x[2]));
  }
  return a;
}

namespace detail {

// Associated Legendre function of degree `deg`, order `ord` normalized so that
// ∫_{-1}^{1} P̄² dx = 1 (no Condon-Shortley phase). sin_theta = √(1-x²).
inline double normalized_assoc_legendre(int deg, int ord, double x, double sin_theta) {
  double pmm = std::sqrt(0.5);
  for (int k = 1; k <= ord; ++k) {
    pmm *= std::sqrt((2.0 * k + 1.0) / (2.0 * k)) * sin_theta;
  }
  if (deg == ord) return pmm;
  double pm1 = std::sqrt(2.0 * ord + 3.0) * x * pmm;
  if (deg == ord + 1) return pm1;
  double pm2 = pmm;
  for (int n = ord + 2; n <= deg; ++n) {
    const double nn = static_cast<double>(n);
    const double a = std::sqrt((4.0 * nn * nn - 1.0) / (nn * nn - ord * ord));
    const double b = std::sqrt(((nn - 1.0) * (nn - 1.0) - ord * ord) / (4.0 * (nn - 1.0) * (nn - 1.0) - 1.0));
    const double p = a * (x * pm1 - b * pm2);
    pm2 = pm1;
    pm1 = p;
  }
  return pm1;
}

}  // namespace detail

/// All h(m, N) real degree-m harmonics at a direction, orthonormal in
/// L²(S^{N-1}, dS) with the un-normalized surface measure.
///
/// Index order (l = 1, 2, ...):
///   N = 2: m = 0 → 1/√(2π); m ≥ 1 → cos(mφ)/√π, sin(mφ)/√π.
///   N = 3: order 0 first, then cos/sin pairs for orders k = 1..m, each
///          multiplied by the normalized associated Legendre function.
inline std::vector<double> sph_harm_all(int N, int m, const AngleCoords& angles) {
  if (N != 2 && N != 3) {
    throw DomainError("sph_harm: dimension not supported for synthesis (N=" + std::to_string(N) + ")");
  }
  if (m < 0) throw DomainError("sph_harm: degree must be >= 0");
  angles.validate(N);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(multiplicity(m, N)));
  if (N == 2) {
    if (m == 0) {
      out.push_back(inv_sqrt_2pi);
    } else {
      out.push_back(std::cos(m * angles.phi) * inv_sqrt_pi);
      out.push_back(std::sin(m * angles.phi) * inv_sqrt_pi);
    }
    return out;
  }
  const double theta = angles.thetas[0];
  const double x = std::cos(theta);
  const double st = std::sin(theta);
  out.push_back(detail::normalized_assoc_legendre(m, 0, x, st) * inv_sqrt_2pi);
  for (int k = 1; k <= m; ++k) {
    const double p = detail::normalized_assoc_legendre(m, k, x, st) * inv_sqrt_pi;
    out.push_back(p * std::cos(k * angles.phi));
    out.push_back(p * std::sin(k * angles.phi));
  }
  return out;
}

/// Single real spherical harmonic S^l_m, 1 ≤ l ≤ h(m, N).
inline double sph_harm(int N, int m, int l, const AngleCoords& angles) {
  if (N != 2 && N != 3) {
    throw DomainError("sph_harm: dimension not supported for synthesis (N=" + std::to_string(N) + ")");
  }
  const auto h = static_cast<int>(multiplicity(m, N));
  if (l < 1 || l > h) {
    throw DomainError("sph_harm: index l out of range 1.." + std::to_string(h));
  }
  return sph_harm_all(N, m, angles)[static_cast<std::size_t>(l - 1)];
}

}  // namespace mfbm
