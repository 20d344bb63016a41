#pragma once

// Fourier coefficients in the basis ψ_mn(r) S^l_m(x̂), the Strassen norm
// Σ (f^l_mn)² / λ_mn and its inner product, representers of point
// evaluation, projection onto Strassen's ball, and a numerical membership
// test built on the coefficient criterion.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "mfbm/error.hpp"
#include "mfbm/field.hpp"
#include "mfbm/modes.hpp"
#include "mfbm/quadrature.hpp"
#include "mfbm/specfun.hpp"

namespace mfbm {

/// Coefficient table f^l_mn over a mode basis (stored in basis mode order).
struct RkhsFunction {
  std::shared_ptr<const ModeBasis> basis;
  Eigen::VectorXd coeffs;

  const ModelParams& params() const { return basis->params; }
  const Truncation& truncation() const { return basis->truncation; }

  double coeff(int m, int l, int n) const {
    for (std::size_t k = 0; k < basis->modes.size(); ++k) {
      const ModeIndex& mi = basis->modes[k];
      if (mi.m == m && mi.l == l && mi.n == n) return coeffs(static_cast<Eigen::Index>(k));
    }
    throw DomainError("RkhsFunction: mode (" + std::to_string(m) + "," + std::to_string(l) + "," +
                      std::to_string(n) + ") not in the truncation");
  }
};

inline RkhsFunction zero_function(std::shared_ptr<const ModeBasis> basis) {
  const auto n = static_cast<Eigen::Index>(basis->size());
  return {std::move(basis), Eigen::VectorXd::Zero(n)};
}

/// Product quadrature on the unit ball for the measure dr·dS: the radial
/// nodes are the eigensystem nodes (so ψ_mn is known there exactly); the
/// angular rule is the trapezoid rule in φ (N = 2) or Gauss–Legendre in
/// cos ϑ times the trapezoid rule in φ (N = 3).
struct BallGrid {
  int N = 2;
  int angular = 0;  // φ points (N = 2, 3); N = 3 adds angular/2 polar points
  std::vector<double> radii;
  std::vector<double> radial_weights;
  std::vector<Point> directions;
  std::vector<double> direction_weights;
  std::vector<Point> points;  // radius-major: points[i * directions + j]
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

inline BallGrid make_ball_grid(const ModeBasis& basis, int angular) {
  const int N = basis.params.N;
  if (N != 2 && N != 3) throw DomainError("BallGrid: dimension not supported for synthesis");
  if (angular < 1) throw DomainError("BallGrid: need at least one angular point");
  BallGrid g;
  g.N = N;
  g.angular = angular;
  g.radii = basis.systems.front().nodes;
  g.radial_weights = basis.systems.front().weights;
  const double dphi = 2.0 * std::numbers::pi / angular;
  if (N == 2) {
    for (int j = 0; j < angular; ++j) {
      g.directions.push_back({std::cos(j * dphi), std::sin(j * dphi)});
      g.direction_weights.push_back(dphi);
    }
  } else {
    const int polar = std::max(1, angular / 2);
    const GaussRule<double> gl = gauss_legendre<double>(polar);
    for (int a = 0; a < polar; ++a) {
      const double ct = gl.nodes[static_cast<std::size_t>(a)];
      const double st = std::sqrt(1.0 - ct * ct);
      for (int j = 0; j < angular; ++j) {
        g.directions.push_back({st * std::cos(j * dphi), st * std::sin(j * dphi), ct});
        g.direction_weights.push_back(gl.weights[static_cast<std::size_t>(a)] * dphi);
      }
    }
  }
  for (std::size_t i = 0; i < g.radii.size(); ++i) {
    for (std::size_t j = 0; j < g.directions.size(); ++j) {
      Point p = g.directions[j];
      for (double& c : p) c *= g.radii[i];
      g.points.push_back(std::move(p));
      g.weights.push_back(g.radial_weights[i] * g.direction_weights[j]);
    }
  }
  return g;
}

/// Mode values on a BallGrid and the matching coefficient functional.
/// synthesis(p, k) = ψ_k(r_p) S_k(x̂_p); analysis = synthesisᵀ · diag(weights).
class RkhsProjector {
 public:
  RkhsProjector(std::shared_ptr<const ModeBasis> basis, int angular)
      : basis_(std::move(basis)), grid_(make_ball_grid(*basis_, angular)) {
    const Truncation& t = basis_->truncation;
    if (angular < 4 * t.m0) {
      throw ResolutionError("fourier_coeffs: angular grid " + std::to_string(angular) + " below 4*m0 = " +
                            std::to_string(4 * t.m0));
    }
    if (static_cast<int>(grid_.radii.size()) < t.n0) {
      throw ResolutionError("fourier_coeffs: radial grid smaller than n0");
    }
    const int N = basis_->params.N;
    const auto P = static_cast<Eigen::Index>(grid_.size());
    const auto M = static_cast<Eigen::Index>(basis_->size());
    const std::size_t D = grid_.directions.size();
    synthesis_.resize(P, M);
    for (std::size_t j = 0; j < D; ++j) {
      const AngleCoords ang = angles_of(grid_.directions[j]);
      std::vector<std::vector<double>> harm;
      for (int m = 0; m <= t.m0; ++m) harm.push_back(sph_harm_all(N, m, ang));
      for (std::size_t i = 0; i < grid_.radii.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i * D + j);
        for (Eigen::Index k = 0; k < M; ++k) {
          const ModeIndex& mi = basis_->modes[static_cast<std::size_t>(k)];
          const EigenSystem& es = basis_->systems[static_cast<std::size_t>(mi.m)];
          synthesis_(row, k) = es.psi(static_cast<Eigen::Index>(i), mi.n - 1) *
                               harm[static_cast<std::size_t>(mi.m)][static_cast<std::size_t>(mi.l - 1)];
        }
      }
    }
    const Eigen::Map<const Eigen::VectorXd> w(grid_.weights.data(), P);
    analysis_ = synthesis_.transpose() * w.asDiagonal();
    inv_lambda_.resize(M);
    for (Eigen::Index k = 0; k < M; ++k) {
      inv_lambda_(k) = 1.0 / basis_->lambda(basis_->modes[static_cast<std::size_t>(k)]);
    }
  }

  const std::shared_ptr<const ModeBasis>& basis() const { return basis_; }
  const BallGrid& grid() const { return grid_; }
  const Eigen::MatrixXd& synthesis() const { return synthesis_; }
  const Eigen::MatrixXd& analysis() const { return analysis_; }
  const Eigen::VectorXd& inverse_lambdas() const { return inv_lambda_; }

 private:
  std::shared_ptr<const ModeBasis> basis_;
  BallGrid grid_;
  Eigen::MatrixXd synthesis_;
  Eigen::MatrixXd analysis_;
  Eigen::VectorXd inv_lambda_;
};

/// f^l_mn = ∬ f ψ_mn(r) S^l_m dS dr from values of f on the projector grid.
inline RkhsFunction fourier_coeffs(const RkhsProjector& proj, std::span<const double> values) {
  if (values.size() != proj.grid().size()) {
    throw DomainError("fourier_coeffs: expected " + std::to_string(proj.grid().size()) + " grid values");
  }
  const Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  return {proj.basis(), proj.analysis() * v};
}

/// Coefficients of a function given pointwise.
inline RkhsFunction fourier_coeffs(const RkhsProjector& proj, const std::function<double(std::span<const double>)>& f) {
  std::vector<double> v;
  v.reserve(proj.grid().size());
  for (const Point& p : proj.grid().points) v.push_back(f(p));
  return fourier_coeffs(proj, v);
}

/// Values of the coefficient series on the projector grid.
inline std::vector<double> synthesize(const RkhsProjector& proj, const RkhsFunction& f) {
  if (f.basis != proj.basis()) throw DomainError("synthesize: basis mismatch");
  const Eigen::VectorXd v = proj.synthesis() * f.coeffs;
  return {v.data(), v.data() + v.size()};
}

/// Value of the coefficient series at an arbitrary point of the ball.
inline double evaluate(const RkhsFunction& f, std::span<const double> x) {
  const std::vector<double> mv = mode_values(*f.basis, x);
  const Eigen::Map<const Eigen::VectorXd> v(mv.data(), static_cast<Eigen::Index>(mv.size()));
  return v.dot(f.coeffs);
}

namespace detail {

inline void check_norm_modes(const RkhsFunction& f) {
  for (std::size_t k = 0; k < f.basis->size(); ++k) {
    const ModeIndex& mi = f.basis->modes[k];
    const EigenSystem& es = f.basis->systems[static_cast<std::size_t>(mi.m)];
    if (f.coeffs(static_cast<Eigen::Index>(k)) != 0.0 &&
        es.lambdas[static_cast<std::size_t>(mi.n - 1)] <= es.lambda_floor) {
      throw IllConditionedModeError("strassen_norm: coefficient on a floored mode (m=" + std::to_string(mi.m) +
                                    ", n=" + std::to_string(mi.n) + ")");
    }
  }
}

}  // namespace detail

/// ⟨f, g⟩ = Σ f^l_mn g^l_mn / λ_mn.
inline double inner_product(const RkhsFunction& f, const RkhsFunction& g) {
  if (f.basis != g.basis) throw DomainError("inner_product: functions live on different bases");
  detail::check_norm_modes(f);
  detail::check_norm_modes(g);
  double s = 0.0;
  for (std::size_t k = 0; k < f.basis->size(); ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    s += f.coeffs(kk) * g.coeffs(kk) / f.basis->lambda(f.basis->modes[k]);
  }
  return s;
}

/// ‖f‖_S = √(Σ (f^l_mn)² / λ_mn).
inline double strassen_norm(const RkhsFunction& f) { return std::sqrt(inner_product(f, f)); }

/// R(·, y) in coefficient form: λ_mn ψ_mn(‖y‖) S^l_m(ŷ).
inline RkhsFunction representer(std::shared_ptr<const ModeBasis> basis, std::span<const double> y) {
  const std::vector<double> mv = mode_values(*basis, y);
  RkhsFunction f{basis, Eigen::VectorXd(static_cast<Eigen::Index>(mv.size()))};
  for (std::size_t k = 0; k < mv.size(); ++k) {
    f.coeffs(static_cast<Eigen::Index>(k)) = basis->lambda(basis->modes[k]) * mv[k];
  }
  return f;
}

/// Nearest point of Strassen's ball in the RKHS metric.
inline RkhsFunction project_to_ball(const RkhsFunction& f) {
  const double n = strassen_norm(f);
  if (n <= 1.0) return f;
  return {f.basis, f.coeffs / n};
}

// ---------------------------------------------------------------------------
// Membership

enum class Membership { converged, diverging, inconclusive };

inline std::string to_string(Membership v) {
  switch (v) {
    case Membership::converged:
      return "converged";
    case Membership::diverging:
      return "diverging";
    default:
      return "inconclusive";
  }
}

struct MembershipReport {
  std::vector<Truncation> schedule;
  std::vector<double> partial_sums;  // Σ (f^l_mn)²/λ_mn within each truncation
  std::vector<double> ratios;  // successive increment ratios
  Membership verdict = Membership::inconclusive;
  double limit = 0.0;  // geometric extrapolation when converged
};

/// Partial sums of the Strassen series of f over the nested truncations of
/// `schedule` (each contained in the projector's basis). The verdict looks at
/// the ratios of successive increments: both of the last two ≤ 0.75 means
/// converged, both ≥ 0.9 means diverging, anything else is inconclusive.
inline MembershipReport bernstein_membership(const RkhsProjector& proj, std::span<const double> values,
                                             const std::vector<Truncation>& schedule) {
  if (schedule.size() < 3) throw DomainError("bernstein_membership: schedule needs at least three truncations");
  const ModeBasis& basis = *proj.basis();
  const RkhsFunction f = fourier_coeffs(proj, values);
  MembershipReport rep;
  rep.schedule = schedule;
  for (const Truncation& t : schedule) {
    if (t.m0 > basis.truncation.m0 || t.n0 > basis.truncation.n0) {
      throw DomainError("bernstein_membership: schedule exceeds the basis truncation");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const ModeIndex& mi = basis.modes[k];
      if (mi.m <= t.m0 && mi.n <= t.n0) {
        const double c = f.coeffs(static_cast<Eigen::Index>(k));
        s += c * c / basis.lambda(mi);
      }
    }
    rep.partial_sums.push_back(s);
  }
  const auto& ps = rep.partial_sums;
  std::vector<double> inc;
  for (std::size_t i = 1; i < ps.size(); ++i) inc.push_back(ps[i] - ps[i - 1]);
  const double scale = std::max(ps.back(), 1e-300);
  if (std::abs(inc.back()) <= 1e-14 * scale || ps.back() == 0.0) {
    rep.verdict = Membership::converged;
    rep.limit = ps.back();
    return rep;
  }
  for (std::size_t i = 1; i < inc.size(); ++i) {
    rep.ratios.push_back(inc[i - 1] > 0.0 ? inc[i] / inc[i - 1] : std::numeric_limits<double>::infinity());
  }
  const double r1 = rep.ratios[rep.ratios.size() - 2];
  const double r2 = rep.ratios.back();
  if (r1 <= 0.75 && r2 <= 0.75 && r2 >= 0.0) {
    rep.verdict = Membership::converged;
    rep.limit = ps.back() + inc.back() * r2 / (1.0 - r2);
  } else if (r1 >= 0.9 && r2 >= 0.9) {
    rep.verdict = Membership::diverging;
    rep.limit = std::numeric_limits<double>::infinity();
  } else {
    rep.verdict = Membership::inconclusive;
    rep.limit = ps.back();
  }
  return rep;
}

}  // namespace mfbm
