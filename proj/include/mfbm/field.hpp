#pragma once

// Sample paths of the field on point sets in the unit ball:
//   * truncated Karhunen–Loève synthesis in the product basis ψ_mn S^l_m,
//   * exact Gaussian sampling by Cholesky factorization of the Gram matrix,
//   * the global spectral representation C₄ ∫ (e^{i(p,x)} − 1)‖p‖^{−N/2−H} dW(p),
//     optionally restricted to a frequency band (a, b].
// plus the deterministic spectral variance quadrature and ensemble statistics.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "mfbm/error.hpp"
#include "mfbm/kernel.hpp"
#include "mfbm/modes.hpp"
#include "mfbm/quadrature.hpp"
#include "mfbm/rng.hpp"
#include "mfbm/specfun.hpp"

namespace mfbm {

using Point = std::vector<double>;

/// Frequency band (a, b]; b may be +infinity.
struct Band {
  double a = 0.0;
  double b = std::numeric_limits<double>::infinity();

  bool full() const { return a == 0.0 && std::isinf(b); }
  std::string tag() const {
    if (full()) return "spectral";
    std::ostringstream os;
    os.precision(17);
    os << "spectral_band(" << a << "," << b << "]";
    return os.str();
  }
};

/// Radial shells (geometric over [k_min, k_max] ∩ band) times directions.
/// directions = 0 selects the default for the dimension (2, 64, 242 for
/// N = 1, 2, 3); it counts both members of each ±p pair.
struct FrequencyGrid {
  int shells = 256;
  int directions = 0;
  double k_min = 1e-3;
  double k_max = 1e3;

  int directions_for(int N) const {
    if (directions > 0) return directions;
    return N == 1 ? 2 : N == 2 ? 64 : 242;
  }
};

struct FieldSample {
  ModelParams params;
  std::vector<Point> points;
  std::vector<double> values;
  std::string method;  // kl | cholesky | spectral | spectral_band(a,b]
  std::uint64_t seed = 0;
  std::uint64_t replica = 0;
  std::optional<Truncation> truncation;
  std::optional<Band> band;
  std::optional<FrequencyGrid> freq_grid;
};

namespace detail {

// Stream tags keep the three samplers' variates disjoint under one seed.
inline constexpr std::uint64_t kTagKl = 1;
inline constexpr std::uint64_t kTagCholesky = 2;
inline constexpr std::uint64_t kTagSpectral = 3;

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

inline void check_points(const std::vector<Point>& points, int N, bool require_ball = true) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (static_cast<int>(points[i].size()) != N) {
      throw DomainError("point " + std::to_string(i) + " has dimension " + std::to_string(points[i].size()) +
                        ", expected " + std::to_string(N));
    }
    if (require_ball && norm2(points[i]) > 1.0 + 1e-12) {
      throw DomainError("point " + std::to_string(i) + " lies outside the closed unit ball");
    }
  }
}

// Surface area of S^{N-1}.
inline double sphere_area(int N) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::exp(log_gamma(0.5 * N).value);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Karhunen–Loève

/// Truncated KL sampler on a fixed point set. Mode values are computed once;
/// each replica then costs one matrix-vector product.
class KlSampler {
 public:
  KlSampler(std::shared_ptr<const ModeBasis> basis, std::vector<Point> points)
      : basis_(std::move(basis)), points_(std::move(points)) {
    if (!basis_) throw ConfigError("KlSampler: no mode basis");
    detail::check_points(points_, basis_->params.N);
    const auto P = static_cast<Eigen::Index>(points_.size());
    const auto M = static_cast<Eigen::Index>(basis_->size());
    phi_.resize(P, M);
    for (Eigen::Index i = 0; i < P; ++i) {
      const std::vector<double> v = mode_values(*basis_, points_[static_cast<std::size_t>(i)]);
      for (Eigen::Index k = 0; k < M; ++k) {
        phi_(i, k) = std::sqrt(basis_->lambda(basis_->modes[static_cast<std::size_t>(k)])) *
                     v[static_cast<std::size_t>(k)];
      }
    }
  }

  const std::vector<Point>& points() const { return points_; }
  const ModeBasis& basis() const { return *basis_; }

  /// Standard normal ξ^l_mn for one replica, one stream per (m, l, n).
  Eigen::VectorXd coefficients(std::uint64_t seed, std::uint64_t replica) const {
    Eigen::VectorXd xi(static_cast<Eigen::Index>(basis_->size()));
    for (std::size_t k = 0; k < basis_->size(); ++k) {
      const ModeIndex& mi = basis_->modes[k];
      RngStream rng(seed, {detail::kTagKl, replica, static_cast<std::uint64_t>(mi.m),
                           static_cast<std::uint64_t>(mi.l), static_cast<std::uint64_t>(mi.n)});
      xi(static_cast<Eigen::Index>(k)) = rng.normal();
    }
    return xi;
  }

  std::vector<double> sample(std::uint64_t seed, std::uint64_t replica) const {
    const Eigen::VectorXd v = phi_ * coefficients(seed, replica);
    return {v.data(), v.data() + v.size()};
  }

  /// Σ λ_mn ψ_mn(r_i) ψ_mn(r_j) S^l_m S^l_m: covariance of the truncated series.
  Eigen::MatrixXd truncated_covariance() const { return phi_ * phi_.transpose(); }

 private:
  std::shared_ptr<const ModeBasis> basis_;
  std::vector<Point> points_;
  Eigen::MatrixXd phi_;  // √λ × mode value
};

inline FieldSample kl_synthesize(std::shared_ptr<const ModeBasis> basis, const std::vector<Point>& points,
                                 std::uint64_t seed, std::uint64_t replica = 0) {
  KlSampler sampler(basis, points);
  FieldSample out;
  out.params = basis->params;
  out.points = points;
  out.values = sampler.sample(seed, replica);
  out.method = "kl";
  out.seed = seed;
  out.replica = replica;
  out.truncation = basis->truncation;
  return out;
}

// ---------------------------------------------------------------------------
// Cholesky

/// Exact Gaussian sampler. Points at the origin have variance zero and are
/// kept out of the factorization.
class CholeskySampler {
 public:
  CholeskySampler(const ModelParams& params, std::vector<Point> points) : params_(params), points_(std::move(points)) {
    params_.validate();
    detail::check_points(points_, params_.N, false);
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (detail::norm2(points_[i]) > 0.0) active_.push_back(i);
    }
    const auto n = static_cast<Eigen::Index>(active_.size());
    gram_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const double v = covariance(points_[active_[static_cast<std::size_t>(i)]],
                                    points_[active_[static_cast<std::size_t>(j)]], params_);
        gram_(i, j) = v;
        gram_(j, i) = v;
      }
    }
    if (n == 0) return;
    Eigen::LLT<Eigen::MatrixXd> llt(gram_);
    if (llt.info() != Eigen::Success) {
      jitter_ = 1e-12 * gram_.trace() / static_cast<double>(n);
      Eigen::MatrixXd g = gram_;
      g.diagonal().array() += jitter_;
      llt.compute(g);
      if (llt.info() != Eigen::Success) {
        throw NumericError("cholesky_synthesize: factorization failed after jitter " + std::to_string(jitter_));
      }
    }
    L_ = llt.matrixL();
  }

  double jitter() const { return jitter_; }
  const std::vector<Point>& points() const { return points_; }

  /// Gram matrix over all points (zero rows/columns at the origin).
  Eigen::MatrixXd gram() const {
    const auto P = static_cast<Eigen::Index>(points_.size());
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(P, P);
    for (std::size_t i = 0; i < active_.size(); ++i) {
      for (std::size_t j = 0; j < active_.size(); ++j) {
        g(static_cast<Eigen::Index>(active_[i]), static_cast<Eigen::Index>(active_[j])) =
            gram_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
    return g;
  }

  std::vector<double> sample(std::uint64_t seed, std::uint64_t replica) const {
    std::vector<double> out(points_.size(), 0.0);
    if (active_.empty()) return out;
    RngStream rng(seed, {detail::kTagCholesky, replica});
    Eigen::VectorXd z(static_cast<Eigen::Index>(active_.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    const Eigen::VectorXd v = L_ * z;
    for (std::size_t i = 0; i < active_.size(); ++i) out[active_[i]] = v(static_cast<Eigen::Index>(i));
    return out;
  }

 private:
  ModelParams params_;
  std::vector<Point> points_;
  std::vector<std::size_t> active_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd L_;
  double jitter_ = 0.0;
};

inline FieldSample cholesky_synthesize(const ModelParams& params, const std::vector<Point>& points,
                                       std::uint64_t seed, std::uint64_t replica = 0) {
  CholeskySampler sampler(params, points);
  FieldSample out;
  out.params = params;
  out.points = points;
  out.values = sampler.sample(seed, replica);
  out.method = "cholesky";
  out.seed = seed;
  out.replica = replica;
  return out;
}

// ---------------------------------------------------------------------------
// Spectral

/// C₄ with C₄² = 2^{2H} H Γ(N/2 + H) / (2 π^{N/2} Γ(1 − H)), the constant for
/// which C₄² ∫ 2(1 − cos(p, x)) ‖p‖^{−N−2H} dp = ‖x‖^{2H}.
inline double c4_constant(const ModelParams& params) {
  params.validate();
  const double N = params.N;
  const double H = params.H;
  const double log_c2 = 2.0 * H * std::log(2.0) + std::log(H) + log_gamma(0.5 * N + H).value -
                        std::log(2.0) - 0.5 * N * std::log(std::numbers::pi) - log_gamma(1.0 - H).value;
  return std::exp(0.5 * log_c2);
}

namespace detail {

// ∫_{S^{N-1}} 2(1 − cos(k u·e)) dS(u)
inline double angular_increment(int N, double k) {
  switch (N) {
    case 1:
      return 4.0 * (1.0 - std::cos(k));
    case 2:
      return 4.0 * std::numbers::pi * (1.0 - std::cyl_bessel_j(0.0, k));
    case 3:
      return 8.0 * std::numbers::pi * (k == 0.0 ? 0.0 : 1.0 - std::sin(k) / k);
    default:
      throw DomainError("spectral: dimension not supported for synthesis (N=" + std::to_string(N) + ")");
  }
}

// ∫_α^β k^{−1−2H} A_N(k) dk. Graded panels on [α, 10], π-wide panels up to
// 2000, then the mean value of A_N analytically; the oscillating remainder
// beyond 2000 is below 1e-6 of the total and dropped.
inline double radial_increment_integral(int N, double H, double alpha, double beta) {
  if (!(beta > alpha)) return 0.0;
  auto f = [N, H](double k) { return std::pow(k, -1.0 - 2.0 * H) * angular_increment(N, k); };
  constexpr double kSmooth = 10.0;
  constexpr double kFar = 2000.0;
  double total = 0.0;
  const double e1 = std::min(beta, kSmooth);
  if (e1 > alpha) total += integrate_graded(f, alpha, e1, true, false);
  const double lo2 = std::max(alpha, kSmooth);
  const double e2 = std::min(beta, kFar);
  for (double a = lo2; a < e2; a += std::numbers::pi) {
    total += integrate_graded(f, a, std::min(a + std::numbers::pi, e2), false, false);
  }
  const double lo3 = std::max(alpha, kFar);
  if (beta > lo3) {
    const double c0 = N == 1 ? 4.0 : N == 2 ? 4.0 * std::numbers::pi : 8.0 * std::numbers::pi;
    const double upper = std::isinf(beta) ? 0.0 : std::pow(beta, -2.0 * H);
    total += c0 * (std::pow(lo3, -2.0 * H) - upper) / (2.0 * H);
  }
  return total;
}

}  // namespace detail

/// Variance of the band-limited field at a point of norm `radius`:
/// C₄² ∫_{a<‖p‖≤b} 2(1 − cos(p, x)) ‖p‖^{−N−2H} dp, by deterministic
/// quadrature. The full band returns ‖x‖^{2H} up to quadrature error.
inline double spectral_variance(const ModelParams& params, const Band& band, double radius) {
  params.validate();
  if (radius < 0.0) throw DomainError("spectral_variance: negative radius");
  if (!(band.b > band.a) || band.a < 0.0) throw DomainError("spectral_variance: empty band");
  if (radius == 0.0) return 0.0;
  const double c4 = c4_constant(params);
  const double H = params.H;
  return c4 * c4 * std::pow(radius, 2.0 * H) *
         detail::radial_increment_integral(params.N, H, band.a * radius, band.b * radius);
}

/// Grid extent actually used for a band: [max(a, k_min), min(b, k_max)].
inline std::pair<double, double> effective_band(const Band& band, const FrequencyGrid& grid) {
  return {std::max(band.a, grid.k_min), std::min(band.b, grid.k_max)};
}

/// One realization of the (band-limited) spectral field, evaluable anywhere.
/// Each frequency cell represents a pair ±p; its contribution is
///   √2 σ [g₁(cos(p·x) − 1) − g₂ sin(p·x)],  σ² = C₄² ‖p‖^{−N−2H} vol(cell),
/// so the pair carries variance C₄² · 2(1 − cos(p·x)) ‖p‖^{−N−2H} · 2vol(cell).
/// The radius of each cell is drawn uniformly (in Lebesgue measure) within
/// its shell and each shell's direction set is randomly rotated, which makes
/// the discretization unbiased over the covered band.
class SpectralField {
 public:
  SpectralField(const ModelParams& params, const Band& band, const FrequencyGrid& grid, std::uint64_t seed,
                std::uint64_t replica = 0)
      : params_(params), band_(band), grid_(grid) {
    params_.validate();
    const int N = params_.N;
    if (N < 1 || N > 3) {
      throw DomainError("spectral_synthesize: dimension not supported for synthesis (N=" + std::to_string(N) + ")");
    }
    if (!(band.b > band.a) || band.a < 0.0) throw DomainError("spectral_synthesize: empty band");
    if (grid.shells < 1) throw DomainError("spectral_synthesize: need at least one shell");
    const auto [lo, hi] = effective_band(band, grid);
    if (!(hi > lo)) throw DomainError("spectral_synthesize: band does not meet the frequency grid");
    const int full_dirs = grid.directions_for(N);
    if (full_dirs < 2 || full_dirs % 2 != 0) throw DomainError("spectral_synthesize: directions must be even");
    const int half = full_dirs / 2;
    const double H = params_.H;
    const double c4sq = std::pow(c4_constant(params_), 2.0);
    const double area = detail::sphere_area(N);
    const double ratio = std::pow(hi / lo, 1.0 / grid.shells);
    const std::vector<std::array<double, 3>> base = base_directions(N, half);

    cells_.reserve(static_cast<std::size_t>(grid.shells) * static_cast<std::size_t>(half));
    for (int j = 0; j < grid.shells; ++j) {
      const double k0 = lo * std::pow(ratio, j);
      const double k1 = j + 1 == grid.shells ? hi : lo * std::pow(ratio, j + 1);
      const double shell_vol = area * (std::pow(k1, N) - std::pow(k0, N)) / N;
      const double cell_vol = shell_vol / (2.0 * half);
      RngStream rot(seed, {detail::kTagSpectral, replica, static_cast<std::uint64_t>(j), 0xffffffffULL});
      const std::array<double, 9> R = random_rotation(N, half, rot);
      for (int d = 0; d < half; ++d) {
        RngStream rng(seed, {detail::kTagSpectral, replica, static_cast<std::uint64_t>(j),
                             static_cast<std::uint64_t>(d)});
        const double u = rng.uniform();
        const double k = std::pow(std::pow(k0, N) + u * (std::pow(k1, N) - std::pow(k0, N)), 1.0 / N);
        const double g1 = rng.normal();
        const double g2 = rng.normal();
        const double sigma = std::sqrt(c4sq * std::pow(k, -N - 2.0 * H) * cell_vol);
        Cell c;
        const auto& b = base[static_cast<std::size_t>(d)];
        for (int a = 0; a < 3; ++a) {
          c.p[static_cast<std::size_t>(a)] = k * (R[static_cast<std::size_t>(3 * a)] * b[0] +
                                                  R[static_cast<std::size_t>(3 * a + 1)] * b[1] +
                                                  R[static_cast<std::size_t>(3 * a + 2)] * b[2]);
        }
        c.a1 = std::numbers::sqrt2 * sigma * g1;
        c.a2 = std::numbers::sqrt2 * sigma * g2;
        cells_.push_back(c);
      }
    }
  }

  const ModelParams& params() const { return params_; }
  const Band& band() const { return band_; }
  const FrequencyGrid& grid() const { return grid_; }
  std::size_t cell_count() const { return cells_.size(); }

  double value(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != params_.N) throw DomainError("SpectralField: point dimension mismatch");
    std::array<double, 3> xx{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) xx[i] = x[i];
    double sum = 0.0;
    for (const Cell& c : cells_) {
      const double ph = c.p[0] * xx[0] + c.p[1] * xx[1] + c.p[2] * xx[2];
      sum += c.a1 * (std::cos(ph) - 1.0) - c.a2 * std::sin(ph);
    }
    return sum;
  }

  std::vector<double> values(const std::vector<Point>& points) const {
    std::vector<double> out;
    out.reserve(points.size());
    for (const Point& p : points) out.push_back(value(p));
    return out;
  }

  /// Values on the tensor lattice coords × coords (N = 2), row-major with
  /// the first coordinate slowest. Uses e^{i p·x} = e^{i p₁x₁} e^{i p₂x₂}.
  std::vector<double> lattice_values(const std::vector<double>& coords) const {
    if (params_.N != 2) throw DomainError("SpectralField: lattice evaluation needs N = 2");
    const std::size_t n = coords.size();
    std::vector<double> out(n * n, 0.0);
    std::vector<std::complex<double>> e1(n), e2(n);
    for (const Cell& c : cells_) {
      for (std::size_t i = 0; i < n; ++i) {
        e1[i] = std::polar(1.0, c.p[0] * coords[i]);
        e2[i] = std::polar(1.0, c.p[1] * coords[i]);
      }
      for (std::size_t i = 0; i < n; ++i) {
        double* row = out.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
          const std::complex<double> e = e1[i] * e2[j];
          row[j] += c.a1 * (e.real() - 1.0) - c.a2 * e.imag();
        }
      }
    }
    return out;
  }

 private:
  struct Cell {
    std::array<double, 3> p{0.0, 0.0, 0.0};
    double a1 = 0.0;
    double a2 = 0.0;
  };

  // Half-space direction sets: +e₁ (N = 1); angles π d / half (N = 2);
  // Fibonacci points on the upper hemisphere (N = 3).
  static std::vector<std::array<double, 3>> base_directions(int N, int half) {
    std::vector<std::array<double, 3>> out;
    out.reserve(static_cast<std::size_t>(half));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int d = 0; d < half; ++d) {
      if (N == 1) {
        out.push_back({1.0, 0.0, 0.0});
      } else if (N == 2) {
        const double phi = std::numbers::pi * d / half;
        out.push_back({std::cos(phi), std::sin(phi), 0.0});
      } else {
        const double z = (d + 0.5) / half;
        const double rho = std::sqrt(1.0 - z * z);
        const double phi = golden * d;
        out.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
      }
    }
    return out;
  }

  // Row-major 3×3 rotation: identity for N = 1, a random planar rotation by
  // up to one angular step for N = 2, a uniformly random rotation for N = 3.
  static std::array<double, 9> random_rotation(int N, int half, RngStream& rng) {
    if (N == 1) return {1, 0, 0, 0, 1, 0, 0, 0, 1};
    if (N == 2) {
      const double a = rng.uniform() * std::numbers::pi / half;
      const double c = std::cos(a);
      const double s = std::sin(a);
      return {c, -s, 0, s, c, 0, 0, 0, 1};
    }
    double q0 = rng.normal(), q1 = rng.normal(), q2 = rng.normal(), q3 = rng.normal();
    const double qn = std::sqrt(q0 * q0 + q1 * q1 + q2 * q2 + q3 * q3);
    q0 /= qn;
    q1 /= qn;
    q2 /= qn;
    q3 /= qn;
    return {1 - 2 * (q2 * q2 + q3 * q3), 2 * (q1 * q2 - q0 * q3),     2 * (q1 * q3 + q0 * q2),
            2 * (q1 * q2 + q0 * q3),     1 - 2 * (q1 * q1 + q3 * q3), 2 * (q2 * q3 - q0 * q1),
            2 * (q1 * q3 - q0 * q2),     2 * (q2 * q3 + q0 * q1),     1 - 2 * (q1 * q1 + q2 * q2)};
  }

  ModelParams params_;
  Band band_;
  FrequencyGrid grid_;
  std::vector<Cell> cells_;
};

inline FieldSample spectral_synthesize(const ModelParams& params, const Band& band, const FrequencyGrid& grid,
                                       const std::vector<Point>& points, std::uint64_t seed,
                                       std::uint64_t replica = 0) {
  detail::check_points(points, params.N, false);
  const SpectralField field(params, band, grid, seed, replica);
  FieldSample out;
  out.params = params;
  out.points = points;
  out.values = field.values(points);
  out.method = band.tag();
  out.seed = seed;
  out.replica = replica;
  out.band = band;
  out.freq_grid = grid;
  return out;
}

// ---------------------------------------------------------------------------
// Ensemble statistics

struct CovarianceEstimate {
  Eigen::MatrixXd cov;  // unbiased sample covariance
  Eigen::MatrixXd se;   // standard error of each entry
  std::size_t replicas = 0;
};

/// Collects replicas on a fixed point set; two-pass estimates on finish().
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(std::size_t points) : points_(points) {}

  void add(std::span<const double> values) {
    if (values.size() != points_) throw DomainError("empirical_covariance: mismatched point lists");
    data_.insert(data_.end(), values.begin(), values.end());
    ++count_;
  }

  std::size_t count() const { return count_; }

  CovarianceEstimate finish() const {
    if (count_ < 2) throw DomainError("empirical_covariance: need at least two replicas");
    const auto P = static_cast<Eigen::Index>(points_);
    const auto R = static_cast<Eigen::Index>(count_);
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(data_.data(),
                                                                                                         R, P);
    const Eigen::RowVectorXd mean = X.colwise().mean();
    const Eigen::MatrixXd D = X.rowwise() - mean;
    CovarianceEstimate est;
    est.replicas = count_;
    est.cov = D.transpose() * D / static_cast<double>(count_ - 1);
    est.se.resize(P, P);
    for (Eigen::Index i = 0; i < P; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) {
        const Eigen::ArrayXd prod = D.col(i).array() * D.col(j).array();
        const double pm = prod.mean();
        const double var = (prod - pm).square().sum() / static_cast<double>(count_ - 1);
        const double se = std::sqrt(var / static_cast<double>(count_));
        est.se(i, j) = se;
        est.se(j, i) = se;
      }
    }
    return est;
  }

 private:
  std::size_t points_;
  std::size_t count_ = 0;
  std::vector<double> data_;
};

inline CovarianceEstimate empirical_covariance(const std::vector<FieldSample>& ensemble) {
  if (ensemble.size() < 2) throw DomainError("empirical_covariance: need at least two replicas");
  CovarianceAccumulator acc(ensemble.front().points.size());
  for (const FieldSample& s : ensemble) {
    if (s.points != ensemble.front().points) throw DomainError("empirical_covariance: mismatched point lists");
    acc.add(s.values);
  }
  return acc.finish();
}

// ---------------------------------------------------------------------------
// Lattice fields (N = 2)

/// Square lattice over [lo, hi]² with n points per axis.
struct CartesianGrid {
  int n = 129;
  double lo = -1.0;
  double hi = 1.0;

  double spacing() const { return (hi - lo) / (n - 1); }
  double coord(int i) const { return i + 1 == n ? hi : lo + i * spacing(); }
  std::vector<double> coords() const {
    std::vector<double> c(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = coord(i);
    return c;
  }
};

/// Field values on a CartesianGrid, with bilinear interpolation in between.
struct LatticeField {
  CartesianGrid grid;
  std::vector<double> values;  // values[i * n + j] at (coord(i), coord(j))

  double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(grid.n) + static_cast<std::size_t>(j)];
  }

  double interpolate(double x1, double x2) const {
    const double h = grid.spacing();
    const double tol = 1e-12;
    if (x1 < grid.lo - tol || x1 > grid.hi + tol || x2 < grid.lo - tol || x2 > grid.hi + tol) {
      throw CoverageError("LatticeField: point outside the sampled square");
    }
    const double f1 = std::clamp((x1 - grid.lo) / h, 0.0, static_cast<double>(grid.n - 1));
    const double f2 = std::clamp((x2 - grid.lo) / h, 0.0, static_cast<double>(grid.n - 1));
    const int i = std::min(static_cast<int>(f1), grid.n - 2);
    const int j = std::min(static_cast<int>(f2), grid.n - 2);
    const double t = f1 - i;
    const double s = f2 - j;
    return (1 - t) * (1 - s) * at(i, j) + t * (1 - s) * at(i + 1, j) + (1 - t) * s * at(i, j + 1) +
           t * s * at(i + 1, j + 1);
  }
};

inline LatticeField sample_lattice(const SpectralField& field, const CartesianGrid& grid) {
  return {grid, field.lattice_values(grid.coords())};
}

}  // namespace mfbm
