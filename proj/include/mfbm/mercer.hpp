#pragma once

// Nyström discretization of a radial kernel on [0, 1], its symmetric
// eigendecomposition, and off-grid evaluation of the eigenfunctions.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mfbm/error.hpp"
#include "mfbm/kernel.hpp"
#include "mfbm/quadrature.hpp"

namespace mfbm {

using KernelFn = std::function<double(double, double)>;

struct MercerOptions {
  // Add the diagonal quadrature defect ∫₀¹ b(r_i, s) ds − Σ_j w_j b(r_i, r_j)
  // to the Nyström matrix. Restores O(h⁴) accuracy for kernels with a kink
  // on the diagonal.
  bool defect_correction = true;
  // Eigenvalues below floor·λ_max are clipped to that floor.
  double eigen_floor = 1e-13;
};

/// Eigenpairs of one radial kernel on a Gauss–Legendre grid over [0, 1].
struct EigenSystem {
  std::optional<RadialKernelSpec> spec;
  KernelFn kernel;
  MercerOptions options;
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> defect;  // zero when the correction is off
  std::vector<double> lambdas;  // nonincreasing
  Eigen::MatrixXd psi;  // psi(i, n) = ψ_n(r_i), L²(dr)-orthonormal
  double lambda_floor = 0.0;
  double discrete_trace = 0.0;  // trace of the (corrected) discrete operator

  int grid_size() const { return static_cast<int>(nodes.size()); }
  int size() const { return static_cast<int>(lambdas.size()); }
};

namespace detail {

// ∫₀¹ b(r, s) ds split at the kink s = r.
inline double kernel_row_integral(const KernelFn& kernel, double r) {
  auto f = [&](double s) { return kernel(r, s); };
  return integrate_graded(f, 0.0, r, true, true) + integrate_graded(f, r, 1.0, true, false);
}

inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double vmax = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-8 * vmax) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace detail

/// Nyström eigendecomposition of an arbitrary symmetric kernel on [0, 1].
inline EigenSystem mercer_decompose(KernelFn kernel, int grid_size, int n_keep,
                                    const MercerOptions& options = {}) {
  if (n_keep < 1 || grid_size < n_keep) {
    throw DomainError("mercer_decompose: need grid_size >= n_keep >= 1 (grid " +
                      std::to_string(grid_size) + ", keep " + std::to_string(n_keep) + ")");
  }
  EigenSystem es;
  es.kernel = std::move(kernel);
  es.options = options;
  const GaussRule<double> rule = gauss_legendre<double>(grid_size, 0.0, 1.0);
  es.nodes = rule.nodes;
  es.weights = rule.weights;
  const auto n = static_cast<Eigen::Index>(grid_size);

  Eigen::MatrixXd B(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = es.kernel(es.nodes[static_cast<std::size_t>(i)], es.nodes[static_cast<std::size_t>(j)]);
      B(i, j) = v;
      B(j, i) = v;
    }
  }
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(es.weights.data(), n);
  const Eigen::VectorXd sw = w.cwiseSqrt();
  Eigen::MatrixXd A = sw.asDiagonal() * B * sw.asDiagonal();

  es.defect.assign(static_cast<std::size_t>(grid_size), 0.0);
  if (options.defect_correction) {
    const Eigen::VectorXd rowsum = B * w;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double c = detail::kernel_row_integral(es.kernel, es.nodes[static_cast<std::size_t>(i)]) - rowsum(i);
      es.defect[static_cast<std::size_t>(i)] = c;
      A(i, i) += c;
    }
  }
  es.discrete_trace = A.trace();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(A);
  if (solver.info() != Eigen::Success) {
    throw NumericError("mercer_decompose: eigensolver did not converge (grid " +
                       std::to_string(grid_size) + ")");
  }
  // Eigen returns ascending order.
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double lmax = ev(n - 1);
  const double lmin = ev(0);
  if (!(lmax > 0.0)) throw IntegrityError("mercer_decompose: kernel has no positive eigenvalue");
  if (lmin < -1e-10 * lmax) {
    throw IntegrityError("mercer_decompose: discretized kernel not PSD (lambda_min/lambda_max = " +
                         std::to_string(lmin / lmax) + ")");
  }
  es.lambda_floor = std::max(options.eigen_floor * lmax, std::numeric_limits<double>::min());
  es.lambdas.resize(static_cast<std::size_t>(n_keep));
  es.psi.resize(n, n_keep);
  for (int k = 0; k < n_keep; ++k) {
    const Eigen::Index col = n - 1 - k;
    es.lambdas[static_cast<std::size_t>(k)] = std::max(ev(col), es.lambda_floor);
    Eigen::VectorXd v = solver.eigenvectors().col(col).cwiseQuotient(sw);
    detail::fix_sign(v);
    es.psi.col(k) = v;
  }
  return es;
}

/// Nyström eigendecomposition of b_m (closed form).
inline EigenSystem mercer_decompose(const RadialKernelSpec& spec, int grid_size, int n_keep,
                                    const MercerOptions& options = {}) {
  spec.validate();
  if (spec.params.N < 2) throw DomainError("mercer_decompose: requires N >= 2");
  EigenSystem es = mercer_decompose(
      [spec](double r, double s) { return kernel_closed_form(spec, r, s); }, grid_size, n_keep, options);
  es.spec = spec;
  return es;
}

/// ψ_n(r) for every retained mode at one radius:
///   ψ_n(r) = Σ_k w_k b(r, r_k) ψ_n(r_k) / (λ_n − c(r)),
/// with c(r) the quadrature defect at r (zero without the correction). At a
/// node this reproduces the stored values.
inline std::vector<double> nystrom_extend_all(const EigenSystem& es, double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError("nystrom_extend: r must lie in [0,1]");
  const auto n = static_cast<Eigen::Index>(es.grid_size());
  std::vector<double> out(static_cast<std::size_t>(es.size()), 0.0);
  Eigen::VectorXd row(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    row(k) = es.weights[kk] * es.kernel(r, es.nodes[kk]);
  }
  double c = 0.0;
  if (es.options.defect_correction) c = detail::kernel_row_integral(es.kernel, r) - row.sum();
  const Eigen::VectorXd proj = es.psi.transpose() * row;
  for (int j = 0; j < es.size(); ++j) {
    out[static_cast<std::size_t>(j)] = proj(j) / (es.lambdas[static_cast<std::size_t>(j)] - c);
  }
  return out;
}

/// ψ_n(r) for the mode n (1-based).
inline double nystrom_extend(const EigenSystem& es, int n, double r) {
  if (n < 1 || n > es.size()) {
    throw DomainError("nystrom_extend: mode index " + std::to_string(n) + " out of range");
  }
  if (es.lambdas[static_cast<std::size_t>(n - 1)] <= es.lambda_floor) {
    throw IllConditionedModeError("nystrom_extend: mode " + std::to_string(n) +
                                  " has eigenvalue at the floor");
  }
  return nystrom_extend_all(es, r)[static_cast<std::size_t>(n - 1)];
}

/// max_{i,j} |b(r_i, r_j) − Σ_{n ≤ n_keep} λ_n ψ_n(r_i) ψ_n(r_j)| over the node grid.
inline double mercer_residual(const EigenSystem& es, int n_keep) {
  if (n_keep < 0 || n_keep > es.size()) throw DomainError("mercer_residual: n_keep out of range");
  const auto n = static_cast<Eigen::Index>(es.grid_size());
  const Eigen::MatrixXd P = es.psi.leftCols(n_keep);
  const Eigen::VectorXd lam =
      Eigen::Map<const Eigen::VectorXd>(es.lambdas.data(), static_cast<Eigen::Index>(es.size())).head(n_keep);
  const Eigen::MatrixXd recon = P * lam.asDiagonal() * P.transpose();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double b = es.kernel(es.nodes[static_cast<std::size_t>(i)], es.nodes[static_cast<std::size_t>(j)]);
      worst = std::max(worst, std::abs(b - recon(i, j)));
    }
  }
  return worst;
}

}  // namespace mfbm
