#pragma once

// The truncated product basis ψ_mn(r) S^l_m(x̂): one eigensystem per degree
// m ≤ m₀, n₀ radial modes each, h(m, N) harmonics per degree.

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mfbm/error.hpp"
#include "mfbm/kernel.hpp"
#include "mfbm/mercer.hpp"
#include "mfbm/specfun.hpp"

namespace mfbm {

struct Truncation {
  int m0 = 8;
  int n0 = 16;

  void validate() const {
    if (m0 < 0 || n0 < 1) {
      throw DomainError("Truncation: need m0 >= 0 and n0 >= 1, got (" + std::to_string(m0) + "," +
                        std::to_string(n0) + ")");
    }
  }
};

struct ModeIndex {
  int m = 0;
  int l = 1;  // 1..h(m,N)
  int n = 1;  // 1..n0
};

/// Eigensystems for m = 0..m₀ plus the flattened (m, l, n) mode list.
/// Modes are ordered by m, then l, then n.
struct ModeBasis {
  ModelParams params;
  Truncation truncation;
  std::vector<EigenSystem> systems;  // indexed by m
  std::vector<ModeIndex> modes;

  std::size_t size() const { return modes.size(); }

  double lambda(const ModeIndex& k) const {
    return systems[static_cast<std::size_t>(k.m)].lambdas[static_cast<std::size_t>(k.n - 1)];
  }
};

namespace detail {

inline std::vector<ModeIndex> enumerate_modes(int N, const Truncation& t) {
  std::vector<ModeIndex> out;
  for (int m = 0; m <= t.m0; ++m) {
    const auto h = static_cast<int>(multiplicity(m, N));
    for (int l = 1; l <= h; ++l) {
      for (int n = 1; n <= t.n0; ++n) out.push_back({m, l, n});
    }
  }
  return out;
}

}  // namespace detail

/// Assemble a basis from precomputed eigensystems (systems[m] for m ≤ m₀).
inline ModeBasis make_mode_basis(const ModelParams& params, const Truncation& truncation,
                                 std::vector<EigenSystem> systems) {
  params.validate();
  truncation.validate();
  if (params.N != 2 && params.N != 3) {
    throw DomainError("ModeBasis: dimension not supported for synthesis (N=" + std::to_string(params.N) + ")");
  }
  if (static_cast<int>(systems.size()) < truncation.m0 + 1) {
    throw ConfigError("ModeBasis: missing eigensystem for m=" + std::to_string(systems.size()));
  }
  systems.resize(static_cast<std::size_t>(truncation.m0 + 1));
  for (std::size_t m = 0; m < systems.size(); ++m) {
    if (systems[m].size() < truncation.n0) {
      throw ConfigError("ModeBasis: eigensystem m=" + std::to_string(m) + " holds " +
                        std::to_string(systems[m].size()) + " modes, need " + std::to_string(truncation.n0));
    }
  }
  ModeBasis b;
  b.params = params;
  b.truncation = truncation;
  b.systems = std::move(systems);
  b.modes = detail::enumerate_modes(params.N, truncation);
  return b;
}

/// Decompose b_m for m ≤ m₀ on a grid of the given size and assemble a basis.
inline ModeBasis build_mode_basis(const ModelParams& params, const Truncation& truncation, int grid_size,
                                  const MercerOptions& options = {}) {
  params.validate();
  truncation.validate();
  std::vector<EigenSystem> systems;
  systems.reserve(static_cast<std::size_t>(truncation.m0 + 1));
  for (int m = 0; m <= truncation.m0; ++m) {
    systems.push_back(mercer_decompose(RadialKernelSpec{params, m}, grid_size, truncation.n0, options));
  }
  return make_mode_basis(params, truncation, std::move(systems));
}

/// ψ_mn(‖x‖) S^l_m(x̂) for every mode of the basis, in mode order. Zero at
/// the origin.
inline std::vector<double> mode_values(const ModeBasis& basis, std::span<const double> x) {
  const int N = basis.params.N;
  if (static_cast<int>(x.size()) != N) throw DomainError("mode_values: point dimension mismatch");
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double r = std::sqrt(r2);
  if (r > 1.0 + 1e-12) throw DomainError("mode_values: point outside the unit ball");
  std::vector<double> out(basis.size(), 0.0);
  if (r == 0.0) return out;
  const AngleCoords ang = angles_of(x);
  std::size_t k = 0;
  for (int m = 0; m <= basis.truncation.m0; ++m) {
    const std::vector<double> psi = nystrom_extend_all(basis.systems[static_cast<std::size_t>(m)], std::min(r, 1.0));
    const std::vector<double> harm = sph_harm_all(N, m, ang);
    for (double s : harm) {
      for (int n = 0; n < basis.truncation.n0; ++n) out[k++] = psi[static_cast<std::size_t>(n)] * s;
    }
  }
  return out;
}

}  // namespace mfbm
