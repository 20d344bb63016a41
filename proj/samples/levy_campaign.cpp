// Levy-modulus increment clouds for one seeded planar Brownian sheet-like
// field (H = 1/2): modulus statistic plus the attraction/entry trends.

#include <cstdio>
#include <cstdlib>
#include <memory>

#include "mfbm/limits.hpp"

using namespace mfbm;

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20240601;
  const ModelParams p{2, 0.5};
  const SpectralField field(p, Band{}, FrequencyGrid{}, seed);
  const LatticeField lat = sample_lattice(field, CartesianGrid{257});

  std::printf("modulus statistic, seed %llu\n", static_cast<unsigned long long>(seed));
  for (int k = 3; k <= 7; ++k) {
    const double u = std::ldexp(1.0, -k);
    std::printf("  u = 2^-%d  %.4f\n", k, modulus_statistic(lat, u, p));
  }

  auto basis = std::make_shared<const ModeBasis>(build_mode_basis(p, {4, 8}, 32));
  const RkhsProjector proj(basis, 16);
  const RkhsFunction rep = representer(basis, Point{0.5, 0.0});
  const RkhsFunction target{basis, 0.7 * rep.coeffs / strassen_norm(rep)};
  const FieldFn fn = [&](std::span<const double> x) { return lat.interpolate(x[0], x[1]); };
  std::vector<double> sched;
  for (int k = 3; k <= 7; ++k) sched.push_back(std::ldexp(1.0, -k));

  std::printf("%10s %8s %12s %12s %12s %12s\n", "u", "members", "excess_med", "supdist_med", "enter_min", "sup");
  for (const CampaignRow& r : run_campaign({Example::levy, p}, sched, fn, proj, target)) {
    std::printf("%10.6f %8zu %12.4f %12.4f %12.4f %12.4f\n", r.scale, r.stats.members, r.stats.attract_excess_median,
                r.stats.attract_supdist_median, r.enter_running_min, r.stats.functional_sup);
  }
}
