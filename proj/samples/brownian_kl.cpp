// Karhunen-Loeve of Brownian motion on [0,1]: Nystrom eigenvalues of
// min(r, s) next to 4/((2n-1)^2 pi^2).

#include <algorithm>
#include <cstdio>
#include <numbers>

#include "mfbm/mercer.hpp"

int main() {
  const mfbm::EigenSystem es = mfbm::mercer_decompose([](double r, double s) { return std::min(r, s); }, 256, 8);
  std::printf("%3s %22s %22s %10s\n", "n", "nystrom", "exact", "rel");
  for (int n = 1; n <= es.size(); ++n) {
    const double a = (2 * n - 1) * std::numbers::pi;
    const double exact = 4 / (a * a);
    std::printf("%3d %22.17g %22.17g %10.2e\n", n, es.lambdas[n - 1], exact, es.lambdas[n - 1] / exact - 1);
  }
  std::printf("psi_1(0.5) = %.12f\n", mfbm::nystrom_extend(es, 1, 0.5));
}
