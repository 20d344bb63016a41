#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mfbm/io.hpp"

namespace fs = std::filesystem;
using namespace mfbm;

namespace {

fs::path work(const std::string& name) {
  const fs::path d = fs::path(MFBM_WORK_DIR) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "run.cfg";
  std::ofstream(p) << text;
  return p;
}

int run(const std::string& args) {
  const std::string cmd = std::string(MFBM_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("eigs --no-such-flag"), 2);
  const fs::path d = work("usage");
  EXPECT_EQ(run("eigs --config " + (d / "missing.cfg").string()), 2);
  EXPECT_EQ(run("eigs --config " + write_config(d, "model.Hurst = 0.5\n").string() + " --out " + d.string()), 2);
  EXPECT_TRUE(fs::exists(d / "error.json"));
}

TEST(Cli, EigsWritesOneBundlePerDegree) {
  const fs::path d = work("eigs");
  const fs::path cfg = write_config(d, "model.N = 2\nmodel.H = 0.5\ntruncation.m0 = 4\ntruncation.n0 = 8\n");
  ASSERT_EQ(run("eigs --config " + cfg.string() + " --out " + (d / "out").string()), 0);
  int bundles = 0;
  for (const auto& e : fs::directory_iterator(d / "out")) {
    if (e.path().filename().string().rfind("eigs_m", 0) == 0) ++bundles;
  }
  EXPECT_EQ(bundles, 5);
  // grid 64 → 128 refinement of the leading eigenvalues
  const io::CsvTable t = io::read_csv(d / "out" / "eigs_convergence.csv");
  ASSERT_EQ(t.rows.size(), 5u * 8u);
  for (const auto& r : t.rows) EXPECT_LT(std::stod(r[t.column("rel_step")]), 1e-4);
}

TEST(Cli, CovcheckPassesAndDetectsFault) {
  const fs::path d = work("covcheck");
  const fs::path cfg = write_config(d, "covcheck.radii = 4\ncovcheck.m_max = 3\n");
  EXPECT_EQ(run("covcheck --config " + cfg.string() + " --out " + (d / "ok").string()), 0);
  EXPECT_EQ(io::read_csv(d / "ok" / "covcheck.csv").rows.size(), 4u * 4u * 4u);
  EXPECT_EQ(run("covcheck --perturb-gamma --config " + cfg.string() + " --out " + (d / "bad").string()), 1);
  std::ifstream in(d / "bad" / "error.json");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("max relative residual"), std::string::npos);
  const fs::path empty = write_config(d, "covcheck.radii = 0\n");
  EXPECT_EQ(run("covcheck --config " + empty.string() + " --out " + (d / "empty").string()), 2);
}

TEST(Cli, SimulateCholeskyThreePoints) {
  const fs::path d = work("sim_chol");
  const fs::path cfg = write_config(
      d, "simulate.method = cholesky\nsimulate.points = 0.1,0.2, 0.5,-0.5, -0.3,0.3\nsimulate.random_points = 0\n");
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + d.string()), 0);
  EXPECT_EQ(io::read_csv(d / "samples.csv").rows.size(), 3u);
  EXPECT_TRUE(fs::exists(d / "samples.json"));
}

TEST(Cli, SimulateKlIsReproducibleAndSeedSensitive) {
  const fs::path d = work("sim_kl");
  const fs::path cfg = write_config(d, "truncation.m0 = 3\ntruncation.n0 = 6\ngrid.radial = 32\n");
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (d / "a").string()), 0);
  ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + (d / "b").string()), 0);
  ASSERT_EQ(run("simulate --seed 5 --config " + cfg.string() + " --out " + (d / "c").string()), 0);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  EXPECT_EQ(slurp(d / "a" / "samples.csv"), slurp(d / "b" / "samples.csv"));
  EXPECT_NE(slurp(d / "a" / "samples.csv"), slurp(d / "c" / "samples.csv"));
}

TEST(Cli, SpectralBandsAddUp) {
  const fs::path d = work("sim_band");
  const std::string common = "simulate.method = spectral\nsimulate.points = 0.7,0.0\nsimulate.random_points = 0\n";
  const fs::path lo = d / "lo.cfg", hi = d / "hi.cfg", all = d / "all.cfg";
  std::ofstream(lo) << common << "simulate.band.a = 1\nsimulate.band.b = 10\n";
  std::ofstream(hi) << common << "simulate.band.a = 10\nsimulate.band.b = 100\n";
  std::ofstream(all) << common << "simulate.band.a = 1\nsimulate.band.b = 100\n";
  double v[3];
  int k = 0;
  for (const fs::path& cfg : {lo, hi, all}) {
    const fs::path out = d / cfg.stem();
    ASSERT_EQ(run("simulate --config " + cfg.string() + " --out " + out.string()), 0);
    const io::CsvTable t = io::read_csv(out / "spectral_variance.csv");
    v[k++] = std::stod(t.rows[0][t.column("band_variance")]);
  }
  EXPECT_NEAR(v[0] + v[1], v[2], 0.01 * v[2]);
}

TEST(Cli, RkhsNormDefaults) {
  const fs::path d = work("rkhs");
  const fs::path cfg = write_config(d, "truncation.m0 = 4\ntruncation.n0 = 8\ngrid.radial = 48\nrkhs.pairs = 3\n");
  ASSERT_EQ(run("rkhs-norm --config " + cfg.string() + " --out " + d.string()), 0);
  const io::CsvTable t = io::read_csv(d / "rkhs_norm.csv");
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_NEAR(std::stod(t.rows[0][t.column("strassen_norm")]), std::sqrt(0.6), 0.03);
  EXPECT_EQ(io::read_csv(d / "rkhs_pairs.csv").rows.size(), 3u);
  EXPECT_TRUE(fs::exists(d / "coefficients.csv"));
}

TEST(Cli, LimitsLocalFiveRows) {
  const fs::path d = work("limits");
  const fs::path cfg = write_config(d, "limits.example = local_lil\nspectral.shells = 64\n");
  ASSERT_EQ(run("limits --config " + cfg.string() + " --out " + d.string()), 0);
  const io::CsvTable t = io::read_csv(d / "limits.csv");
  EXPECT_EQ(t.rows.size(), 5u);
  EXPECT_TRUE(fs::exists(d / "limits.svg"));
}

TEST(Cli, LimitsCoverageErrorNamesScale) {
  const fs::path d = work("limits_cover");
  const fs::path cfg =
      write_config(d, "limits.example = global_lil\nlimits.schedule = 5, 200\nlimits.horizon = 80\nspectral.shells = 16\n");
  EXPECT_EQ(run("limits --config " + cfg.string() + " --out " + d.string()), 1);
  std::ifstream in(d / "error.json");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_NE(ss.str().find("scale 200"), std::string::npos);
}
