#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "mfbm/field.hpp"
#include "mfbm/rng.hpp"

using namespace mfbm;

TEST(Rng, StreamsAreKeyedNotOrdered) {
  RngStream a(1, {3, 4}), b(1, {3, 4}), c(1, {4, 3});
  const auto x = a.next_u64();
  EXPECT_EQ(x, b.next_u64());
  EXPECT_NE(x, c.next_u64());
}

TEST(Rng, NormalMoments) {
  RngStream r(99, {1});
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    s += v;
    s2 += v * v;
  }
  EXPECT_NEAR(s / n, 0.0, 5 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 5 * std::sqrt(2.0 / n));
}

TEST(C4, MatchesReference) {
  // mpmath, 40 digits
  const double ref[3][3] = {{0.11504819084081604, 0.15915494309189534, 0.15994054933367393},
                            {0.050036446032438913, 0.079577471545947668, 0.089300191219222369},
                            {0.029296781225752946, 0.050660591821168886, 0.061092789665489643}};
  const double Hs[3] = {0.3, 0.5, 0.7};
  for (int N = 1; N <= 3; ++N) {
    for (int h = 0; h < 3; ++h) {
      const double c = c4_constant({N, Hs[h]});
      EXPECT_NEAR(c * c, ref[N - 1][h], 1e-13) << N << " " << Hs[h];
    }
  }
}

TEST(SpectralVariance, FullBandReproducesPowerLaw) {
  for (int N = 1; N <= 3; ++N) {
    for (double H : {0.3, 0.5, 0.7}) {
      for (double r : {0.1, 0.5, 1.0}) {
        EXPECT_NEAR(spectral_variance({N, H}, Band{}, r), std::pow(r, 2 * H), 1e-5 * std::pow(r, 2 * H))
            << N << " " << H << " " << r;
      }
    }
  }
}

TEST(SpectralVariance, BandsAreAdditive) {
  const ModelParams p{2, 0.5};
  const double lo = spectral_variance(p, {1, 10}, 0.7);
  const double hi = spectral_variance(p, {10, 100}, 0.7);
  const double both = spectral_variance(p, {1, 100}, 0.7);
  EXPECT_NEAR(lo + hi, both, 1e-6 * both);
  EXPECT_GT(lo, 0.0);
  EXPECT_GT(hi, 0.0);
}

TEST(SpectralField, VanishesAtOriginAndIsDeterministic) {
  const ModelParams p{2, 0.5};
  FrequencyGrid g;
  g.shells = 32;
  const SpectralField a(p, Band{}, g, 11, 0), b(p, Band{}, g, 11, 0), c(p, Band{}, g, 11, 1);
  const std::vector<double> o{0, 0}, x{0.3, -0.2};
  EXPECT_EQ(a.value(o), 0.0);
  EXPECT_EQ(a.value(x), b.value(x));
  EXPECT_NE(a.value(x), c.value(x));
  EXPECT_EQ(a.cell_count(), static_cast<std::size_t>(32 * 32));
}

TEST(SpectralField, LatticeMatchesPointwise) {
  const ModelParams p{2, 0.4};
  FrequencyGrid g;
  g.shells = 16;
  const SpectralField f(p, Band{}, g, 5, 0);
  const LatticeField lf = sample_lattice(f, CartesianGrid{9});
  for (int i : {0, 3, 8}) {
    for (int j : {1, 4, 7}) {
      const std::vector<double> x{lf.grid.coord(i), lf.grid.coord(j)};
      EXPECT_NEAR(lf.at(i, j), f.value(x), 1e-10);
    }
  }
  EXPECT_THROW(lf.interpolate(1.5, 0.0), CoverageError);
}

TEST(SpectralField, MonteCarloVarianceWithinFiveSe) {
  const ModelParams p{2, 0.5};
  FrequencyGrid g;
  g.shells = 64;
  const std::vector<Point> pts{{0.6, 0.0}};
  const int R = 800;
  double s2 = 0, s4 = 0;
  for (int k = 0; k < R; ++k) {
    const double v = spectral_synthesize(p, Band{}, g, pts, 2024, k).values[0];
    s2 += v * v;
    s4 += v * v * v * v;
  }
  const double m = s2 / R;
  const double se = std::sqrt((s4 / R - m * m) / R);
  const auto [lo, hi] = effective_band(Band{}, g);
  const double expected = spectral_variance(p, {lo, hi}, 0.6);
  EXPECT_NEAR(m, expected, 5 * se);
}

TEST(SpectralField, Errors) {
  FrequencyGrid g;
  EXPECT_THROW(SpectralField({4, 0.5}, Band{}, g, 1), DomainError);
  EXPECT_THROW(SpectralField({2, 0.5}, Band{5, 1}, g, 1), DomainError);
  g.directions = 7;
  EXPECT_THROW(SpectralField({2, 0.5}, Band{}, g, 1), DomainError);
}

TEST(Cholesky, ThreePointsAndExactGram) {
  const ModelParams p{2, 0.5};
  const std::vector<Point> pts{{0.1, 0.2}, {0.5, -0.5}, {-0.9, 0.1}};
  const FieldSample s = cholesky_synthesize(p, pts, 3);
  EXPECT_EQ(s.values.size(), 3u);
  EXPECT_EQ(s.values, cholesky_synthesize(p, pts, 3).values);
  const CholeskySampler cs(p, pts);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(cs.gram()(i, j), covariance(pts[i], pts[j], p));
  }
}

TEST(Cholesky, DuplicatePointsStillFactor) {
  const ModelParams p{2, 0.5};
  const std::vector<Point> pts{{0.3, 0.3}, {0.3, 0.3}};
  const CholeskySampler cs(p, pts);
  const auto v = cs.sample(1, 0);
  EXPECT_NEAR(v[0], v[1], 1e-5);
}

TEST(KarhunenLoeve, ReproducibleAndConsistent) {
  const ModelParams p{2, 0.5};
  auto basis = std::make_shared<const ModeBasis>(build_mode_basis(p, {4, 8}, 48));
  const std::vector<Point> pts{{0.2, 0.1}, {-0.5, 0.5}, {0.0, 0.0}};
  const FieldSample a = kl_synthesize(basis, pts, 17);
  const FieldSample b = kl_synthesize(basis, pts, 17);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.values[2], 0.0);
  // truncated covariance approaches the exact one from below on the diagonal
  const KlSampler kl(basis, pts);
  const auto C = kl.truncated_covariance();
  for (int i = 0; i < 2; ++i) {
    const double exact = covariance(pts[i], pts[i], p);
    EXPECT_LE(C(i, i), exact * (1 + 1e-6));
    EXPECT_GT(C(i, i), 0.9 * exact);
  }
}

TEST(CovarianceEstimate, KnownEnsemble) {
  CovarianceAccumulator acc(2);
  const double rows[4][2] = {{1, 2}, {-1, -2}, {1, -2}, {-1, 2}};
  for (auto& r : rows) acc.add(r);
  const CovarianceEstimate e = acc.finish();
  EXPECT_NEAR(e.cov(0, 0), 4.0 / 3, 1e-15);
  EXPECT_NEAR(e.cov(1, 1), 16.0 / 3, 1e-15);
  EXPECT_NEAR(e.cov(0, 1), 0.0, 1e-15);
  EXPECT_EQ(e.replicas, 4u);
}
