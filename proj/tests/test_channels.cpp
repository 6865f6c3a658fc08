#include <gtest/gtest.h>

#include "latcoop/channels.hpp"
#include "oracles.hpp"

using namespace latcoop;

TEST(Channels, RealizationMoments) {
  Rng rng(51);
  const int n = 100000;
  double g2 = 0, re = 0, im = 0, mean_re = 0;
  for (int k = 0; k < n; ++k) {
    const RelayRealization r = sample_relay_realization(rng);
    for (cplx g : {r.g1, r.g2, r.h}) {
      g2 += std::norm(g);
      re += g.real() * g.real();
      im += g.imag() * g.imag();
      mean_re += g.real();
    }
  }
  const double draws = 3.0 * n;
  EXPECT_NEAR(g2 / draws, 1.0, 0.02);
  EXPECT_NEAR(re / draws, 0.5, 0.01);
  EXPECT_NEAR(im / draws, 0.5, 0.01);
  EXPECT_NEAR(mean_re / draws, 0.0, 0.01);
}

TEST(Channels, CmaRealizationMoments) {
  Rng rng(52);
  const int n = 100000;
  double s = 0;
  for (int k = 0; k < n; ++k) s += std::norm(sample_cma_realization(rng).h);
  EXPECT_NEAR(s / n, 1.0, 0.02);
}

TEST(Channels, SeedDeterminism) {
  const RelayRealization a = sample_relay_realization(std::uint64_t{77});
  const RelayRealization b = sample_relay_realization(std::uint64_t{77});
  EXPECT_EQ(a.g1, b.g1);
  EXPECT_EQ(a.g2, b.g2);
  EXPECT_EQ(a.h, b.h);
  const CmaRealization c = sample_cma_realization(std::uint64_t{78});
  const CmaRealization d = sample_cma_realization(std::uint64_t{78});
  EXPECT_EQ(c.h, d.h);
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
  EXPECT_EQ(derive_seed(5, 6, 7), derive_seed(5, 6, 7));
}

TEST(Channels, AddNoiseZeroVarianceIsIdentity) {
  Rng rng(53);
  CVector s(4);
  s << cplx(1, 2), cplx(-1, 0), cplx(0, 3), cplx(0.5, -0.5);
  EXPECT_EQ(add_noise(s, 0.0, rng), s);
  EXPECT_THROW(add_noise(s, -1.0, rng), Error);
}

TEST(Channels, AddNoiseVarianceAndIndependence) {
  Rng rng(54);
  const int n = 100000;
  const CVector zero = CVector::Zero(2);
  CMatrix z(2, n);
  for (int k = 0; k < n; ++k) z.col(k) = add_noise(zero, 2.0, rng);
  const CMatrix cov = oracle::sample_cov(z);
  EXPECT_NEAR(cov(0, 0).real(), 2.0, 0.04);
  EXPECT_NEAR(cov(1, 1).real(), 2.0, 0.04);
  EXPECT_LT(std::abs(cov(0, 1)), 0.04);
  // circular symmetry: pseudo-covariance vanishes
  cplx pseudo = 0;
  for (int k = 0; k < n; ++k) pseudo += z(0, k) * z(0, k);
  EXPECT_LT(std::abs(pseudo / static_cast<double>(n)), 0.04);
}

TEST(Channels, SnrToVariances) {
  const ChannelParams p0 = snr_to_variances(0.0, 2.0);
  EXPECT_NEAR(p0.sigma_v2, 1.0, 1e-15);
  EXPECT_NEAR(p0.sigma_w2, 0.5, 1e-15);
  const ChannelParams p10 = snr_to_variances(10.0, 2.0);
  EXPECT_NEAR(p10.sigma_v2, 0.1, 1e-15);
  EXPECT_NEAR(p10.sigma_w2, 0.05, 1e-15);
  EXPECT_NEAR(p10.snr, 10.0, 1e-12);
  EXPECT_DOUBLE_EQ(p10.sigma_v2 / p10.sigma_w2, 2.0);
  EXPECT_THROW(snr_to_variances(3.0, 0.0), Error);
}
