#include <gtest/gtest.h>

#include "latcoop/channels.hpp"
#include "latcoop/lattice_codec.hpp"
#include "latcoop/spacetime.hpp"
#include "oracles.hpp"

using namespace latcoop;

TEST(Spacetime, GoldenEntries) {
  const CMatrix g = golden_generator();
  const double th = (1.0 + std::sqrt(5.0)) / 2.0;
  EXPECT_LT(std::abs(g(0, 0) - cplx(1.0, 1.0 - th) / std::sqrt(5.0)), 1e-15);
  EXPECT_LT((g - CMatrix(oracle::golden())).norm(), 1e-15);
  EXPECT_NEAR(GoldenConstants::theta * GoldenConstants::theta_bar, -1.0, 1e-15);
  EXPECT_NEAR(GoldenConstants::theta, 1.6180339887498949, 1e-15);
}

TEST(Spacetime, GoldenColumnsEqualNormAndUnitary) {
  const CMatrix g = golden_generator();
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(g.col(j).norm(), g.col(0).norm(), 1e-14);
  EXPECT_LT((g.adjoint() * g - CMatrix::Identity(4, 4)).norm(), 1e-14);
}

TEST(Spacetime, GoldenEncodeLinear) {
  EXPECT_LT(golden_encode(CVector::Zero(4)).norm(), 1e-15);
  const CMatrix g = golden_generator();
  for (int k = 0; k < 4; ++k) {
    CVector e = CVector::Zero(4);
    e(k) = 1.0;
    EXPECT_LT((golden_encode(e) - g.col(k)).norm(), 1e-15);
  }
}

TEST(Spacetime, GoldenEnergyPreserved) {
  Rng rng(31);
  std::uniform_int_distribution<int> bit(0, 1);
  double in = 0, out = 0;
  for (int k = 0; k < 20000; ++k) {
    CVector u(4);
    for (int i = 0; i < 4; ++i) u(i) = cplx(2 * bit(rng) - 1, 2 * bit(rng) - 1) / std::sqrt(2.0);
    in += u.squaredNorm();
    out += golden_encode(u).squaredNorm();
  }
  EXPECT_NEAR(out / in, 1.0, 1e-12);
}

TEST(Spacetime, GoldenDeterminantNonVanishing) {
  // integer differences u in {-3..3}^4 (real) plus the closed form
  double best = 1e300;
  oracle::for_each_box(4, -3, 3, [&](const Eigen::VectorXd& v) {
    if (v.isZero()) return;
    CVector u = v.cast<cplx>();
    const cplx det = golden_codeword_matrix(golden_encode(u)).determinant();
    const std::array<cplx, 4> a = {u(0), u(1), u(2), u(3)};
    EXPECT_LT(std::abs(det - oracle::golden_det(a)), 1e-12);
    best = std::min(best, std::abs(det));
  });
  EXPECT_GT(best, 0.1);
}

TEST(Spacetime, ConcatIdentityIsBlockGolden) {
  const RMatrix g = concat_generator(golden_generator(), RMatrix::Identity(8, 8), 2);
  EXPECT_LT((g - oracle::embed(oracle::golden())).norm(), 1e-15);
}

TEST(Spacetime, ConcatBlockDiagonalAndDense) {
  const LatticeCode cc = build_construction_a(ConvCode::tuned(5, 2), 16);
  const RMatrix got = concat_generator(golden_generator(), cc, 4);
  RMatrix kron = RMatrix::Zero(16, 16);
  const RMatrix blk = oracle::embed(oracle::golden());
  kron.block(0, 0, 8, 8) = blk;
  kron.block(8, 8, 8, 8) = blk;
  EXPECT_LT((got - kron * cc.generator.cast<double>()).norm(), 1e-12);
  const RMatrix id = concat_generator(golden_generator(), RMatrix::Identity(16, 16), 4);
  EXPECT_LT(id.block(0, 8, 8, 8).norm(), 1e-15);
  EXPECT_LT(id.block(8, 0, 8, 8).norm(), 1e-15);
}

TEST(Spacetime, ConcatCommutesWithEmbedding) {
  Rng rng(32);
  CVector u(8);
  for (int i = 0; i < 8; ++i) u(i) = complex_gaussian(rng);
  const RMatrix g = concat_generator(golden_generator(), RMatrix::Identity(16, 16), 4);
  CVector x(8);
  x.head(4) = golden_encode(u.head(4));
  x.tail(4) = golden_encode(u.tail(4));
  EXPECT_LT((g * embed_vector(u) - embed_vector(x)).norm(), 1e-12);
}

TEST(Spacetime, ConcatRejectsOddFrames) {
  EXPECT_THROW(concat_generator(golden_generator(), RMatrix::Identity(12, 12), 3), Error);
}

TEST(Spacetime, AlamoutiRetransmit) {
  const auto p = alamouti_retransmit(1.0, cplx(0, 1));
  EXPECT_EQ(p.first, cplx(0, -1));
  EXPECT_EQ(p.second, cplx(-1, 0));
  const auto z = alamouti_retransmit(0.0, 0.0);
  EXPECT_EQ(std::abs(z.first) + std::abs(z.second), 0.0);
}

TEST(Spacetime, AlamoutiReceivedModel) {
  Rng rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const cplx xk = complex_gaussian(rng), xk1 = complex_gaussian(rng);
    const cplx g1 = complex_gaussian(rng), g2 = complex_gaussian(rng);
    const auto r = alamouti_retransmit(xk, xk1);
    EXPECT_LT(std::abs(g1 * xk + g2 * r.first - (g1 * xk + g2 * std::conj(xk1))), 1e-15);
    EXPECT_LT(std::abs(g1 * xk1 + g2 * r.second - (g1 * xk1 - g2 * std::conj(xk))), 1e-15);
  }
}

TEST(Spacetime, AlamoutiCombineSingleBranch) {
  const cplx g1(0.6, -0.8), y(1.5, 2.0);
  const auto [a, b] = alamouti_combine(y, cplx(0.3, 0.1), g1, 0.0);
  EXPECT_LT(std::abs(a - std::conj(g1) / std::abs(g1) * y), 1e-15);
  (void)b;
}

TEST(Spacetime, AlamoutiCombineHandComputed) {
  const cplx x0 = 1.0, x1(0, 1);
  const cplx yk = x0 + std::conj(x1), yk1 = x1 - std::conj(x0);
  const auto [a, b] = alamouti_combine(yk, yk1, 1.0, 1.0);
  EXPECT_LT(std::abs(a - std::sqrt(2.0)), 1e-15);
  EXPECT_LT(std::abs(b - cplx(0, std::sqrt(2.0))), 1e-15);
}

TEST(Spacetime, AlamoutiCombiningIdentity) {
  Rng rng(34);
  for (int trial = 0; trial < 200; ++trial) {
    const cplx xk = complex_gaussian(rng), xk1 = complex_gaussian(rng);
    const cplx g1 = complex_gaussian(rng), g2 = complex_gaussian(rng);
    const auto r = alamouti_retransmit(xk, xk1);
    const auto [a, b] = alamouti_combine(g1 * xk + g2 * r.first, g1 * xk1 + g2 * r.second, g1, g2);
    const double gain = std::sqrt(std::norm(g1) + std::norm(g2));
    EXPECT_LT(std::abs(a - gain * xk), 1e-12);
    EXPECT_LT(std::abs(b - gain * xk1), 1e-12);
  }
}

TEST(Spacetime, AlamoutiZeroChannel) {
  try {
    alamouti_combine(1.0, 1.0, 0.0, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ZeroChannel);
  }
}

TEST(Spacetime, AlamoutiNoiseStaysWhite) {
  Rng rng(35);
  const cplx g1(0.3, 1.1), g2(-0.7, 0.2);
  const int n = 100000;
  CMatrix z(2, n);
  for (int k = 0; k < n; ++k) {
    const auto [a, b] = alamouti_combine(complex_gaussian(rng), complex_gaussian(rng), g1, g2);
    z(0, k) = a;
    z(1, k) = b;
  }
  const CMatrix cov = oracle::sample_cov(z);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_LT(std::abs(cov(i, j) - (i == j ? 1.0 : 0.0)), 0.02);
}
