#include <gtest/gtest.h>

#include <random>

#include "decoder_family.hpp"
#include "latcoop/decoder.hpp"
#include "oracles.hpp"

using namespace latcoop;

namespace {

PreprocessedSystem upper_system(int m, Rng& rng, double off = 0.2) {
  std::uniform_real_distribution<double> d(-off, off);
  PreprocessedSystem sys;
  sys.generator = RMatrix::Identity(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) sys.generator(i, j) = d(rng);
  return sys;
}

}  // namespace

TEST(Decoder, MlNoiselessExact) {
  Rng rng(41);
  std::normal_distribution<double> n(0, 1);
  const LatticeCode code = build_construction_a(ConvCode::tuned(5, 2), 8);
  for (int trial = 0; trial < 10; ++trial) {
    RMatrix h(8, 8);
    for (auto& v : h.reshaped()) v = n(rng);
    std::vector<int> info(code.info_dim());
    for (auto& s : info) s = static_cast<int>(rng() % 5);
    const IVector u0 = code.lift(info);
    const RVector y = h * code.generator.cast<double>() * u0.cast<double>() + h * code.translate;
    EXPECT_EQ(ml_decode(y, h, code), u0);
  }
}

TEST(Decoder, MlRounding) {
  RVector y(1);
  y << 0.6;
  EXPECT_EQ(ml_decode(y, RMatrix::Identity(1, 1), LatticeCode::uncoded(1, 5))(0), 1);
}

TEST(Decoder, MlMatchesExhaustiveOracle) {
  Rng rng(42);
  std::normal_distribution<double> n(0, 1);
  const LatticeCode code = LatticeCode::uncoded(4, 3);
  for (int trial = 0; trial < 100; ++trial) {
    RMatrix h(4, 4);
    for (auto& v : h.reshaped()) v = n(rng);
    RVector y(4);
    for (auto& v : y) v = 2.0 * n(rng);
    const RVector want = oracle::box_argmin(y, h, 0, 2);
    EXPECT_EQ(ml_decode(y, h, code).cast<double>(), want);
  }
}

TEST(Decoder, MlTieBreakLexicographic) {
  // y halfway between 0 and 1 in both coordinates: all four corners tie
  RVector y(2);
  y << 0.5, 0.5;
  IVector want = IVector::Zero(2);
  EXPECT_EQ(ml_decode(y, RMatrix::Identity(2, 2), LatticeCode::uncoded(2, 2)), want);
}

TEST(Decoder, FanoNoiselessIdentityLike) {
  Rng rng(43);
  for (int trial = 0; trial < 20; ++trial) {
    PreprocessedSystem sys = upper_system(8, rng);
    IVector u(8);
    for (auto& v : u) v = static_cast<std::int64_t>(rng() % 7) - 3;
    sys.observation = sys.generator * u.cast<double>();
    const DecodeResult r = fano_decode(sys, DecoderConfig{});
    EXPECT_EQ(r.u, u);
    EXPECT_EQ(count_nodes(r), 8u);
    EXPECT_NEAR(r.metric, 0.0, 1e-20);
  }
}

TEST(Decoder, FanoOriginIsClosest) {
  Rng rng(44);
  PreprocessedSystem sys = upper_system(6, rng);
  sys.observation = RVector::Zero(6);
  EXPECT_TRUE(fano_decode(sys, DecoderConfig{}).u.isZero());
}

TEST(Decoder, FanoBudgetZero) {
  Rng rng(45);
  PreprocessedSystem sys = upper_system(6, rng);
  sys.observation = RVector::Ones(6);
  DecoderConfig dc;
  dc.max_nodes = 0;
  const DecodeResult r = fano_decode(sys, dc);
  EXPECT_EQ(r.status, DecodeStatus::BudgetExhausted);
  EXPECT_EQ(r.nodes, 0u);
  EXPECT_EQ(r.u.size(), 6);
}

TEST(Decoder, FanoDeterministic) {
  Rng rng(46);
  std::normal_distribution<double> n(0, 1);
  PreprocessedSystem sys = upper_system(10, rng, 1.0);
  sys.observation.resize(10);
  for (auto& v : sys.observation) v = 3.0 * n(rng);
  const DecodeResult a = fano_decode(sys, DecoderConfig{});
  const DecodeResult b = fano_decode(sys, DecoderConfig{});
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.nodes, b.nodes);
  EXPECT_EQ(a.metric, b.metric);
  EXPECT_NEAR(a.metric, (sys.observation - sys.generator * a.u.cast<double>()).squaredNorm(), 1e-12);
}

TEST(Decoder, FanoClampStaysInBounds) {
  Rng rng(47);
  PreprocessedSystem sys = upper_system(5, rng);
  sys.observation = RVector::Constant(5, 9.0);
  sys.bounds.assign(5, IntInterval{0, 3});
  DecoderConfig dc;
  dc.boundary = Boundary::Clamp;
  const DecodeResult r = fano_decode(sys, dc);
  for (auto v : r.u) {
    EXPECT_GE(v, 0);
    EXPECT_LE(v, 3);
  }
}

TEST(Decoder, NoiselessRecoveryOnLinks) {
  const family::Stats s = family::run(18.0, 1000, 101, DecoderConfig{}, false, true);
  EXPECT_EQ(s.fano_errors, 0);
}

TEST(Decoder, NoiselessRecoveryOnCodedLinks) {
  Rng rng(48);
  std::normal_distribution<double> n(0, 1);
  const LatticeCode code = build_construction_a(ConvCode::tuned(5, 2), 16);
  const AmplitudeMap amp = AmplitudeMap::for_q(5);
  for (int trial = 0; trial < 100; ++trial) {
    RMatrix h(16, 16);
    for (auto& v : h.reshaped()) v = n(rng);
    std::vector<int> info(code.info_dim());
    for (auto& s : info) s = static_cast<int>(rng() % 5);
    const IVector u = code.lift(info);
    const LinkDecode d = decode_link(amp.link(h, h * amp.amplitudes(code, u), 0.0), code, DecoderConfig{});
    EXPECT_EQ(d.u, u);
    EXPECT_TRUE(d.in_set);
  }
}

TEST(Decoder, NearMlAtModerateNoise) {
  const family::Stats s = family::run(10.0, 2000, 102, DecoderConfig{});
  ASSERT_GT(s.ml_errors, 50);
  EXPECT_LE(s.fano_errors, 1.5 * s.ml_errors) << "fano " << s.fano_errors << " ml " << s.ml_errors;
  EXPECT_GE(s.fano_errors, s.ml_errors * 0.8);  // ML is a lower bound up to sampling noise
}

TEST(Decoder, NodesNonIncreasingInBias) {
  double prev = std::numeric_limits<double>::infinity();
  for (double bias : {0.8, 1.2, 2.0}) {
    DecoderConfig dc;
    dc.bias = bias;
    const family::Stats s = family::run(10.0, 2000, 103, dc, false);
    EXPECT_LE(s.mean_nodes(), prev + 1e-12) << "bias " << bias;
    prev = s.mean_nodes();
  }
}

TEST(Decoder, RejectsBadConfig) {
  DecoderConfig dc;
  dc.bias = 0.0;
  EXPECT_THROW(dc.validate(), Error);
  dc.bias = 1.0;
  dc.step = -1.0;
  EXPECT_THROW(dc.validate(), Error);
}
