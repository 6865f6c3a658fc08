#include <gtest/gtest.h>

#include <random>

#include "latcoop/channels.hpp"
#include "latcoop/lattice_codec.hpp"
#include "oracles.hpp"

using namespace latcoop;

namespace {

IVector to_ivec(const std::vector<int>& v) {
  IVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

IVector mod_vec(const IVector& v, int q) {
  IVector out = v;
  for (auto& x : out) x = mod_q(x, q);
  return out;
}

std::vector<int> random_info(int k, int q, Rng& rng) {
  std::uniform_int_distribution<int> d(0, q - 1);
  std::vector<int> v(k);
  for (auto& s : v) s = d(rng);
  return v;
}

}  // namespace

TEST(LatticeCodec, TrivialMemorylessCode) {
  const ConvCode cc{5, 2, 0, {{1}}};
  const LatticeCode code = build_construction_a(cc, 2);
  EXPECT_EQ(code.info_dim(), 1);
  const IVector u = code.lift(std::vector<int>{1});
  IVector want(2);
  want << 1, 1;
  EXPECT_EQ(code.codeword(u), want);
}

TEST(LatticeCodec, ZeroInputGivesZeroCodeword) {
  const LatticeCode code = build_construction_a(ConvCode::tuned(5, 2), 16);
  const IVector u = code.lift(std::vector<int>(code.info_dim(), 0));
  EXPECT_TRUE((code.codeword(u).array() == 0).all());
  EXPECT_LT((encode(code, u) - code.translate).norm(), 1e-15);
}

TEST(LatticeCodec, DefaultCodeMatchesConvolution) {
  const ConvCode cc = ConvCode::tuned(5, 2);
  const int length = 20;
  const LatticeCode code = build_construction_a(cc, length);
  std::vector<int> info(code.info_dim(), 0);
  info[0] = 1;
  info[1] = 2;
  const IVector u = code.lift(info);
  EXPECT_EQ(mod_vec(code.codeword(u), 5), to_ivec(oracle::convolve(info, 5, cc.parity_taps)));
  EXPECT_EQ(cc.encode(info), oracle::convolve(info, 5, cc.parity_taps));
}

TEST(LatticeCodec, ModQConsistencyRandom) {
  Rng rng(21);
  for (int q : {5, 17, 67}) {
    for (int n : {2, 4}) {
      const ConvCode cc = ConvCode::tuned(q, n);
      const LatticeCode code = build_construction_a(cc, 12 * n);
      code.validate();
      for (int trial = 0; trial < 20; ++trial) {
        const auto info = random_info(code.info_dim(), q, rng);
        const IVector u = code.lift(info);
        EXPECT_EQ(mod_vec(code.codeword(u), q), to_ivec(oracle::convolve(info, q, cc.parity_taps)));
        // lifted point lands in the shaping box
        EXPECT_TRUE(code.in_information_set(u));
        EXPECT_EQ(code.info_of(u), info);
      }
    }
  }
}

TEST(LatticeCodec, SmallTapsReduceModQ) {
  const ConvCode cc = ConvCode::rate_half(3);
  EXPECT_EQ(cc.parity_taps.front(), (std::vector<int>{1, 2, 1}));
  const ConvCode r = ConvCode{5, 2, 2, {{6, -1, 12}}}.reduced();
  EXPECT_EQ(r.parity_taps.front(), (std::vector<int>{1, 4, 2}));
}

TEST(LatticeCodec, DeterminantIsQToTheChecks) {
  const LatticeCode code = build_construction_a(ConvCode::tuned(5, 2), 8);
  const int m = code.dim(), k = code.info_dim();
  const double det = code.generator.cast<double>().determinant();
  EXPECT_NEAR(det, std::pow(5.0, m - k), 1e-6);
}

TEST(LatticeCodec, EncodeIdentity) {
  const LatticeCode code = LatticeCode::uncoded(2, 5);
  IVector u(2);
  u << 3, 1;
  RVector want(2);
  want << 3, 1;
  EXPECT_EQ(encode(code, u), want);
}

TEST(LatticeCodec, EncodeMatchesMatrixProduct) {
  Rng rng(22);
  const LatticeCode code = build_construction_a(ConvCode::tuned(5, 2), 24);
  for (int trial = 0; trial < 20; ++trial) {
    const IVector u = code.lift(random_info(code.info_dim(), 5, rng));
    RVector want = RVector::Zero(code.dim());
    for (int i = 0; i < code.dim(); ++i)
      for (int j = 0; j < code.dim(); ++j) want(i) += static_cast<double>(code.generator(i, j) * u(j));
    EXPECT_EQ(encode(code, u), want);
  }
}

TEST(LatticeCodec, EncodeRejectsOutOfRegion) {
  const LatticeCode code = LatticeCode::uncoded(2, 5);
  IVector u(2);
  u << 5, 0;
  try {
    encode(code, u);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::OutOfShapingRegion);
  }
}

TEST(LatticeCodec, RejectsCompositeQ) {
  try {
    build_construction_a(ConvCode{6, 2, 2, {{1, 2, 1}}}, 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotPrime);
  }
}

TEST(LatticeCodec, DifferencesLieInLattice) {
  Rng rng(23);
  const LatticeCode code = build_construction_a(ConvCode::tuned(5, 2), 16);
  const Eigen::MatrixXd ginv = code.generator.cast<double>().inverse();
  for (int trial = 0; trial < 20; ++trial) {
    const IVector u1 = code.lift(random_info(code.info_dim(), 5, rng));
    const IVector u2 = code.lift(random_info(code.info_dim(), 5, rng));
    const RVector diff = encode(code, u1) - encode(code, u2);
    const RVector coords = ginv * diff;
    for (int i = 0; i < coords.size(); ++i) EXPECT_NEAR(coords(i), std::round(coords(i)), 1e-9);
  }
}

TEST(LatticeCodec, AmplitudeMap) {
  EXPECT_NEAR(map_to_amplitudes(std::vector<int>{2}, 5)(0), 0.0, 1e-15);
  EXPECT_NEAR(map_to_amplitudes(std::vector<int>{4}, 5)(0), 2.0 / std::sqrt(2.0), 1e-15);
  for (int q : {2, 4, 5, 17, 67}) {
    std::vector<int> all(q);
    for (int s = 0; s < q; ++s) all[s] = s;
    const RVector a = map_to_amplitudes(all, q);
    EXPECT_NEAR(a.squaredNorm() / q, 1.0, 1e-12);
    EXPECT_NEAR(a.sum(), 0.0, 1e-12);
    EXPECT_NEAR(a(0), -a(q - 1), 1e-12);
  }
}

TEST(LatticeCodec, CrcRoundTrip) {
  Rng rng(24);
  for (int q : {2, 5, 17, 67}) {
    const auto payload = random_info(40, q, rng);
    const InfoFrame f = crc_append(payload, q);
    EXPECT_EQ(static_cast<int>(f.crc.size()), crc_symbol_count(q));
    EXPECT_TRUE(crc_check(f, q));
    EXPECT_TRUE(crc_check(std::span<const int>(f.joined()), q));
  }
}

TEST(LatticeCodec, CrcDetectsEverySingleSymbolFlip) {
  Rng rng(25);
  for (int q : {5, 17, 67}) {
    const auto payload = random_info(30, q, rng);
    const InfoFrame f = crc_append(payload, q);
    for (std::size_t i = 0; i < payload.size(); ++i) {
      for (int v = 0; v < q; ++v) {
        if (v == payload[i]) continue;
        InfoFrame g = f;
        g.payload[i] = v;
        EXPECT_FALSE(crc_check(g, q)) << "q=" << q << " pos=" << i << " v=" << v;
      }
    }
  }
}

TEST(LatticeCodec, CrcReferenceValues) {
  EXPECT_EQ(crc16_ccitt_false({}), 0xFFFF);
  EXPECT_EQ(crc16_ccitt_false({}), oracle::crc16({}));
  const std::vector<std::uint8_t> check = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
  EXPECT_EQ(crc16_ccitt_false(check), 0x29B1);
  Rng rng(26);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint8_t> b(trial + 1);
    for (auto& x : b) x = static_cast<std::uint8_t>(byte(rng));
    EXPECT_EQ(crc16_ccitt_false(b), oracle::crc16(b));
  }
  // empty payload: the packed checksum is 0xFFFF
  const InfoFrame f = crc_append(std::vector<int>{}, 17);
  std::uint32_t packed = 0;
  for (int s : f.crc) packed = (packed << crc_bits_per_symbol(17)) | static_cast<std::uint32_t>(s);
  EXPECT_EQ(packed, 0xFFFFu);
}

TEST(LatticeCodec, CodebookSizes) {
  EXPECT_EQ(enumerate_codebook(LatticeCode::uncoded(2, 2), 100).size(), 4u);
  EXPECT_EQ(enumerate_codebook(LatticeCode::uncoded(1, 5), 100).size(), 5u);
  const LatticeCode code = build_construction_a(ConvCode::tuned(5, 2), 8);
  const auto book = enumerate_codebook(code, 1u << 20);
  EXPECT_EQ(book.size(), static_cast<std::size_t>(std::pow(5, code.info_dim())));
  for (const auto& [u, x] : book) EXPECT_TRUE(code.in_information_set(u));
}

TEST(LatticeCodec, CodebookTooLarge) {
  try {
    enumerate_codebook(LatticeCode::uncoded(10, 5), 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CodebookTooLarge);
  }
}

TEST(LatticeCodec, RestrictRowsKeepsSubcode) {
  const LatticeCode code = build_construction_a(ConvCode::tuned(5, 4), 24);
  std::vector<int> rows;
  for (int r = 0; r < code.dim(); ++r)
    if (r % 4 < 2) rows.push_back(r);
  const LatticeCode sub = code.restrict_rows(rows);
  sub.validate();
  EXPECT_EQ(sub.info_dim(), code.info_dim());
}
