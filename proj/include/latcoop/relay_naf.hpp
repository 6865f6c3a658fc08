#pragma once

// Non-orthogonal amplify-and-forward relaying with the Golden constellation, optionally
// concatenated with an outer construction-A convolutional lattice code.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "latcoop/channels.hpp"
#include "latcoop/decoder.hpp"
#include "latcoop/error.hpp"
#include "latcoop/lattice_codec.hpp"
#include "latcoop/spacetime.hpp"
#include "latcoop/trial.hpp"

namespace latcoop {

enum class NafCoding { GoldenOnly, GoldenPlusCc };

struct NafConfig {
  NafCoding mode = NafCoding::GoldenOnly;
  int q = 2;  // PAM levels per real dimension (Golden only) or CC prime
  int frame_length = 128;  // channel uses per codeword
  std::optional<double> repetition_gain;  // unset: max-power rule per codeword
  ConvCode cc = ConvCode::tuned(5, 2);
  DecoderConfig decoder;
  bool noiseless = false;

  /// 2/4/6 BPCU: Golden over 4/16/64-QAM, or Golden+CC over Z_5/Z_17/Z_67.
  static NafConfig for_rate(int bpcu, NafCoding mode, int frame_length = 128) {
    NafConfig c;
    c.mode = mode;
    c.frame_length = frame_length;
    switch (bpcu) {
      case 2: c.q = mode == NafCoding::GoldenOnly ? 2 : 5; break;
      case 4: c.q = mode == NafCoding::GoldenOnly ? 4 : 17; break;
      case 6: c.q = mode == NafCoding::GoldenOnly ? 8 : 67; break;
      default: throw Error(Errc::Config, "NAF rate must be 2, 4 or 6 BPCU");
    }
    c.cc = ConvCode::tuned(c.q == 2 || c.q == 4 || c.q == 8 ? 5 : c.q, 2);
    return c;
  }

  void validate() const {
    require(frame_length > 0 && frame_length % 4 == 0, Errc::Config, "NAF frame length must be a multiple of 4");
    require(q >= 2, Errc::Config, "Q must be at least 2");
    if (mode == NafCoding::GoldenPlusCc) {
      require(cc.q == q, Errc::Config, "CC alphabet must match Q");
      cc.validate();
      require(cc.n == 2, Errc::Config, "NAF uses a rate-1/2 outer code");
    }
    decoder.validate();
  }

  int payload_symbols() const {
    return mode == NafCoding::GoldenOnly ? 2 * frame_length : frame_length - cc.memory;
  }

  double rate_bpcu() const { return payload_symbols() * std::log2(static_cast<double>(q)) / frame_length; }
};

/// Effective 2x2 channel of one cooperation frame with the second-slot noise whitened back to
/// sigma_v^2.
inline CMatrix build_effective_channel(cplx g1, cplx g2, cplx h, double b, double c) {
  require(c > 0.0, Errc::InvalidArgument, "noise ratio c must be positive");
  const double w = std::sqrt(c / (std::norm(g2 * b) + c));
  CMatrix m(2, 2);
  m << g1, 0.0, w * g2 * b * h, w * g1;
  return m;
}

/// Gain giving the relay average output power E when it repeats h x + w.
inline double max_power_repetition_gain(cplx h, double sigma_w2, double energy = 1.0) {
  const double denom = std::norm(h) * energy + sigma_w2;
  require(denom > 0.0, Errc::InvalidArgument, "relay observes neither signal nor noise");
  return std::sqrt(energy / denom);
}

/// Destination observations of the source symbols x (two per cooperation frame): slot 1 is
/// g1 x1 + v1, slot 2 is g1 x2 + g2 b (h x1 + w) + v2 scaled by the whitening factor.
inline CVector naf_receive(const CVector& x, const RelayRealization& rz, double b, const ChannelParams& p, Rng& rng,
                           bool noiseless = false) {
  require(x.size() % 2 == 0, Errc::DimensionMismatch, "NAF codeword must cover whole cooperation frames");
  const double w = std::sqrt(p.c / (std::norm(rz.g2 * b) + p.c));
  const double vv = noiseless ? 0.0 : p.sigma_v2;
  const double wv = noiseless ? 0.0 : p.sigma_w2;
  CVector y(x.size());
  for (Eigen::Index k = 0; k < x.size(); k += 2) {
    const cplx relay_obs = rz.h * x(k) + (wv > 0 ? complex_gaussian(rng, wv) : cplx{});
    const cplx v1 = vv > 0 ? complex_gaussian(rng, vv) : cplx{};
    const cplx v2 = vv > 0 ? complex_gaussian(rng, vv) : cplx{};
    y(k) = rz.g1 * x(k) + v1;
    y(k + 1) = w * (rz.g1 * x(k + 1) + rz.g2 * b * relay_obs + v2);
  }
  return y;
}

namespace detail {

inline RMatrix naf_block_channel(const CMatrix& heff, int frames) {
  const RMatrix e = embed_complex(heff);
  RMatrix a = RMatrix::Zero(4 * frames, 4 * frames);
  for (int f = 0; f < frames; ++f) a.block(4 * f, 4 * f, 4, 4) = e;
  return a;
}

inline CVector golden_layer(const CVector& u) {
  const CMatrix g = golden_generator();
  CVector x(u.size());
  for (Eigen::Index b = 0; b < u.size(); b += 4) x.segment(b, 4) = g * u.segment(b, 4);
  return x;
}

inline std::vector<int> clamp_symbols(std::vector<int> s, int q) {
  for (auto& v : s) v = std::clamp(v, 0, q - 1);
  return s;
}

}  // namespace detail

/// One NAF codeword: encode, relay, receive, MMSE-DFE Fano decode, compare.
inline TrialRecord simulate_naf_trial(const NafConfig& cfg, const ChannelParams& p, const RelayRealization& rz,
                                      const std::vector<int>& payload, Rng& rng) {
  cfg.validate();
  require(static_cast<int>(payload.size()) == cfg.payload_symbols(), Errc::DimensionMismatch,
          "payload length does not match the coding mode");
  const double b = cfg.repetition_gain ? *cfg.repetition_gain : max_power_repetition_gain(rz.h, p.sigma_w2, p.energy);
  const CMatrix heff = build_effective_channel(rz.g1, rz.g2, rz.h, b, p.c);
  const AmplitudeMap amp = AmplitudeMap::for_q(cfg.q, p.energy);
  const RMatrix golden_r = embed_complex(golden_generator());
  // noiseless runs decode without MMSE regularization, which would bias weak channels
  const double link_var = cfg.noiseless ? 0.0 : p.sigma_v2 / 2.0;

  TrialRecord rec;
  rec.bits = payload.size() * bits_per_symbol(cfg.q);
  std::vector<int> decoded;

  if (cfg.mode == NafCoding::GoldenOnly) {
    const LatticeCode block_code = LatticeCode::uncoded(8, cfg.q);
    const int blocks = cfg.frame_length / 4;
    CVector u(cfg.frame_length);
    for (int blk = 0; blk < blocks; ++blk) {
      const std::vector<int> s(payload.begin() + 8 * blk, payload.begin() + 8 * blk + 8);
      u.segment(4 * blk, 4) = amp.symbols(block_code, block_code.lift(s));
    }
    const CVector x = detail::golden_layer(u);
    const CVector y = naf_receive(x, rz, b, p, rng, cfg.noiseless);
    const RMatrix a = detail::naf_block_channel(heff, 2) * golden_r;
    for (int blk = 0; blk < blocks; ++blk) {
      LatticeLink link = amp.link(a, embed_vector(y.segment(4 * blk, 4)), link_var);
      const LinkDecode d = decode_link(link, block_code, cfg.decoder);
      rec.nodes += d.nodes;
      if (!d.in_set || d.status == DecodeStatus::BudgetExhausted) rec.frame_error = true;
      if (d.status == DecodeStatus::BudgetExhausted) rec.budget_exhausted = true;
      decoded.insert(decoded.end(), d.info.begin(), d.info.end());
    }
  } else {
    const LatticeCode code = build_construction_a(cfg.cc, 2 * cfg.frame_length);
    const IVector uu = code.lift(payload);
    const CVector x = detail::golden_layer(amp.symbols(code, uu));
    const CVector y = naf_receive(x, rz, b, p, rng, cfg.noiseless);
    const int frames = cfg.frame_length / 2;
    RMatrix a = detail::naf_block_channel(heff, frames);
    for (int blk = 0; blk < frames / 2; ++blk) a.block(8 * blk, 8 * blk, 8, 8) = a.block(8 * blk, 8 * blk, 8, 8) * golden_r;
    LatticeLink link = amp.link(std::move(a), embed_vector(y), link_var);
    const LinkDecode d = decode_link(link, code, cfg.decoder);
    rec.nodes = d.nodes;
    if (!d.in_set || d.status == DecodeStatus::BudgetExhausted) rec.frame_error = true;
    rec.budget_exhausted = d.status == DecodeStatus::BudgetExhausted;
    decoded = d.info;
  }

  decoded = detail::clamp_symbols(std::move(decoded), cfg.q);
  if (decoded != payload) rec.frame_error = true;
  rec.bit_errors = count_bit_errors(decoded, payload);
  return rec;
}

}  // namespace latcoop
