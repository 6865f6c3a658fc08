#pragma once

// Modified dynamic decode-and-forward: the relay listens until a quantized waiting instant,
// decodes the prefix with CRC validation and then sends Alamouti-paired conjugates of the
// remaining source symbols. The destination reduces the result to a time-selective SISO link.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "latcoop/channels.hpp"
#include "latcoop/decoder.hpp"
#include "latcoop/error.hpp"
#include "latcoop/lattice_codec.hpp"
#include "latcoop/spacetime.hpp"
#include "latcoop/trial.hpp"

namespace latcoop {

struct DdfConfig {
  int q = 17;
  int subblocks = 12;            // M
  int symbols_per_subblock = 8;  // T, complex channel uses
  std::vector<double> fractions = {0.5, 2.0 / 3.0};
  std::optional<double> rate;  // BPCU used by the waiting rule; unset: code rate
  ConvCode cc = ConvCode::tuned(17, 4);
  // relaxed search drifts out of the code once the direct link fades
  DecoderConfig decoder{.boundary = Boundary::Clamp};
  bool noiseless = false;

  /// 1/2/3 BPCU with the rate-1/4 code over Z_5 / Z_17 / Z_67.
  static DdfConfig for_rate(int bpcu) {
    DdfConfig c;
    switch (bpcu) {
      case 1: c.q = 5; break;
      case 2: c.q = 17; break;
      case 3: c.q = 67; break;
      default: throw Error(Errc::Config, "DDF rate must be 1, 2 or 3 BPCU");
    }
    c.cc = ConvCode::tuned(c.q, 4);
    return c;
  }

  int channel_uses() const { return subblocks * symbols_per_subblock; }
  int code_length() const { return 2 * channel_uses(); }
  int info_symbols() const { return code_length() / cc.n - cc.memory; }
  int payload_symbols() const { return info_symbols() - crc_symbol_count(q); }
  double code_rate() const { return info_symbols() * std::log2(static_cast<double>(q)) / channel_uses(); }
  double wait_rate() const { return rate ? *rate : code_rate(); }

  /// Allowed start instants in sub-blocks, N_j = f_j M.
  std::vector<int> instants() const {
    std::vector<int> out;
    for (double f : fractions) out.push_back(static_cast<int>(std::lround(f * subblocks)));
    return out;
  }

  void validate() const {
    require(subblocks > 0 && symbols_per_subblock > 0, Errc::Config, "M and T must be positive");
    require(symbols_per_subblock % 2 == 0, Errc::Config, "T must be even for Alamouti pairing");
    require(!fractions.empty(), Errc::Config, "at least one waiting fraction is required");
    double prev = 0.0;
    for (double f : fractions) {
      require(f > prev && f < 1.0, Errc::Config, "fractions must be strictly increasing in (0,1)");
      const double nj = f * subblocks;
      require(std::abs(nj - std::round(nj)) < 1e-9, Errc::Config, "fractions must land on sub-block boundaries");
      prev = f;
    }
    require(fractions.front() >= 0.5, Errc::Config, "first fraction must be at least 1/2");
    require(cc.q == q, Errc::Config, "CC alphabet must match Q");
    cc.validate();
    require(code_length() % cc.n == 0, Errc::Config, "frame does not hold whole trellis steps");
    require(payload_symbols() > 0, Errc::Config, "frame too short for the CRC");
    decoder.validate();
  }
};

struct DdfAttempt {
  int subblocks = 0;
  bool crc_ok = false;
};

struct DdfTrialState {
  int wait_subblocks = 0;  // M'
  std::vector<DdfAttempt> attempts;
  std::optional<std::vector<int>> relay_word;  // info symbols incl. CRC, when accepted
  bool destination_ok = false;
};

/// Sub-blocks the relay must listen for: min{M, max{M/2, ceil(M R / log2(1+|h|^2 c rho))}}.
inline double required_wait(double rate, double h2, double c, double rho, int m) {
  require(rho > 0.0, Errc::InvalidArgument, "rho must be positive");
  const double snr = h2 * c * rho;
  if (!(snr > 0.0)) return m;
  const double cap = std::log2(1.0 + snr);
  const double need = std::ceil(m * rate / cap);
  return std::min<double>(m, std::max(0.5 * m, need));
}

/// Smallest allowed instant at or after `required`; M (silent) when none is.
inline int quantize_wait(double required, const std::vector<double>& fractions, int m) {
  for (double f : fractions) {
    const double nj = std::round(f * m);
    if (nj >= required - 1e-9) return static_cast<int>(nj);
  }
  return m;
}

namespace detail {

/// Stream-major transmission order: coded symbol of stream s at trellis step t goes out at
/// position s*steps + t, so any prefix holds whole streams first.
inline std::vector<int> stream_major_positions(int steps, int n) {
  std::vector<int> pos(static_cast<std::size_t>(steps) * n);
  for (int t = 0; t < steps; ++t)
    for (int s = 0; s < n; ++s) pos[t * n + s] = s * steps + t;
  return pos;
}

inline LatticeCode permute_rows(const LatticeCode& code, const std::vector<int>& pos) {
  LatticeCode out = code;
  for (int r = 0; r < code.dim(); ++r) {
    out.generator.row(pos[r]) = code.generator.row(r);
    out.translate(pos[r]) = code.translate(r);
  }
  for (auto& r : out.own_row) r = pos[r];
  return out;
}

/// Real diagonal link after per-symbol derotation: y_k conj(g_k)/|g_k| = |g_k| x_k + noise.
inline std::pair<RMatrix, RVector> derotated(const CVector& y, const std::vector<cplx>& gains) {
  const Eigen::Index n = y.size();
  RMatrix d = RMatrix::Zero(2 * n, 2 * n);
  CVector z(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double a = std::abs(gains[k]);
    z(k) = a > 0.0 ? y(k) * std::conj(gains[k]) / a : cplx{};
    d(2 * k, 2 * k) = a;
    d(2 * k + 1, 2 * k + 1) = a;
  }
  return {std::move(d), embed_vector(z)};
}

}  // namespace detail

/// The DDF lattice code with rows in transmission order.
inline LatticeCode ddf_code(const DdfConfig& cfg) {
  const LatticeCode trellis = build_construction_a(cfg.cc, cfg.code_length());
  return detail::permute_rows(trellis, detail::stream_major_positions(cfg.code_length() / cfg.cc.n, cfg.cc.n));
}

/// Decodes the first `prefix_uses` channel uses seen through gain h. Returns the information
/// symbols (payload followed by CRC) when the CRC passes.
inline std::optional<std::vector<int>> relay_decode_attempt(const CVector& prefix, cplx h, double noise_var,
                                                            const LatticeCode& code, const AmplitudeMap& amp,
                                                            const DecoderConfig& dec, std::size_t* nodes = nullptr) {
  const int rows = 2 * static_cast<int>(prefix.size());
  require(rows <= code.dim(), Errc::DimensionMismatch, "prefix longer than the codeword");
  std::vector<int> kept(rows);
  std::iota(kept.begin(), kept.end(), 0);
  const LatticeCode sub = code.restrict_rows(kept);
  require(sub.info_dim() == code.info_dim(), Errc::InvalidArgument, "prefix does not cover every information symbol");
  auto [d, y] = detail::derotated(prefix, std::vector<cplx>(prefix.size(), h));
  const LinkDecode r = decode_link(amp.link(std::move(d), std::move(y), noise_var, true), sub, dec);
  if (nodes) *nodes += r.nodes;
  if (r.status == DecodeStatus::BudgetExhausted || !r.in_set) return std::nullopt;
  if (!crc_check(std::span<const int>(r.info), code.q)) return std::nullopt;
  return r.info;
}

/// Destination: Alamouti-combines pairs from M'T on and decodes the resulting diagonal link.
inline LinkDecode destination_decode(const CVector& y, cplx g1, cplx g2, int wait_uses, const LatticeCode& code,
                                     const AmplitudeMap& amp, double noise_var, const DecoderConfig& dec) {
  require(2 * y.size() == code.dim(), Errc::DimensionMismatch, "observation length mismatch");
  require(wait_uses % 2 == 0 || wait_uses == y.size(), Errc::InvalidArgument, "relay start must align with pairs");
  CVector z = y;
  std::vector<cplx> gains(y.size(), g1);
  const double gamma = std::sqrt(std::norm(g1) + std::norm(g2));
  for (Eigen::Index k = wait_uses; k + 1 < y.size(); k += 2) {
    const auto [a, b] = alamouti_combine(y(k), y(k + 1), g1, g2);
    z(k) = a;
    z(k + 1) = b;
    gains[k] = gains[k + 1] = gamma;
  }
  auto [d, obs] = detail::derotated(z, gains);
  return decode_link(amp.link(std::move(d), std::move(obs), noise_var, true), code, dec);
}

/// Full DDF trial with the protocol state exposed.
inline std::pair<TrialRecord, DdfTrialState> run_ddf_trial(const DdfConfig& cfg, const ChannelParams& p,
                                                           const RelayRealization& rz,
                                                           const std::vector<int>& payload, Rng& rng) {
  cfg.validate();
  require(static_cast<int>(payload.size()) == cfg.payload_symbols(), Errc::DimensionMismatch,
          "payload length does not match the DDF frame");
  const LatticeCode code = ddf_code(cfg);
  const AmplitudeMap amp = AmplitudeMap::for_q(cfg.q, p.energy);
  const int m = cfg.subblocks;
  const int tt = cfg.symbols_per_subblock;

  TrialRecord rec;
  DdfTrialState st;
  rec.bits = payload.size() * bits_per_symbol(cfg.q);

  const InfoFrame frame = crc_append(payload, cfg.q);
  const CVector x = amp.symbols(code, code.lift(frame.joined()));
  const double wv = cfg.noiseless ? 0.0 : p.sigma_w2;
  const double vv = cfg.noiseless ? 0.0 : p.sigma_v2;
  const CVector relay_obs = add_noise(rz.h * x, wv, rng);

  // Listen, decode, retry at later instants; silent if nothing passes.
  const double need = required_wait(cfg.wait_rate(), std::norm(rz.h), p.c, p.snr, m);
  st.wait_subblocks = m;
  const int first = quantize_wait(need, cfg.fractions, m);
  for (int nj : cfg.instants()) {
    if (nj < first) continue;
    auto word = relay_decode_attempt(relay_obs.head(nj * tt), rz.h, wv / 2.0, code, amp, cfg.decoder, &rec.nodes);
    st.attempts.push_back({nj, word.has_value()});
    if (word) {
      st.wait_subblocks = nj;
      st.relay_word = std::move(word);
      break;
    }
  }

  const int wait_uses = st.wait_subblocks * tt;
  CVector y = rz.g1 * x;
  if (st.relay_word) {
    const CVector xr = amp.symbols(code, code.lift(*st.relay_word));
    for (Eigen::Index k = wait_uses; k + 1 < x.size(); k += 2) {
      const AlamoutiPair a = alamouti_retransmit(xr(k), xr(k + 1));
      y(k) += rz.g2 * a.first;
      y(k + 1) += rz.g2 * a.second;
    }
  }
  y = add_noise(y, vv, rng);

  const LinkDecode d = destination_decode(y, rz.g1, rz.g2, wait_uses, code, amp, vv / 2.0, cfg.decoder);
  rec.nodes += d.nodes;
  rec.budget_exhausted = d.status == DecodeStatus::BudgetExhausted;
  std::vector<int> got = d.info;
  got.resize(payload.size());
  for (auto& s : got) s = std::clamp(s, 0, cfg.q - 1);
  st.destination_ok = d.in_set && !rec.budget_exhausted && got == payload;
  rec.frame_error = !st.destination_ok;
  rec.bit_errors = count_bit_errors(got, payload);
  rec.wait_fraction = static_cast<double>(st.wait_subblocks) / m;
  return {rec, st};
}

inline TrialRecord simulate_ddf_trial(const DdfConfig& cfg, const ChannelParams& p, const RelayRealization& rz,
                                      const std::vector<int>& payload, Rng& rng) {
  return run_ddf_trial(cfg, p, rz, payload, rng).first;
}

}  // namespace latcoop
