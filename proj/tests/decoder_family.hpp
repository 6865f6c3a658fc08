#pragma once

// Random 8-dim instances of the NAF Golden block (4-QAM, two cooperation frames) used to
// compare the Fano decoder with exhaustive ML. The ML search here enumerates amplitude
// points directly instead of going through the library's ml_decode.

#include <random>
#include <vector>

#include "latcoop/latcoop.hpp"

namespace family {

using namespace latcoop;

struct Stats {
  long long trials = 0;
  long long fano_errors = 0;
  long long ml_errors = 0;
  long long mean_nodes_sum = 0;
  double fano_fer() const { return static_cast<double>(fano_errors) / trials; }
  double ml_fer() const { return static_cast<double>(ml_errors) / trials; }
  double mean_nodes() const { return static_cast<double>(mean_nodes_sum) / trials; }
};

struct Instance {
  RMatrix channel;
  IVector u;
  RVector y;
};

inline Instance draw(const ChannelParams& p, const AmplitudeMap& amp, const LatticeCode& code, Rng& rng,
                     bool noiseless) {
  const RelayRealization rz = sample_relay_realization(rng);
  const double b = max_power_repetition_gain(rz.h, p.sigma_w2, p.energy);
  Instance in;
  in.channel = detail::naf_block_channel(build_effective_channel(rz.g1, rz.g2, rz.h, b, p.c), 2) *
               embed_complex(golden_generator());
  std::uniform_int_distribution<int> sym(0, code.q - 1);
  in.u.resize(code.dim());
  for (auto& v : in.u) v = sym(rng);
  in.y = in.channel * amp.amplitudes(code, in.u);
  if (!noiseless) {
    std::normal_distribution<double> nd(0.0, std::sqrt(p.sigma_v2 / 2.0));
    for (auto& v : in.y) v += nd(rng);
  }
  return in;
}

inline Stats run(double snr_db, long long trials, std::uint64_t seed, const DecoderConfig& dc, bool with_ml = true,
                 bool noiseless = false) {
  const LatticeCode code = LatticeCode::uncoded(8, 2);
  const ChannelParams p = snr_to_variances(snr_db);
  const AmplitudeMap amp = AmplitudeMap::for_q(2, p.energy);
  std::vector<IVector> us;
  std::vector<RVector> pts;
  for (const auto& [u, x] : enumerate_codebook(code, 1u << 16)) {
    us.push_back(u);
    pts.push_back(amp.amplitudes(code, u));
  }
  Stats s;
  for (long long t = 0; t < trials; ++t) {
    Rng rng = make_rng(seed, 0, static_cast<std::uint64_t>(t));
    const Instance in = draw(p, amp, code, rng, noiseless);
    const LinkDecode d = decode_link(amp.link(in.channel, in.y, noiseless ? 0.0 : p.sigma_v2 / 2.0), code, dc);
    s.mean_nodes_sum += static_cast<long long>(d.nodes);
    if (d.u != in.u) ++s.fano_errors;
    if (with_ml) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t arg = 0;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        const double e = (in.y - in.channel * pts[k]).squaredNorm();
        if (e < best) {
          best = e;
          arg = k;
        }
      }
      if (us[arg] != in.u) ++s.ml_errors;
    }
    ++s.trials;
  }
  return s;
}

}  // namespace family
