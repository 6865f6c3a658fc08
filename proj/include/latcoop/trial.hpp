#pragma once

// Pieces shared by the protocol simulators: trial outcome record, payload generation and the
// lattice-codeword -> complex channel symbol map.

#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <vector>

#include "latcoop/channels.hpp"
#include "latcoop/decoder.hpp"
#include "latcoop/lattice_codec.hpp"
#include "latcoop/mathkit.hpp"

namespace latcoop {

struct TrialRecord {
  bool frame_error = false;
  std::size_t bit_errors = 0;
  std::size_t bits = 0;
  std::size_t nodes = 0;
  double wait_fraction = std::numeric_limits<double>::quiet_NaN();
  bool budget_exhausted = false;
};

inline std::vector<int> random_payload(std::size_t n, int q, Rng& rng) {
  std::uniform_int_distribution<int> d(0, q - 1);
  std::vector<int> out(n);
  for (auto& s : out) s = d(rng);
  return out;
}

inline int bits_per_symbol(int q) { return std::bit_width(static_cast<unsigned>(q - 1)); }

/// Bit errors between symbol indices under natural binary labels.
inline std::size_t count_bit_errors(const std::vector<int>& a, const std::vector<int>& b) {
  require(a.size() == b.size(), Errc::DimensionMismatch, "symbol sequences differ in length");
  std::size_t e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e += std::popcount(static_cast<unsigned>(a[i] ^ b[i]));
  return e;
}

/// Affine map from codeword coordinates to real channel amplitudes. Pairs of coordinates form
/// one complex symbol of average energy `energy`, i.e. energy/2 per real dimension.
struct AmplitudeMap {
  double scale = 1.0;
  double offset = 0.0;
  double variance = 0.5;

  static AmplitudeMap for_q(int q, double energy = 1.0) {
    AmplitudeMap m;
    m.scale = amplitude_scale(q) * std::sqrt(energy / 2.0);
    m.offset = m.scale * 0.5 * (q - 1);
    m.variance = energy / 2.0;
    return m;
  }

  RVector amplitudes(const LatticeCode& code, const IVector& u) const {
    return (scale * (code.codeword(u).cast<double>() + code.translate)).array() - offset;
  }

  CVector symbols(const LatticeCode& code, const IVector& u) const { return unembed_vector(amplitudes(code, u)); }

  LatticeLink link(RMatrix channel, RVector observation, double noise_var, bool diagonal = false) const {
    LatticeLink l;
    l.channel = std::move(channel);
    l.observation = std::move(observation);
    l.noise_var = noise_var;
    l.amplitude_scale = scale;
    l.amplitude_offset = offset;
    l.amplitude_var = variance;
    l.diagonal = diagonal;
    return l;
  }
};

}  // namespace latcoop
