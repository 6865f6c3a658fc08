#pragma once

// Quasi-static flat Rayleigh fading, AWGN and SNR bookkeeping. Every random quantity is drawn
// from an explicitly passed engine so that trials are reproducible independently.

#include <cmath>
#include <cstdint>
#include <random>

#include "latcoop/error.hpp"
#include "latcoop/mathkit.hpp"

namespace latcoop {

using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Seed of an independent stream keyed by (master, stream, index); order-free.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ (stream + 0x632BE59BD9B4E019ull)) ^ index);
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return Rng(derive_seed(master, stream, index));
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline cplx complex_gaussian(Rng& rng, double variance = 1.0) {
  std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
  const double re = n(rng);
  const double im = n(rng);
  return {re, im};
}

struct ChannelParams {
  double snr = 1.0;       // E / sigma_v^2, linear
  double energy = 1.0;    // per-symbol transmit energy E
  double sigma_v2 = 1.0;  // destination noise variance
  double sigma_w2 = 0.5;  // inter-user (relay / partner) noise variance
  double c = 2.0;         // sigma_v^2 / sigma_w^2
};

/// E = 1; sigma_v^2 = 10^(-snr_db/10), sigma_w^2 = sigma_v^2 / c.
inline ChannelParams snr_to_variances(double snr_db, double c = 2.0) {
  require(c > 0.0, Errc::InvalidArgument, "noise ratio c must be positive");
  ChannelParams p;
  p.energy = 1.0;
  p.sigma_v2 = std::pow(10.0, -snr_db / 10.0);
  p.snr = p.energy / p.sigma_v2;
  p.c = c;
  p.sigma_w2 = p.sigma_v2 / c;
  return p;
}

/// Source->destination g1, relay->destination g2, source->relay h.
struct RelayRealization {
  cplx g1, g2, h;
};

/// Source j -> destination g_j, inter-source h.
struct CmaRealization {
  cplx g1, g2, h;
};

inline RelayRealization sample_relay_realization(Rng& rng) {
  const cplx g1 = complex_gaussian(rng);
  const cplx g2 = complex_gaussian(rng);
  const cplx h = complex_gaussian(rng);
  return {g1, g2, h};
}

inline RelayRealization sample_relay_realization(std::uint64_t seed) {
  Rng rng(seed);
  return sample_relay_realization(rng);
}

inline CmaRealization sample_cma_realization(Rng& rng) {
  const cplx g1 = complex_gaussian(rng);
  const cplx g2 = complex_gaussian(rng);
  const cplx h = complex_gaussian(rng);
  return {g1, g2, h};
}

inline CmaRealization sample_cma_realization(std::uint64_t seed) {
  Rng rng(seed);
  return sample_cma_realization(rng);
}

inline CVector add_noise(const CVector& signal, double variance, Rng& rng) {
  require(variance >= 0.0, Errc::InvalidArgument, "noise variance must be non-negative");
  CVector out = signal;
  if (variance == 0.0) return out;
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) += complex_gaussian(rng, variance);
  return out;
}

}  // namespace latcoop
