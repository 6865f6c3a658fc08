#pragma once

// Golden constellation generator, Golden+CC concatenation and Alamouti pairing used by the
// relay protocols.

#include <cmath>
#include <utility>

#include "latcoop/error.hpp"
#include "latcoop/lattice_codec.hpp"
#include "latcoop/mathkit.hpp"

namespace latcoop {

struct GoldenConstants {
  static inline const double theta = (1.0 + std::sqrt(5.0)) / 2.0;
  static inline const double theta_bar = 1.0 - theta;
  static inline const cplx alpha = cplx(1.0, theta_bar);
  static inline const cplx alpha_bar = cplx(1.0, theta);
};

/// 4x4 complex Golden generator. Output rows 1,3 go out in slot 1 of consecutive
/// cooperation frames, rows 2,4 in slot 2: x = (frame1 slot1, frame1 slot2, frame2 slot1,
/// frame2 slot2). The matrix is unitary, so the encoding preserves energy.
inline CMatrix golden_generator() {
  using G = GoldenConstants;
  const cplx i(0.0, 1.0);
  CMatrix g = CMatrix::Zero(4, 4);
  g(0, 0) = G::alpha;
  g(0, 1) = G::alpha * G::theta;
  g(1, 2) = i * G::alpha_bar;
  g(1, 3) = i * G::alpha_bar * G::theta_bar;
  g(2, 2) = G::alpha;
  g(2, 3) = G::alpha * G::theta;
  g(3, 0) = G::alpha_bar;
  g(3, 1) = G::alpha_bar * G::theta_bar;
  return g / std::sqrt(5.0);
}

/// Encodes four complex QAM symbols into the four transmitted symbols of one Golden block.
inline CVector golden_encode(const CVector& u) {
  require(u.size() == 4, Errc::DimensionMismatch, "Golden block takes four complex symbols");
  return golden_generator() * u;
}

/// 2x2 dispersion matrix: rows are slots (antennas), columns are cooperation frames.
inline CMatrix golden_codeword_matrix(const CVector& x) {
  require(x.size() == 4, Errc::DimensionMismatch, "Golden block has four symbols");
  CMatrix m(2, 2);
  m << x(0), x(2), x(1), x(3);
  return m;
}

/// (I_{N/2} kron G_gc^(r)) * G_cc for a code spanning `frames` cooperation frames
/// (4*frames real coordinates).
inline RMatrix concat_generator(const CMatrix& golden, const RMatrix& cc_generator, int frames) {
  require(frames > 0 && frames % 2 == 0, Errc::InvalidArgument, "frame count must be even");
  require(golden.rows() == 4 && golden.cols() == 4, Errc::DimensionMismatch, "Golden generator must be 4x4");
  const Eigen::Index m = 4 * frames;
  require(cc_generator.rows() == m && cc_generator.cols() == m, Errc::DimensionMismatch,
          "code dimension must equal 4*frames");
  const RMatrix block = embed_complex(golden);
  RMatrix out(m, m);
  for (Eigen::Index b = 0; b < m / 8; ++b) out.middleRows(8 * b, 8).noalias() = block * cc_generator.middleRows(8 * b, 8);
  return out;
}

inline RMatrix concat_generator(const CMatrix& golden, const LatticeCode& cc, int frames) {
  return concat_generator(golden, cc.generator.cast<double>(), frames);
}

/// Relay transmissions over a symbol pair (k, k+1): (x*_{k+1}, -x*_k).
struct AlamoutiPair {
  cplx first;
  cplx second;
};

inline AlamoutiPair alamouti_retransmit(cplx xk, cplx xk1) { return {std::conj(xk1), -std::conj(xk)}; }

/// Linear combining of y_k = g1 x_k + g2 x*_{k+1} + v_k, y_{k+1} = g1 x_{k+1} - g2 x*_k + v_{k+1}.
/// Both outputs equal sqrt(|g1|^2+|g2|^2) x + noise with the input noise variance.
inline std::pair<cplx, cplx> alamouti_combine(cplx yk, cplx yk1, cplx g1, cplx g2) {
  const double norm = std::sqrt(std::norm(g1) + std::norm(g2));
  if (!(norm > 0.0)) throw Error(Errc::ZeroChannel, "both Alamouti branch gains are zero");
  const cplx a = (std::conj(g1) * yk - g2 * std::conj(yk1)) / norm;
  const cplx b = std::conj(std::conj(g2) * yk + g1 * std::conj(yk1)) / norm;
  return {a, b};
}

}  // namespace latcoop
