#pragma once

// Complex/real embeddings, whitening and MMSE-DFE preprocessing shared by
// every decoder in the library.

#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/QR>

#include "latcoop/error.hpp"

namespace latcoop {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using IMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using IVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

/// Closed integer interval used for per-coordinate search bounds.
struct IntInterval {
  std::int64_t lo = std::numeric_limits<std::int64_t>::min() / 4;
  std::int64_t hi = std::numeric_limits<std::int64_t>::max() / 4;

  bool contains(std::int64_t v) const { return v >= lo && v <= hi; }
};

/// Real 2r x 2c embedding: entry a+ib becomes the block [[a,-b],[b,a]].
/// With this convention embed(A*B) == embed(A)*embed(B).
inline RMatrix embed_complex(const CMatrix& m) {
  RMatrix out(2 * m.rows(), 2 * m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double a = m(i, j).real();
      const double b = m(i, j).imag();
      out(2 * i, 2 * j) = a;
      out(2 * i, 2 * j + 1) = -b;
      out(2 * i + 1, 2 * j) = b;
      out(2 * i + 1, 2 * j + 1) = a;
    }
  }
  return out;
}

/// Interleaved (re, im) real vector; the first column of embed_complex(v).
inline RVector embed_vector(const CVector& v) {
  RVector out(2 * v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out(2 * i) = v(i).real();
    out(2 * i + 1) = v(i).imag();
  }
  return out;
}

inline CVector unembed_vector(const RVector& v) {
  require(v.size() % 2 == 0, Errc::DimensionMismatch, "real vector length must be even");
  CVector out(v.size() / 2);
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = cplx(v(2 * i), v(2 * i + 1));
  return out;
}

/// Whitening matrix W with W*S*W^H = I, computed as the inverse Cholesky factor.
/// W is lower triangular, not the Hermitian square root.
inline CMatrix inverse_sqrt(const CMatrix& s) {
  require(s.rows() == s.cols() && s.rows() > 0, Errc::DimensionMismatch, "inverse_sqrt needs a square matrix");
  Eigen::LLT<CMatrix> llt(s);
  if (llt.info() != Eigen::Success) throw Error(Errc::NotPositiveDefinite, "Cholesky factorization failed");
  const CMatrix l = llt.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i).real() > 0.0) || !std::isfinite(l(i, i).real()))
      throw Error(Errc::NotPositiveDefinite, "non-positive pivot in Cholesky factor");
  }
  CMatrix w = CMatrix::Identity(s.rows(), s.cols());
  l.triangularView<Eigen::Lower>().solveInPlace(w);
  return w;
}

/// Upper-triangular search problem |observation - generator*u|^2 handed to the tree search.
/// Column j of the generator is decided after columns j+1..m-1.
/// Column whose value is pinned by already-decided columns: -floor(sum(coef * u_j) / divisor).
struct ForcedColumn {
  std::vector<std::pair<int, std::int64_t>> terms;
  std::int64_t divisor = 0;  // 0: free column
};

struct PreprocessedSystem {
  RVector observation;
  RMatrix generator;
  double noise_scale = 0.0;
  std::vector<IntInterval> bounds;  // per column; empty means unbounded
  std::vector<ForcedColumn> forced;  // per column; empty means none
};

namespace detail {

inline void make_diagonal_positive(PreprocessedSystem& sys) {
  for (Eigen::Index i = 0; i < sys.generator.rows(); ++i) {
    if (sys.generator(i, i) < 0.0) {
      sys.generator.row(i) *= -1.0;
      sys.observation(i) *= -1.0;
    }
  }
}

}  // namespace detail

/// General MMSE-DFE form: minimizes |y - H u|^2 + |reg*u - reg_target|^2 by factoring the
/// stacked matrix [H; reg]. The returned metric differs from that cost by a constant.
inline PreprocessedSystem mmse_dfe_preprocess(const RMatrix& h, const RMatrix& reg, const RVector& y,
                                              const RVector& reg_target) {
  const Eigen::Index n = h.rows();
  const Eigen::Index m = h.cols();
  require(y.size() == n, Errc::DimensionMismatch, "observation length does not match channel rows");
  require(reg.rows() == m && reg.cols() == m, Errc::DimensionMismatch, "regularizer must be m x m");
  require(reg_target.size() == m, Errc::DimensionMismatch, "regularizer target must have length m");

  RMatrix aug(n + m, m);
  aug.topRows(n) = h;
  aug.bottomRows(m) = reg;
  RVector rhs(n + m);
  rhs.head(n) = y;
  rhs.tail(m) = reg_target;

  Eigen::HouseholderQR<RMatrix> qr(aug);
  PreprocessedSystem sys;
  sys.generator = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();
  sys.observation = (qr.householderQ().adjoint() * rhs).head(m);
  detail::make_diagonal_positive(sys);
  return sys;
}

/// MMSE-DFE preprocessing with regularizer sqrt(noise_to_signal)*I: metric equals
/// |y - H u|^2 + noise_to_signal*|u|^2 up to an additive constant.
inline PreprocessedSystem mmse_dfe_preprocess(const RMatrix& h, double noise_to_signal, const RVector& y) {
  require(noise_to_signal > 0.0, Errc::InvalidArgument, "noise_to_signal must be positive");
  const Eigen::Index m = h.cols();
  PreprocessedSystem sys = mmse_dfe_preprocess(h, std::sqrt(noise_to_signal) * RMatrix::Identity(m, m), y,
                                               RVector::Zero(m));
  sys.noise_scale = std::sqrt(noise_to_signal);
  return sys;
}

}  // namespace latcoop
