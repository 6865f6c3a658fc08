#pragma once

// Tree-search lattice decoding: Fano sequential decoder over an MMSE-DFE preprocessed system,
// an exhaustive ML oracle, and the glue that turns a linear channel + lattice code into a
// search problem.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "latcoop/error.hpp"
#include "latcoop/lattice_codec.hpp"
#include "latcoop/mathkit.hpp"

namespace latcoop {

enum class Boundary { Relaxed, Clamp };

struct DecoderConfig {
  double bias = 1.2;
  double step = 5.0;
  std::size_t max_nodes = 1'000'000;
  Boundary boundary = Boundary::Relaxed;

  void validate() const {
    require(bias > 0.0, Errc::Config, "decoder.bias must be positive");
    require(step > 0.0, Errc::Config, "decoder.step must be positive");
  }
};

enum class DecodeStatus { Converged, BudgetExhausted };

struct DecodeResult {
  IVector u;
  double metric = 0.0;
  std::size_t nodes = 0;
  DecodeStatus status = DecodeStatus::Converged;
};

inline std::size_t count_nodes(const DecodeResult& r) { return r.nodes; }

namespace detail {

/// Children of one tree node in order of increasing distance to the per-level estimate.
class ZigZag {
 public:
  void reset(double center, const IntInterval& bounds) {
    bounds_ = bounds;
    double r = std::floor(center + 0.5);
    r = std::clamp(r, static_cast<double>(bounds.lo), static_cast<double>(bounds.hi));
    base_ = static_cast<std::int64_t>(r);
    dir_ = (center >= static_cast<double>(base_)) ? 1 : -1;
    k_ = 0;
    valid_ = true;
    span_ = std::max(bounds.hi - base_, base_ - bounds.lo);
  }

  bool valid() const { return valid_; }
  std::int64_t value() const { return value_at(k_); }

  void advance() {
    while (true) {
      ++k_;
      const std::int64_t off = (k_ + 1) / 2;
      if (off > span_) {
        valid_ = false;
        return;
      }
      if (bounds_.contains(value_at(k_))) return;
    }
  }

 private:
  std::int64_t value_at(std::int64_t k) const {
    if (k == 0) return base_;
    const std::int64_t off = (k + 1) / 2;
    return (k % 2 == 1) ? base_ + dir_ * off : base_ - dir_ * off;
  }

  IntInterval bounds_;
  std::int64_t base_ = 0;
  std::int64_t dir_ = 1;
  std::int64_t k_ = 0;
  std::int64_t span_ = 0;
  bool valid_ = true;
};

}  // namespace detail

/// Fano sequential decoding of argmin_u |observation - generator*u|^2 over Z^m (or the box in
/// clamp mode). Path metric = bias*depth - partial residual^2; the threshold moves in
/// multiples of `step`. Returns the first full-depth leaf reached; on node-budget exhaustion
/// the current path is completed by rounding and flagged. In clamp mode candidates stay in
/// the per-column bounds and forced columns take their single admissible value, which keeps
/// the search inside the information set.
inline DecodeResult fano_decode(const PreprocessedSystem& sys, const DecoderConfig& cfg) {
  cfg.validate();
  const RMatrix& r = sys.generator;
  const RVector& y = sys.observation;
  const int m = static_cast<int>(r.cols());
  require(r.rows() == m && y.size() == m && m > 0, Errc::DimensionMismatch, "system must be square");
  for (int i = 0; i < m; ++i)
    require(r(i, i) > 0.0, Errc::InvalidArgument, "generator diagonal must be positive");

  const bool clamp = cfg.boundary == Boundary::Clamp && !sys.bounds.empty();
  require(!clamp || static_cast<int>(sys.bounds.size()) == m, Errc::DimensionMismatch, "bounds length mismatch");
  require(sys.forced.empty() || static_cast<int>(sys.forced.size()) == m, Errc::DimensionMismatch,
          "forced column list length mismatch");
  const bool pin = cfg.boundary == Boundary::Clamp && !sys.forced.empty();
  IVector u = IVector::Zero(m);
  auto bounds_of = [&](int col) {
    if (pin && sys.forced[col].divisor != 0) {
      std::int64_t acc = 0;
      for (const auto& [j, g] : sys.forced[col].terms) acc += g * u(j);
      const std::int64_t v = -floor_div(acc, sys.forced[col].divisor);
      return IntInterval{v, v};
    }
    return clamp ? sys.bounds[col] : IntInterval{};
  };

  // Last structurally nonzero column per row; QR of banded systems stays banded.
  std::vector<int> row_end(m);
  for (int i = 0; i < m; ++i) {
    int e = i;
    for (int j = m - 1; j > i; --j)
      if (r(i, j) != 0.0) {
        e = j;
        break;
      }
    row_end[i] = e;
  }

  std::vector<double> mu(m + 1, 0.0);
  std::vector<double> center(m, 0.0);
  std::vector<detail::ZigZag> kids(m);

  auto col_at = [m](int level) { return m - 1 - level; };
  auto init_level = [&](int level) {
    const int col = col_at(level);
    double s = y(col);
    for (int j = col + 1; j <= row_end[col]; ++j) s -= r(col, j) * static_cast<double>(u(j));
    center[level] = s / r(col, col);
    kids[level].reset(center[level], bounds_of(col));
  };
  auto branch = [&](int level, std::int64_t v) {
    const int col = col_at(level);
    const double e = r(col, col) * (static_cast<double>(v) - center[level]);
    return cfg.bias - e * e;
  };

  DecodeResult res;
  double threshold = 0.0;
  int level = 0;
  init_level(0);

  while (true) {
    bool forward = false;
    if (kids[level].valid()) {
      const std::int64_t v = kids[level].value();
      const double mf = mu[level] + branch(level, v);
      if (mf >= threshold) {
        if (res.nodes >= cfg.max_nodes) {
          res.status = DecodeStatus::BudgetExhausted;
          for (int l = level; l < m; ++l) {
            if (l > level) init_level(l);
            u(col_at(l)) = kids[l].value();
          }
          break;
        }
        ++res.nodes;
        u(col_at(level)) = v;
        mu[level + 1] = mf;
        if (mu[level] < threshold + cfg.step) {
          while (mf >= threshold + cfg.step) threshold += cfg.step;
        }
        ++level;
        if (level == m) break;
        init_level(level);
        forward = true;
      }
    }
    if (forward) continue;

    // Look back.
    while (true) {
      if (level == 0) {
        threshold -= cfg.step;
        kids[0].reset(center[0], bounds_of(col_at(0)));
        break;
      }
      if (mu[level - 1] >= threshold) {
        --level;
        kids[level].advance();
        if (kids[level].valid()) break;
      } else {
        threshold -= cfg.step;
        kids[level].reset(center[level], bounds_of(col_at(level)));
        break;
      }
    }
  }

  res.u = u;
  res.metric = (y - r * u.cast<double>()).squaredNorm();
  return res;
}

/// Exhaustive ML: argmin over the information set of |y - H eta - H G u|^2; ties go to the
/// lexicographically smallest u.
inline IVector ml_decode(const RVector& y, const RMatrix& h, const LatticeCode& code,
                         std::size_t max_size = 1u << 20) {
  require(h.cols() == code.dim() && h.rows() == y.size(), Errc::DimensionMismatch, "ml_decode dimension mismatch");
  const auto book = enumerate_codebook(code, max_size);
  const RVector target = y - h * code.translate;
  const RMatrix hg = h * code.generator.cast<double>();
  double best = std::numeric_limits<double>::infinity();
  IVector best_u;
  for (const auto& [u, x] : book) {
    const double d = (target - hg * u.cast<double>()).squaredNorm();
    if (d < best) {
      best = d;
      best_u = u;
    }
  }
  return best_u;
}

// ---------------------------------------------------------------------------------------------

/// Real observation y = A a + z of the amplitude vector a = scale*(G u + eta) - offset, where z
/// has variance noise_var per coordinate and a has prior variance amplitude_var per coordinate.
struct LatticeLink {
  RMatrix channel;
  RVector observation;
  double noise_var = 0.5;
  double amplitude_scale = 1.0;
  double amplitude_offset = 0.0;
  double amplitude_var = 1.0;
  bool diagonal = false;  // channel is diagonal; enables the per-coordinate MMSE-DFE
};

struct LinkDecode {
  IVector u;
  std::vector<int> info;
  bool in_set = false;
  std::size_t nodes = 0;
  DecodeStatus status = DecodeStatus::Converged;
};

/// Builds the MMSE-DFE search problem of a link. The system is first scaled so each real
/// noise coordinate has unit variance, the scale the bias refers to; the regularizer penalizes
/// |a(u)|^2 in amplitude space. Columns are reversed so the code's first column is decided
/// first by the upper-triangular search.
inline PreprocessedSystem preprocess_link(const LatticeLink& link, const LatticeCode& code) {
  const int m = code.dim();
  require(link.channel.cols() == m, Errc::DimensionMismatch, "channel columns must equal code dimension");
  require(link.channel.rows() == link.observation.size(), Errc::DimensionMismatch, "observation length mismatch");
  require(link.amplitude_var > 0.0 && link.amplitude_scale > 0.0, Errc::InvalidArgument, "bad amplitude model");

  const double noise_var = std::max(link.noise_var, 1e-12);
  const double f = std::sqrt(1.0 / noise_var);
  const double nts = 1.0 / link.amplitude_var;
  const double s = link.amplitude_scale;
  const RVector t = (s * code.translate).array() - link.amplitude_offset;
  const RMatrix g = code.generator.cast<double>();

  PreprocessedSystem sys;
  if (link.diagonal) {
    require(link.channel.rows() == m, Errc::DimensionMismatch, "diagonal channel must be square");
    // [D; sqrt(nts) I] factors per coordinate; ordering rows like their owning columns keeps
    // diag(rho)*G lower triangular, and reversing both axes makes it upper triangular.
    sys.generator = RMatrix::Zero(m, m);
    sys.observation = RVector(m);
    for (int c = 0; c < m; ++c) {
      const int row = code.own_row[c];
      const double d = f * link.channel(row, row);
      const double rho = std::sqrt(d * d + nts);
      const double yprime = f * link.observation(row) - d * t(row);
      const double combined = (d * yprime - nts * t(row)) / rho;
      const int rc = m - 1 - c;
      sys.observation(rc) = combined;
      for (int c2 = 0; c2 <= c; ++c2) {
        if (g(row, c2) != 0.0) sys.generator(rc, m - 1 - c2) = rho * s * g(row, c2);
      }
    }
  } else {
    const RMatrix a = f * link.channel;
    const RVector yprime = f * link.observation - a * t;
    RMatrix k = a * (s * g);
    RMatrix reg = std::sqrt(nts) * s * g;
    k = k.rowwise().reverse().eval();
    reg = reg.rowwise().reverse().eval();
    const RVector target = -std::sqrt(nts) * t;
    sys = mmse_dfe_preprocess(k, reg, yprime, target);
  }
  sys.noise_scale = std::sqrt(nts);
  sys.forced.assign(m, ForcedColumn{});
  for (int c = 0; c < m; ++c) {
    if (code.info[c]) continue;
    const int r = code.own_row[c];
    ForcedColumn& fc = sys.forced[m - 1 - c];
    fc.divisor = code.generator(r, c);
    for (int c2 = 0; c2 < c; ++c2)
      if (code.generator(r, c2) != 0) fc.terms.emplace_back(m - 1 - c2, code.generator(r, c2));
  }
  auto b = code.coordinate_bounds();
  std::reverse(b.begin(), b.end());
  sys.bounds = std::move(b);
  return sys;
}

inline LinkDecode decode_link(const LatticeLink& link, const LatticeCode& code, const DecoderConfig& cfg) {
  const PreprocessedSystem sys = preprocess_link(link, code);
  const DecodeResult r = fano_decode(sys, cfg);
  LinkDecode out;
  out.u = r.u.reverse();
  out.nodes = r.nodes;
  out.status = r.status;
  out.in_set = code.in_information_set(out.u);
  out.info = code.info_of(out.u);
  return out;
}

}  // namespace latcoop
