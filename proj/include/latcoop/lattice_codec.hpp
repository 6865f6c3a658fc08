#pragma once

// Construction-A lattice codes built from systematic convolutional codes over Z_Q,
// hypercubic shaping, CRC-16 framing and the Z_Q -> amplitude map.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "latcoop/error.hpp"
#include "latcoop/mathkit.hpp"

namespace latcoop {

constexpr bool is_prime(int q) {
  if (q < 2) return false;
  for (int d = 2; d * d <= q; ++d)
    if (q % d == 0) return false;
  return true;
}

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t d = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --d;
  return d;
}

constexpr std::int64_t mod_q(std::int64_t a, std::int64_t q) { return a - q * floor_div(a, q); }

/// Systematic rate-1/n convolutional code over Z_Q, zero-tail terminated.
/// parity_taps[s][d] multiplies the input d steps in the past for parity stream s+1.
struct ConvCode {
  int q = 5;
  int n = 2;
  int memory = 2;
  std::vector<std::vector<int>> parity_taps;

  static ConvCode rate_half(int q) { return ConvCode{q, 2, 2, {{1, 2, 1}}}.reduced(); }

  static ConvCode rate_quarter(int q) { return ConvCode{q, 4, 2, {{1, 2, 1}, {1, 1, 2}, {2, 1, 1}}}.reduced(); }

  /// Memory-2 taps picked by random search for a large minimum lattice norm over short input
  /// patterns. The rate-1/4 sets start with the rate-1/2 set, so the systematic stream plus
  /// the first parity stream is itself a good code. Other Q fall back to the small taps.
  ///   Q   n  taps                              min |x|^2 (small taps)
  ///   5   2  (2,1,3)                           10  (6)
  ///   5   4  (2,1,3) (4,3,2) (2,4,4)           25  (18)
  ///   17  2  (4,6,13)                          46  (6)
  ///   17  4  (4,6,13) (8,14,8) (2,1,15)        213 (18)
  ///   67  2  (40,29,11)                        242 (6)
  ///   67  4  (40,29,11) (29,55,17) (4,42,48)   1927 (18)
  static ConvCode tuned(int q, int n) {
    require(n == 2 || n == 4, Errc::InvalidArgument, "tuned codes exist for rate 1/2 and 1/4");
    using T = std::vector<std::vector<int>>;
    T taps;
    if (n == 2) {
      if (q == 5) taps = {{2, 1, 3}};
      if (q == 17) taps = {{4, 6, 13}};
      if (q == 67) taps = {{40, 29, 11}};
    } else {
      if (q == 5) taps = {{2, 1, 3}, {4, 3, 2}, {2, 4, 4}};
      if (q == 17) taps = {{4, 6, 13}, {8, 14, 8}, {2, 1, 15}};
      if (q == 67) taps = {{40, 29, 11}, {29, 55, 17}, {4, 42, 48}};
    }
    if (taps.empty()) return n == 2 ? rate_half(q) : rate_quarter(q);
    return ConvCode{q, n, 2, std::move(taps)};
  }

  ConvCode reduced() const {
    ConvCode c = *this;
    for (auto& taps : c.parity_taps)
      for (auto& t : taps) t = static_cast<int>(mod_q(t, q));
    return c;
  }

  void validate() const {
    require(is_prime(q), Errc::NotPrime, "Q=" + std::to_string(q) + " is not prime");
    require(n >= 2, Errc::InvalidArgument, "convolutional code needs at least two output streams");
    require(memory >= 0, Errc::InvalidArgument, "memory must be non-negative");
    require(static_cast<int>(parity_taps.size()) == n - 1, Errc::InvalidArgument, "need n-1 parity tap sets");
    for (const auto& taps : parity_taps)
      require(static_cast<int>(taps.size()) == memory + 1, Errc::InvalidArgument, "each tap set needs memory+1 taps");
  }

  /// Trellis-order output: step t emits streams 0..n-1 at positions t*n+s.
  std::vector<int> encode(std::span<const int> info) const {
    const int steps = static_cast<int>(info.size()) + memory;
    std::vector<int> out(static_cast<std::size_t>(steps) * n, 0);
    auto input = [&](int t) -> std::int64_t {
      return (t >= 0 && t < static_cast<int>(info.size())) ? info[t] : 0;
    };
    for (int t = 0; t < steps; ++t) {
      out[t * n] = static_cast<int>(mod_q(input(t), q));
      for (int s = 1; s < n; ++s) {
        std::int64_t acc = 0;
        for (int d = 0; d <= memory; ++d) acc += parity_taps[s - 1][d] * input(t - d);
        out[t * n + s] = static_cast<int>(mod_q(acc, q));
      }
    }
    return out;
  }
};

/// Lattice code {G u + eta : u in U} with hypercubic shaping.
///
/// Rows of the generator are codeword coordinates in transmission order; columns are lattice
/// coordinates in the order a tree search decides them. Every column owns one row; that row has
/// no entries in later columns and its own entry is 1 (information column) or Q (check column),
/// so permuting information rows/columns first exposes the [[I,0],[P,QI]] block form.
struct LatticeCode {
  int q = 2;
  IMatrix generator;
  RVector translate;
  std::vector<int> own_row;
  std::vector<bool> info;

  int dim() const { return static_cast<int>(generator.cols()); }

  int info_dim() const { return static_cast<int>(std::count(info.begin(), info.end(), true)); }

  std::vector<int> info_columns() const {
    std::vector<int> cols;
    for (int c = 0; c < dim(); ++c)
      if (info[c]) cols.push_back(c);
    return cols;
  }

  /// Identity lattice Z^m restricted to {0..Q-1}^m (uncoded PAM/QAM); Q need not be prime.
  static LatticeCode uncoded(int dim, int q) {
    require(dim > 0 && q >= 2, Errc::InvalidArgument, "uncoded code needs dim > 0 and Q >= 2");
    LatticeCode c;
    c.q = q;
    c.generator = IMatrix::Identity(dim, dim);
    c.translate = RVector::Zero(dim);
    c.own_row.resize(dim);
    std::iota(c.own_row.begin(), c.own_row.end(), 0);
    c.info.assign(dim, true);
    return c;
  }

  void validate() const {
    const int m = dim();
    require(generator.rows() == m && m > 0, Errc::DimensionMismatch, "generator must be square");
    require(translate.size() == m, Errc::DimensionMismatch, "translate length mismatch");
    require(static_cast<int>(own_row.size()) == m && static_cast<int>(info.size()) == m, Errc::DimensionMismatch,
            "column metadata length mismatch");
    std::vector<bool> seen(m, false);
    for (int c = 0; c < m; ++c) {
      const int r = own_row[c];
      require(r >= 0 && r < m && !seen[r], Errc::InvalidArgument, "own_row must be a permutation");
      seen[r] = true;
      require(generator(r, c) == (info[c] ? 1 : q), Errc::InvalidArgument, "own entry must be 1 or Q");
      for (int c2 = c + 1; c2 < m; ++c2)
        require(generator(r, c2) == 0, Errc::InvalidArgument, "owned row depends on a later column");
    }
  }

  /// Completes information symbols into the unique u whose codeword G u lies in [0,Q)^m.
  IVector lift(std::span<const int> info_symbols) const {
    require(static_cast<int>(info_symbols.size()) == info_dim(), Errc::DimensionMismatch, "info length mismatch");
    IVector u = IVector::Zero(dim());
    std::size_t next = 0;
    for (int c = 0; c < dim(); ++c) {
      if (info[c]) {
        const int s = info_symbols[next++];
        require(s >= 0 && s < q, Errc::OutOfShapingRegion, "information symbol outside [0,Q)");
        u(c) = s;
      } else {
        const int r = own_row[c];
        std::int64_t acc = 0;
        for (int c2 = 0; c2 < c; ++c2) acc += generator(r, c2) * u(c2);
        u(c) = -floor_div(acc, generator(r, c));
      }
    }
    return u;
  }

  std::vector<int> info_of(const IVector& u) const {
    std::vector<int> out;
    out.reserve(info_dim());
    for (int c = 0; c < dim(); ++c)
      if (info[c]) out.push_back(static_cast<int>(u(c)));
    return out;
  }

  IVector codeword(const IVector& u) const { return generator * u; }

  bool in_information_set(const IVector& u) const {
    if (u.size() != dim()) return false;
    for (int c = 0; c < dim(); ++c)
      if (info[c] && (u(c) < 0 || u(c) >= q)) return false;
    const IVector x = codeword(u);
    return (x.array() >= 0).all() && (x.array() < q).all();
  }

  /// Per-column integer intervals containing every member of the information set.
  std::vector<IntInterval> coordinate_bounds() const {
    std::vector<IntInterval> b(dim());
    for (int c = 0; c < dim(); ++c) {
      if (info[c]) {
        b[c] = {0, q - 1};
        continue;
      }
      const int r = own_row[c];
      std::int64_t lo = 0, hi = 0;
      for (int c2 = 0; c2 < c; ++c2) {
        const std::int64_t g = generator(r, c2);
        if (g == 0) continue;
        const std::int64_t a = g * b[c2].lo, z = g * b[c2].hi;
        lo += std::min(a, z);
        hi += std::max(a, z);
      }
      const std::int64_t d = generator(r, c);
      b[c] = {-floor_div(hi, d), -floor_div(lo, d)};
    }
    return b;
  }

  /// Sub-code seen through a subset of codeword coordinates: keeps those rows and their own
  /// columns. Every kept row must depend only on kept columns.
  LatticeCode restrict_rows(std::span<const int> rows) const {
    std::vector<int> col_of_row(dim(), -1);
    for (int c = 0; c < dim(); ++c) col_of_row[own_row[c]] = c;
    std::vector<int> sorted_rows(rows.begin(), rows.end());
    std::sort(sorted_rows.begin(), sorted_rows.end());
    std::vector<int> cols;
    for (int r : sorted_rows) cols.push_back(col_of_row.at(r));
    std::sort(cols.begin(), cols.end());

    std::vector<int> new_col(dim(), -1), new_row(dim(), -1);
    for (std::size_t i = 0; i < cols.size(); ++i) new_col[cols[i]] = static_cast<int>(i);
    for (std::size_t i = 0; i < sorted_rows.size(); ++i) new_row[sorted_rows[i]] = static_cast<int>(i);

    const int k = static_cast<int>(cols.size());
    LatticeCode sub;
    sub.q = q;
    sub.generator = IMatrix::Zero(k, k);
    sub.translate = RVector(k);
    sub.own_row.resize(k);
    sub.info.resize(k);
    for (int i = 0; i < k; ++i) {
      const int r = sorted_rows[i];
      sub.translate(i) = translate(r);
      for (int c = 0; c < dim(); ++c) {
        if (generator(r, c) == 0) continue;
        require(new_col[c] >= 0, Errc::InvalidArgument, "restricted rows depend on dropped columns");
        sub.generator(i, new_col[c]) = generator(r, c);
      }
    }
    for (int i = 0; i < k; ++i) {
      sub.own_row[i] = new_row[own_row[cols[i]]];
      sub.info[i] = info[cols[i]];
    }
    return sub;
  }
};

/// Lattice code of a zero-tail terminated systematic CC with `length` coded symbols.
/// Columns follow the trellis: step t contributes its information (or tail) column, then one
/// check column per parity stream, so the generator is lower triangular.
inline LatticeCode build_construction_a(const ConvCode& cc_in, int length) {
  const ConvCode cc = cc_in.reduced();
  cc.validate();
  require(length > 0 && length % cc.n == 0, Errc::InvalidArgument, "length must be a multiple of n");
  const int steps = length / cc.n;
  const int info_len = steps - cc.memory;
  require(info_len >= 1, Errc::InvalidArgument, "length too short for the code memory");

  LatticeCode code;
  code.q = cc.q;
  code.generator = IMatrix::Zero(length, length);
  code.translate = RVector::Zero(length);
  code.own_row.resize(length);
  code.info.assign(length, false);
  for (int t = 0; t < steps; ++t) {
    const int sys = t * cc.n;
    code.own_row[sys] = sys;
    code.info[sys] = t < info_len;
    code.generator(sys, sys) = code.info[sys] ? 1 : cc.q;
    for (int s = 1; s < cc.n; ++s) {
      const int r = t * cc.n + s;
      code.own_row[r] = r;
      code.generator(r, r) = cc.q;
      for (int d = 0; d <= cc.memory; ++d) {
        const int src = t - d;
        if (src >= 0 && src < info_len) code.generator(r, src * cc.n) = cc.parity_taps[s - 1][d];
      }
    }
  }
  return code;
}

/// x = G u + eta for u in the information set.
inline RVector encode(const LatticeCode& code, const IVector& u) {
  require(u.size() == code.dim(), Errc::DimensionMismatch, "u length mismatch");
  if (!code.in_information_set(u)) throw Error(Errc::OutOfShapingRegion, "u is outside the information set");
  return code.codeword(u).cast<double>() + code.translate;
}

/// Scale making the centred uniform Q-ary alphabet unit-energy per real dimension.
inline double amplitude_scale(int q) { return std::sqrt(12.0 / (static_cast<double>(q) * q - 1.0)); }

inline RVector map_to_amplitudes(const RVector& symbols, int q) {
  const double kappa = amplitude_scale(q);
  return ((symbols.array() - 0.5 * (q - 1)) * kappa).matrix();
}

inline RVector map_to_amplitudes(std::span<const int> symbols, int q) {
  RVector s(static_cast<Eigen::Index>(symbols.size()));
  for (std::size_t i = 0; i < symbols.size(); ++i) s(static_cast<Eigen::Index>(i)) = symbols[i];
  return map_to_amplitudes(s, q);
}

inline std::vector<std::pair<IVector, RVector>> enumerate_codebook(const LatticeCode& code, std::size_t max_size) {
  const int k = code.info_dim();
  std::size_t size = 1;
  for (int i = 0; i < k; ++i) {
    if (size > max_size / static_cast<std::size_t>(code.q))
      throw Error(Errc::CodebookTooLarge, "codebook exceeds " + std::to_string(max_size) + " entries");
    size *= static_cast<std::size_t>(code.q);
  }
  require(size <= max_size, Errc::CodebookTooLarge, "codebook exceeds " + std::to_string(max_size) + " entries");

  std::vector<std::pair<IVector, RVector>> book;
  book.reserve(size);
  std::vector<int> digits(k, 0);
  for (std::size_t n = 0; n < size; ++n) {
    IVector u = code.lift(digits);
    RVector x = code.codeword(u).cast<double>() + code.translate;
    book.emplace_back(std::move(u), std::move(x));
    for (int i = k - 1; i >= 0; --i) {  // lexicographic increment, last digit fastest
      if (++digits[i] < code.q) break;
      digits[i] = 0;
    }
  }
  return book;
}

// ---------------------------------------------------------------------------------------------
// CRC-16/CCITT-FALSE framing (poly 0x1021, init 0xFFFF, no reflection, no final xor).

inline std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> bytes) {
  std::uint16_t crc = 0xFFFF;
  for (std::uint8_t byte : bytes) {
    crc ^= static_cast<std::uint16_t>(byte) << 8;
    for (int i = 0; i < 8; ++i)
      crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021) : static_cast<std::uint16_t>(crc << 1);
  }
  return crc;
}

inline int crc_bits_per_symbol(int q) {
  require(q >= 2, Errc::InvalidArgument, "Q must be at least 2");
  int bits = 0;
  while ((2 << bits) <= q) ++bits;
  return bits;  // floor(log2 q)
}

inline int crc_symbol_count(int q) {
  const int b = crc_bits_per_symbol(q);
  return (16 + b - 1) / b;
}

struct InfoFrame {
  std::vector<int> payload;
  std::vector<int> crc;

  std::vector<int> joined() const {
    std::vector<int> all = payload;
    all.insert(all.end(), crc.begin(), crc.end());
    return all;
  }
};

namespace detail {

inline std::uint16_t payload_crc(std::span<const int> payload) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(payload.size());
  for (int s : payload) bytes.push_back(static_cast<std::uint8_t>(s & 0xFF));
  return crc16_ccitt_false(bytes);
}

}  // namespace detail

/// Appends the checksum, packed MSB-first into floor(log2 Q)-bit symbols.
inline InfoFrame crc_append(std::span<const int> payload, int q) {
  InfoFrame f;
  f.payload.assign(payload.begin(), payload.end());
  const std::uint16_t crc = detail::payload_crc(payload);
  const int b = crc_bits_per_symbol(q);
  const int count = crc_symbol_count(q);
  for (int i = 0; i < count; ++i) {
    const int shift = (count - 1 - i) * b;
    f.crc.push_back(static_cast<int>((static_cast<std::uint32_t>(crc) >> shift) & ((1u << b) - 1u)));
  }
  return f;
}

inline bool crc_check(const InfoFrame& f, int q) {
  const int b = crc_bits_per_symbol(q);
  if (static_cast<int>(f.crc.size()) != crc_symbol_count(q)) return false;
  std::uint32_t packed = 0;
  for (int s : f.crc) {
    if (s < 0 || s >= (1 << b)) return false;
    packed = (packed << b) | static_cast<std::uint32_t>(s);
  }
  if (packed > 0xFFFFu) return false;
  for (int s : f.payload)
    if (s < 0 || s >= q) return false;
  return packed == detail::payload_crc(f.payload);
}

/// Splits payload||crc and checks it.
inline bool crc_check(std::span<const int> joined, int q) {
  const int count = crc_symbol_count(q);
  if (static_cast<int>(joined.size()) < count) return false;
  InfoFrame f;
  f.payload.assign(joined.begin(), joined.end() - count);
  f.crc.assign(joined.end() - count, joined.end());
  return crc_check(f, q);
}

}  // namespace latcoop
