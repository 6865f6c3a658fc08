#pragma once

// Two-user cooperative multiple access with non-orthogonal amplify-and-forward (CMA-NAF).
// Sources alternate; each transmission is a*x + b*(h*partner's last transmission + noise).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <tuple>
#include <vector>

#include "latcoop/channels.hpp"
#include "latcoop/decoder.hpp"
#include "latcoop/error.hpp"
#include "latcoop/lattice_codec.hpp"
#include "latcoop/mathkit.hpp"
#include "latcoop/trial.hpp"

namespace latcoop {

struct CmaGains {
  double a = 1.0;  // broadcast
  double b = 0.0;  // repetition
};

/// Long-run per-source power a^2 E + b^2 (E|h|^2 P + sigma_w^2) at its fixed point, with the
/// inter-source gain averaged (E|h|^2 = 1). Requires b < 1.
inline double cma_steady_state_power(const CmaGains& g, const ChannelParams& p) {
  require(g.a >= 0.0 && g.b >= 0.0, Errc::InvalidArgument, "gains must be non-negative");
  if (g.b >= 1.0) return std::numeric_limits<double>::infinity();
  return (g.a * g.a * p.energy + g.b * g.b * p.sigma_w2) / (1.0 - g.b * g.b);
}

/// Largest a meeting the power budget E for a given b; negative radicand means infeasible.
inline std::optional<double> cma_max_broadcast_gain(double b, const ChannelParams& p) {
  if (b < 0.0 || b >= 1.0) return std::nullopt;
  const double a2 = ((1.0 - b * b) * p.energy - b * b * p.sigma_w2) / p.energy;
  if (a2 < 0.0) return std::nullopt;
  return std::sqrt(a2);
}

/// Monte Carlo audit of the per-source power: runs the recursion with a fresh inter-source
/// gain per step and averages |t|^2 after a burn-in.
inline double cma_measured_power(const CmaGains& g, const ChannelParams& p, int samples, Rng& rng,
                                 int burn_in = 200) {
  require(samples > 0, Errc::InvalidArgument, "need at least one sample");
  cplx t{};
  double acc = 0.0;
  std::uniform_int_distribution<int> bit(0, 1);
  const double amp = std::sqrt(p.energy / 2.0);
  for (int k = 0; k < burn_in + samples; ++k) {
    const cplx x(amp * (2 * bit(rng) - 1), amp * (2 * bit(rng) - 1));
    const cplx h = complex_gaussian(rng);
    t = g.a * x + g.b * (h * t + complex_gaussian(rng, p.sigma_w2));
    if (k >= burn_in) acc += std::norm(t);
  }
  return acc / samples;
}

struct CmaSystem {
  CMatrix h1;     // N x N, destination order
  CMatrix b;      // N x (N-1)
  CMatrix sigma;  // sigma_w^2 B B^H + sigma_v^2 I
  CVector dg;     // diag(g2, g1, ..., g2, g1)
};

/// Destination-order model y = H1 x + B w + v with y = [y_{2,N/2}, y_{1,N/2}, ..., y_{1,1}].
/// Entry (i,j) of H1 is a g (bh)^(j-i) for j >= i.
inline CmaSystem build_cma_system(const CmaGains& g, const CmaRealization& rz, int n, const ChannelParams& p) {
  require(n >= 2 && n % 2 == 0, Errc::InvalidArgument, "CMA frame length must be even");
  const cplx bh = g.b * rz.h;
  std::vector<cplx> pw(n + 1);
  pw[0] = 1.0;
  for (int k = 1; k <= n; ++k) pw[k] = pw[k - 1] * bh;

  CmaSystem s;
  s.dg.resize(n);
  for (int i = 0; i < n; ++i) s.dg(i) = (i % 2 == 0) ? rz.g2 : rz.g1;
  s.h1 = CMatrix::Zero(n, n);
  s.b = CMatrix::Zero(n, n - 1);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) s.h1(i, j) = g.a * s.dg(i) * pw[j - i];
    if (i < n - 1)
      for (int l = i; l < n - 1; ++l) s.b(i, l) = g.b * s.dg(i) * pw[l - i];
  }
  s.sigma = p.sigma_w2 * s.b * s.b.adjoint() + p.sigma_v2 * CMatrix::Identity(n, n);
  return s;
}

struct Whitened {
  CMatrix channel;
  CVector observation;
};

/// Sigma^{-1/2} y and Sigma^{-1/2} H1 with the Cholesky inverse square root.
inline Whitened whiten(const CmaSystem& s, const CVector& y) {
  require(y.size() == s.h1.rows(), Errc::DimensionMismatch, "observation length mismatch");
  const CMatrix w = inverse_sqrt(s.sigma);
  return {w * s.h1, w * y};
}

struct CmaSignals {
  CVector transmitted;  // time order t_1 .. t_N (user 1 at odd instants)
  CVector observed;     // destination order
  CVector relay_noise;  // w_2 .. w_N in time order
};

/// Runs the transmission recursion for one codeword. x1, x2 hold each user's N/2 symbols.
inline CmaSignals generate_signals(const CmaGains& g, const CmaRealization& rz, const CVector& x1, const CVector& x2,
                                   const ChannelParams& p, Rng& rng, bool noiseless = false) {
  require(x1.size() == x2.size() && x1.size() > 0, Errc::DimensionMismatch, "user streams must have equal length");
  const Eigen::Index n = 2 * x1.size();
  CmaSignals out;
  out.transmitted.resize(n);
  out.relay_noise = CVector::Zero(n - 1);
  CVector y_time(n);
  for (Eigen::Index tau = 0; tau < n; ++tau) {
    const bool user1 = tau % 2 == 0;
    const cplx x = user1 ? x1(tau / 2) : x2(tau / 2);
    cplx t = g.a * x;
    if (tau > 0) {
      const cplx w = noiseless ? cplx{} : complex_gaussian(rng, p.sigma_w2);
      out.relay_noise(tau - 1) = w;
      t += g.b * (rz.h * out.transmitted(tau - 1) + w);
    }
    out.transmitted(tau) = t;
    const cplx v = noiseless ? cplx{} : complex_gaussian(rng, p.sigma_v2);
    y_time(tau) = (user1 ? rz.g1 : rz.g2) * t + v;
  }
  out.observed = y_time.reverse();
  return out;
}

/// Destination-order stacking of the two users' symbols: [x_{2,N/2}, x_{1,N/2}, ..., x_{1,1}].
inline CVector cma_stack(const CVector& x1, const CVector& x2) {
  const Eigen::Index n = 2 * x1.size();
  CVector x(n);
  for (Eigen::Index k = 0; k < x1.size(); ++k) {
    x(n - 1 - 2 * k) = x1(k);
    x(n - 2 - 2 * k) = x2(k);
  }
  return x;
}

namespace detail {

/// Tridiagonal covariance of the innovation noise b w_tau + v_tau/g_tau - bh v_{tau-1}/g_{tau-1}
/// in time order: main diagonal and the (tau, tau-1) entries.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<cplx> sub;  // sub[0] unused
};

inline Tridiagonal innovation_covariance(const CmaGains& g, const CmaRealization& rz, const ChannelParams& p, int n) {
  require(std::abs(rz.g1) > 0.0 && std::abs(rz.g2) > 0.0, Errc::ZeroChannel, "source-destination gain is zero");
  const cplx bh = g.b * rz.h;
  Tridiagonal t{std::vector<double>(n), std::vector<cplx>(n, cplx{})};
  auto nv = [&](int tau) { return p.sigma_v2 / std::norm(tau % 2 == 0 ? rz.g1 : rz.g2); };
  for (int tau = 0; tau < n; ++tau) {
    t.diag[tau] = nv(tau);
    if (tau > 0) {
      t.diag[tau] += g.b * g.b * p.sigma_w2 + std::norm(bh) * nv(tau - 1);
      t.sub[tau] = -bh * nv(tau - 1);
    }
  }
  return t;
}

/// Lower-bidiagonal Cholesky factor: diagonal l, subdiagonal m.
inline std::pair<std::vector<double>, std::vector<cplx>> tridiagonal_cholesky(const Tridiagonal& t) {
  const std::size_t n = t.diag.size();
  std::vector<double> l(n);
  std::vector<cplx> m(n, cplx{});
  for (std::size_t k = 0; k < n; ++k) {
    double d = t.diag[k];
    if (k > 0) {
      m[k] = t.sub[k] / l[k - 1];
      d -= std::norm(m[k]);
    }
    if (!(d > 0.0)) throw Error(Errc::NotPositiveDefinite, "innovation covariance is singular");
    l[k] = std::sqrt(d);
  }
  return {std::move(l), std::move(m)};
}

inline double tridiagonal_log2det(const Tridiagonal& t) {
  double acc = 0.0;
  for (double v : tridiagonal_cholesky(t).first) acc += 2.0 * std::log2(v);
  return acc;
}

}  // namespace detail

/// Whitened destination-order system built by undoing the recursion first:
/// z_tau = y_tau/g_tau - bh y_{tau-1}/g_{tau-1} = a x_tau + MA(1) noise. Carries the same
/// information as Sigma^{-1/2}(y, H1) but stays well conditioned when |bh| >= 1.
inline Whitened cma_innovation_whiten(const CmaGains& g, const CmaRealization& rz, const ChannelParams& p,
                                      const CVector& observed) {
  const Eigen::Index n = observed.size();
  require(n >= 2 && n % 2 == 0, Errc::InvalidArgument, "CMA frame length must be even");
  const auto cov = detail::innovation_covariance(g, rz, p, static_cast<int>(n));
  const auto [l, m] = detail::tridiagonal_cholesky(cov);
  const CVector y = observed.reverse();
  const cplx bh = g.b * rz.h;
  auto gain = [&](Eigen::Index tau) { return tau % 2 == 0 ? rz.g1 : rz.g2; };

  CVector z(n);
  for (Eigen::Index tau = 0; tau < n; ++tau) {
    z(tau) = y(tau) / gain(tau);
    if (tau > 0) z(tau) -= bh * y(tau - 1) / gain(tau - 1);
  }
  // Rows of L^{-1} by forward substitution.
  CMatrix linv = CMatrix::Zero(n, n);
  for (Eigen::Index tau = 0; tau < n; ++tau) {
    linv(tau, tau) = 1.0 / l[tau];
    if (tau > 0) linv.row(tau).head(tau) = -m[tau] * linv.row(tau - 1).head(tau) / l[tau];
  }
  Whitened w;
  w.observation = (linv * z).reverse();
  w.channel = (g.a * linv).reverse().eval();
  return w;
}

// ---------------------------------------------------------------------------------------------

/// Joint two-user lattice in destination order. Rows follow the real embedding of the
/// destination-order stacking; columns are ordered by the transmission instant of their own
/// row, so the earliest symbols are decided first.
struct JointCode {
  LatticeCode code;
  std::vector<int> user;   // 0 or 1 per joint column
  std::vector<int> local;  // column index inside that user's code

  IVector mux(const IVector& u1, const IVector& u2) const {
    IVector u(code.dim());
    for (int c = 0; c < code.dim(); ++c) u(c) = user[c] == 0 ? u1(local[c]) : u2(local[c]);
    return u;
  }

  std::pair<IVector, IVector> demux(const IVector& u) const {
    const int n1 = static_cast<int>(std::count(user.begin(), user.end(), 0));
    IVector u1(n1), u2(code.dim() - n1);
    for (int c = 0; c < code.dim(); ++c) (user[c] == 0 ? u1 : u2)(local[c]) = u(c);
    return {u1, u2};
  }
};

/// Destination row of real coordinate r of user j (0-based) in a frame of n instants.
inline int cma_joint_row(int user, int r, int n) {
  const int tau = 2 * (r / 2) + user;  // 0-based transmission instant
  return 2 * (n - 1 - tau) + r % 2;
}

inline JointCode joint_generator(const LatticeCode& c1, const LatticeCode& c2, int n) {
  require(n >= 2 && n % 2 == 0, Errc::InvalidArgument, "CMA frame length must be even");
  require(c1.dim() == n && c2.dim() == n, Errc::DimensionMismatch, "each user code must span N/2 complex symbols");
  require(c1.q == c2.q, Errc::InvalidArgument, "users must share Q");
  const LatticeCode* codes[2] = {&c1, &c2};

  struct Col {
    int tau, user, local;
  };
  std::vector<Col> cols;
  for (int j = 0; j < 2; ++j)
    for (int c = 0; c < n; ++c) cols.push_back({2 * (codes[j]->own_row[c] / 2) + j, j, c});
  std::stable_sort(cols.begin(), cols.end(), [](const Col& x, const Col& y) {
    return std::tie(x.tau, x.user, x.local) < std::tie(y.tau, y.user, y.local);
  });

  const int m = 2 * n;
  JointCode jc;
  jc.code.q = c1.q;
  jc.code.generator = IMatrix::Zero(m, m);
  jc.code.translate = RVector::Zero(m);
  jc.code.own_row.resize(m);
  jc.code.info.resize(m);
  std::vector<int> joint_col[2] = {std::vector<int>(n), std::vector<int>(n)};
  for (int c = 0; c < m; ++c) {
    joint_col[cols[c].user][cols[c].local] = c;
    jc.user.push_back(cols[c].user);
    jc.local.push_back(cols[c].local);
  }
  for (int j = 0; j < 2; ++j) {
    const LatticeCode& cj = *codes[j];
    for (int r = 0; r < n; ++r) {
      const int jr = cma_joint_row(j, r, n);
      jc.code.translate(jr) = cj.translate(r);
      for (int c = 0; c < n; ++c)
        if (cj.generator(r, c) != 0) jc.code.generator(jr, joint_col[j][c]) = cj.generator(r, c);
    }
    for (int c = 0; c < n; ++c) {
      jc.code.own_row[joint_col[j][c]] = cma_joint_row(j, cj.own_row[c], n);
      jc.code.info[joint_col[j][c]] = cj.info[c];
    }
  }
  return jc;
}

// ---------------------------------------------------------------------------------------------

struct CmaInformation {
  double joint = 0.0;  // I(x1, x2; y)
  double user1 = 0.0;  // I(x1; y | x2)
  double user2 = 0.0;  // I(x2; y | x1)
};

/// Mutual information of the two-user system in bits per codeword. On the innovation form
/// the whitened channel is a L^{-1} with L L^H = C (tridiagonal), so the joint term is
/// log2 det(C + E a^2 I) - log2 det C; a user's term uses only that user's columns.
inline CmaInformation cma_mutual_information(const CmaGains& g, const CmaRealization& rz, int n,
                                             const ChannelParams& p) {
  require(n >= 2 && n % 2 == 0, Errc::InvalidArgument, "CMA frame length must be even");
  CmaInformation info;
  detail::Tridiagonal c = detail::innovation_covariance(g, rz, p, n);
  const auto [l, m] = detail::tridiagonal_cholesky(c);
  double base = 0.0;
  for (double v : l) base += 2.0 * std::log2(v);
  for (double& d : c.diag) d += p.energy * g.a * g.a;
  info.joint = detail::tridiagonal_log2det(c) - base;

  // Columns of L^{-1} for one user's instants, then log2 det(I + E a^2 M^H M).
  const int k = n / 2;
  for (int user = 0; user < 2; ++user) {
    CMatrix mcols = CMatrix::Zero(n, k);
    for (int j = 0; j < k; ++j) {
      const int col = 2 * j + user;
      cplx v = 1.0 / l[col];
      mcols(col, j) = v;
      for (int tau = col + 1; tau < n; ++tau) {
        v = -m[tau] * v / l[tau];
        mcols(tau, j) = v;
      }
    }
    const CMatrix gram = CMatrix::Identity(k, k) + p.energy * g.a * g.a * mcols.adjoint() * mcols;
    Eigen::LLT<CMatrix> llt(gram);
    require(llt.info() == Eigen::Success, Errc::NotPositiveDefinite, "Gram matrix factorization failed");
    double ld = 0.0;
    for (int i = 0; i < k; ++i) ld += 2.0 * std::log2(std::real(llt.matrixL()(i, i)));
    (user == 0 ? info.user1 : info.user2) = ld;
  }
  return info;
}

/// Multiple-access outage of joint decoding at total rate `rate` BPCU split evenly: the sum
/// rate or either user's rate given the other is not supported.
inline bool cma_in_outage(const CmaInformation& i, int n, double rate) {
  return i.joint < n * rate || i.user1 < n * rate / 2.0 || i.user2 < n * rate / 2.0;
}

/// Fraction of channel draws in outage. Draw i uses the seed derived from (seed, 0, i), so
/// different gains see the same channels.
inline double cma_outage(const CmaGains& g, const ChannelParams& p, int n, double rate, int draws,
                         std::uint64_t seed) {
  require(draws > 0, Errc::InvalidArgument, "need at least one channel draw");
  int out = 0;
  for (int i = 0; i < draws; ++i) {
    const CmaRealization rz = sample_cma_realization(derive_seed(seed, 0, static_cast<std::uint64_t>(i)));
    if (cma_in_outage(cma_mutual_information(g, rz, n, p), n, rate)) ++out;
  }
  return static_cast<double>(out) / draws;
}

struct GainSearchPoint {
  CmaGains gains;
  double outage = 1.0;
};

struct GainSearchResult {
  CmaGains best;
  double outage = 1.0;
  std::vector<GainSearchPoint> grid;
};

/// Grid over b in [0, b_max) with the largest feasible a (outage falls with a at fixed b),
/// then one refinement pass at a tenth of the step around the coarse argmin.
inline GainSearchResult optimize_gains(const ChannelParams& p, int n, double rate, int draws, std::uint64_t seed,
                                       double step = 0.05, double b_max = 0.95) {
  require(step > 0.0 && b_max > 0.0, Errc::InvalidArgument, "bad gain grid");
  GainSearchResult res;
  auto eval = [&](double b) {
    const auto a = cma_max_broadcast_gain(b, p);
    if (!a) return;
    GainSearchPoint pt{{*a, b}, cma_outage({*a, b}, p, n, rate, draws, seed)};
    res.grid.push_back(pt);
    if (res.grid.size() == 1 || pt.outage < res.outage) {
      res.outage = pt.outage;
      res.best = pt.gains;
    }
  };
  const int steps = static_cast<int>(std::floor(b_max / step + 1e-9));
  for (int k = 0; k <= steps; ++k) eval(k * step);
  if (res.grid.empty()) throw Error(Errc::InvalidArgument, "no power-feasible gains on the grid");
  const double centre = res.best.b;
  for (int k = -9; k <= 9; ++k) {
    if (k == 0) continue;
    const double b = centre + k * step / 10.0;
    if (b > 0.0 && b < std::min(1.0, b_max + step)) eval(b);
  }
  return res;
}

// ---------------------------------------------------------------------------------------------

enum class CmaCoding { Uncoded, Coded };

struct CmaConfig {
  CmaCoding mode = CmaCoding::Uncoded;
  int q = 2;
  int frame = 128;  // N transmission instants per codeword
  std::optional<CmaGains> gains;  // unset: b = default_b with the largest feasible a
  double default_b = 0.45;
  ConvCode cc = ConvCode::tuned(5, 2);
  DecoderConfig decoder;
  bool noiseless = false;

  /// 2 or 4 BPCU: uncoded 4/16-QAM, or the rate-1/2 code over Z_5 / Z_17.
  static CmaConfig for_rate(int bpcu, CmaCoding mode, int frame = 128) {
    CmaConfig c;
    c.mode = mode;
    c.frame = frame;
    switch (bpcu) {
      case 2: c.q = mode == CmaCoding::Uncoded ? 2 : 5; break;
      case 4: c.q = mode == CmaCoding::Uncoded ? 4 : 17; break;
      default: throw Error(Errc::Config, "CMA rate must be 2 or 4 BPCU");
    }
    c.cc = ConvCode::tuned(mode == CmaCoding::Uncoded ? 5 : c.q, 2);
    return c;
  }

  void validate() const {
    require(frame >= 4 && frame % 4 == 0, Errc::Config, "CMA frame must be a positive multiple of 4");
    require(q >= 2, Errc::Config, "Q must be at least 2");
    if (mode == CmaCoding::Coded) {
      require(cc.q == q && cc.n == 2, Errc::Config, "CMA uses a rate-1/2 code over Z_Q");
      cc.validate();
    }
    if (gains) require(gains->a >= 0.0 && gains->b >= 0.0, Errc::Config, "gains must be non-negative");
    decoder.validate();
  }

  LatticeCode user_code() const {
    return mode == CmaCoding::Uncoded ? LatticeCode::uncoded(frame, q) : build_construction_a(cc, frame);
  }

  int payload_symbols() const { return mode == CmaCoding::Uncoded ? frame : frame / 2 - cc.memory; }

  /// Both users' bits over the N instants of a codeword.
  double rate_bpcu() const { return 2.0 * payload_symbols() * std::log2(static_cast<double>(q)) / frame; }

  CmaGains resolve_gains(const ChannelParams& p) const {
    if (gains) return *gains;
    const auto a = cma_max_broadcast_gain(default_b, p);
    require(a.has_value(), Errc::Config, "default repetition gain is not power-feasible");
    return {*a, default_b};
  }
};

inline TrialRecord simulate_cma_trial(const CmaConfig& cfg, const ChannelParams& p, const CmaRealization& rz,
                                      const std::vector<int>& payload1, const std::vector<int>& payload2, Rng& rng) {
  cfg.validate();
  require(static_cast<int>(payload1.size()) == cfg.payload_symbols() &&
              static_cast<int>(payload2.size()) == cfg.payload_symbols(),
          Errc::DimensionMismatch, "payload length does not match the CMA frame");
  const CmaGains g = cfg.resolve_gains(p);
  const LatticeCode uc = cfg.user_code();
  const JointCode jc = joint_generator(uc, uc, cfg.frame);
  const AmplitudeMap amp = AmplitudeMap::for_q(cfg.q, p.energy);

  const IVector u1 = uc.lift(payload1);
  const IVector u2 = uc.lift(payload2);
  const CmaSignals sig = generate_signals(g, rz, amp.symbols(uc, u1), amp.symbols(uc, u2), p, rng, cfg.noiseless);

  TrialRecord rec;
  rec.bits = (payload1.size() + payload2.size()) * bits_per_symbol(cfg.q);
  ChannelParams pw = p;
  if (cfg.noiseless) {
    pw.sigma_v2 = std::max(p.sigma_v2, 1e-300) * 1e-12;
    pw.sigma_w2 = std::max(p.sigma_w2, 1e-300) * 1e-12;
  }
  const Whitened w = cma_innovation_whiten(g, rz, pw, sig.observed);
  const LinkDecode d = decode_link(amp.link(embed_complex(w.channel), embed_vector(w.observation), 0.5), jc.code,
                                   cfg.decoder);
  rec.nodes = d.nodes;
  rec.budget_exhausted = d.status == DecodeStatus::BudgetExhausted;
  const auto [d1, d2] = jc.demux(d.u);
  auto info1 = uc.info_of(d1), info2 = uc.info_of(d2);
  for (auto* v : {&info1, &info2})
    for (auto& s : *v) s = std::clamp(s, 0, cfg.q - 1);
  rec.frame_error = !d.in_set || rec.budget_exhausted || info1 != payload1 || info2 != payload2;
  rec.bit_errors = count_bit_errors(info1, payload1) + count_bit_errors(info2, payload2);
  return rec;
}

}  // namespace latcoop
