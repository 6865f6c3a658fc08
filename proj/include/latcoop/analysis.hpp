#pragma once

// Diversity-multiplexing tradeoff curves, Pareto-optimal DDF waiting fractions, dominance
// checks and Monte Carlo outage of the modified DDF relay.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "latcoop/channels.hpp"
#include "latcoop/error.hpp"
#include "latcoop/relay_ddf.hpp"

namespace latcoop {

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

inline double dmt_naf(double r) { return 1.0 - r + positive_part(1.0 - 2.0 * r); }

inline double dmt_ddf(double r) { return r <= 0.5 ? 2.0 * (1.0 - r) : (1.0 - r) / r; }

inline double dmt_cma(double r) { return 2.0 * (1.0 - r); }

/// d(r) = min over f_j >= r of (1-r)/f_j + (1 - r/f_{j-1})^+, f_0 = 0 (no second term for
/// j = 1) and f_{N+1} = 1.
inline double dmt_ddf_finite(double r, const std::vector<double>& fractions) {
  std::vector<double> f = fractions;
  f.push_back(1.0);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (f[j] < r) continue;
    double d = (1.0 - r) / f[j];
    if (j > 0) d += positive_part(1.0 - r / f[j - 1]);
    best = std::min(best, d);
  }
  return std::isinf(best) ? 0.0 : best;
}

/// Pareto-set closed form 1 - r + (1 - r/f_N)^+.
inline double dmt_ddf_pareto(double r, double f_last) { return 1.0 - r + positive_part(1.0 - r / f_last); }

/// Optimal tradeoff of an m x n MIMO channel: piecewise linear through
/// (k, (m-k)(n-k)).
inline double dmt_mimo_optimal(int m, int n, double r) {
  require(m > 0 && n > 0, Errc::InvalidArgument, "antenna counts must be positive");
  const int kmax = std::min(m, n);
  if (r <= 0.0) return static_cast<double>(m) * n;
  if (r >= kmax) return 0.0;
  const int k = static_cast<int>(std::floor(r));
  const double d0 = static_cast<double>(m - k) * (n - k);
  const double d1 = static_cast<double>(m - k - 1) * (n - k - 1);
  return d0 + (r - k) * (d1 - d0);
}

struct DmtCurve {
  std::string name;
  double r_max = 1.0;
  std::vector<std::pair<double, double>> breakpoints;  // (r, d), ascending in r
  std::function<double(double)> eval;

  double operator()(double r) const { return eval(r); }
};

inline DmtCurve naf_curve() {
  return {"naf", 1.0, {{0.0, 2.0}, {0.5, 0.5}, {1.0, 0.0}}, [](double r) { return dmt_naf(r); }};
}

inline DmtCurve ddf_curve() {
  return {"ddf", 1.0, {{0.0, 2.0}, {0.5, 1.0}, {1.0, 0.0}}, [](double r) { return dmt_ddf(r); }};
}

inline DmtCurve cma_curve() {
  return {"cma", 1.0, {{0.0, 2.0}, {1.0, 0.0}}, [](double r) { return dmt_cma(r); }};
}

inline DmtCurve ddf_finite_curve(std::vector<double> fractions) {
  DmtCurve c;
  c.name = "ddf-finite";
  c.r_max = 1.0;
  c.breakpoints.push_back({0.0, dmt_ddf_finite(0.0, fractions)});
  for (double f : fractions) c.breakpoints.push_back({f, dmt_ddf_finite(f, fractions)});
  c.breakpoints.push_back({1.0, 0.0});
  c.eval = [fr = std::move(fractions)](double r) { return dmt_ddf_finite(r, fr); };
  return c;
}

inline DmtCurve mimo_curve(int m, int n) {
  DmtCurve c;
  c.name = "mimo";
  c.r_max = std::min(m, n);
  for (int k = 0; k <= std::min(m, n); ++k) c.breakpoints.push_back({static_cast<double>(k), static_cast<double>(m - k) * (n - k)});
  c.eval = [m, n](double r) { return dmt_mimo_optimal(m, n, r); };
  return c;
}

/// Evaluation points: uniform grid on [0, r_max] plus every breakpoint of both curves.
inline std::vector<double> dominance_grid(const DmtCurve& a, const DmtCurve& b, int points = 1000) {
  const double r_max = std::max(a.r_max, b.r_max);
  std::vector<double> rs;
  rs.reserve(points + a.breakpoints.size() + b.breakpoints.size());
  for (int i = 0; i < points; ++i) rs.push_back(r_max * i / (points - 1));
  for (const auto& [r, d] : a.breakpoints) rs.push_back(r);
  for (const auto& [r, d] : b.breakpoints) rs.push_back(r);
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  return rs;
}

/// d_A(r) >= d_B(r) at every grid point.
inline bool uniformly_dominates(const DmtCurve& a, const DmtCurve& b, double tol = 1e-12) {
  for (double r : dominance_grid(a, b))
    if (a(r) < b(r) - tol) return false;
  return true;
}

/// A dominates B in the Pareto sense: strictly better somewhere and worse nowhere.
inline bool pareto_dominates(const DmtCurve& a, const DmtCurve& b, double tol = 1e-12) {
  bool better = false;
  for (double r : dominance_grid(a, b)) {
    const double da = a(r), db = b(r);
    if (da < db - tol) return false;
    if (da > db + tol) better = true;
  }
  return better;
}

namespace detail {

/// Forward recursion f_j = (1 - f_{j-1}) / (2 - (1 + 1/x) f_{j-1}) from f_1 = 1/2 with the
/// trial value x standing in for f_N. Returns NaN if a denominator is not positive.
inline std::vector<double> pareto_forward(int n, double x) {
  std::vector<double> f(n);
  f[0] = 0.5;
  for (int j = 1; j < n; ++j) {
    const double den = 2.0 - (1.0 + 1.0 / x) * f[j - 1];
    f[j] = den > 0.0 ? (1.0 - f[j - 1]) / den : std::numeric_limits<double>::quiet_NaN();
  }
  return f;
}

}  // namespace detail

/// Largest residual of the recursion when every f_j, including the implicit f_N, is taken from
/// `f` itself.
inline double pareto_residual(const std::vector<double>& f) {
  if (f.empty()) return std::numeric_limits<double>::infinity();
  double worst = std::abs(f[0] - 0.5);
  const double fn = f.back();
  for (std::size_t j = 1; j < f.size(); ++j) {
    const double rhs = (1.0 - f[j - 1]) / (2.0 - (1.0 + 1.0 / fn) * f[j - 1]);
    worst = std::max(worst, std::abs(f[j] - rhs));
  }
  return worst;
}

/// Pareto-optimal waiting fractions for n segment boundaries. f_N enters every step of the
/// recursion, so bisect on it: propagate from f_1 = 1/2 and match the last term.
inline std::vector<double> pareto_fractions(int n) {
  require(n >= 1, Errc::InvalidArgument, "need at least one waiting fraction");
  if (n == 1) return {0.5};
  auto gap = [n](double x) {
    const double last = detail::pareto_forward(n, x).back();
    return std::isnan(last) ? std::numeric_limits<double>::infinity() : last - x;
  };
  // gap > 0 near 1/2 (the recursion overshoots), < 0 near 1. Bracket by scanning.
  double lo = 0.5 + 1e-12, hi = 1.0 - 1e-15;
  const int scan = 4096;
  double prev_x = lo;
  double prev_g = gap(lo);
  bool found = false;
  for (int i = 1; i <= scan; ++i) {
    const double x = 0.5 + 0.5 * i / scan - (i == scan ? 1e-15 : 0.0);
    const double g = gap(x);
    if (std::isfinite(prev_g) && std::isfinite(g) && (prev_g > 0.0) != (g > 0.0)) {
      lo = prev_x;
      hi = x;
      found = true;
      break;
    }
    prev_x = x;
    prev_g = g;
  }
  require(found, Errc::NonConvergence, "Pareto fraction recursion has no fixed point");
  const bool lo_pos = gap(lo) > 0.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((gap(mid) > 0.0) == lo_pos) lo = mid; else hi = mid;
  }
  double x = std::abs(gap(lo)) < std::abs(gap(hi)) ? lo : hi;
  std::vector<double> f = detail::pareto_forward(n, x);
  f.back() = x;
  require(pareto_residual(f) < 1e-12, Errc::NonConvergence, "Pareto fractions did not converge");
  for (int j = 1; j < n; ++j) require(f[j] > f[j - 1], Errc::NonConvergence, "Pareto fractions are not increasing");
  return f;
}

struct OutageDdfConfig {
  double rate = 2.0;  // BPCU
  std::vector<double> fractions = {0.5, 2.0 / 3.0};
  int subblocks = 120;  // M; fine enough that sub-block rounding barely moves the fractions
  double c = 2.0;
  long long draws = 1000000;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Instantaneous mutual information of the SISO-reduced DDF link for one channel draw.
inline double ddf_mutual_information(const RelayRealization& rz, double rho, int wait, int m) {
  const double lam = static_cast<double>(wait) / m;
  const double g1 = std::norm(rz.g1), g2 = std::norm(rz.g2);
  return lam * std::log2(1.0 + g1 * rho) + (1.0 - lam) * std::log2(1.0 + (g1 + g2) * rho);
}

/// Monte Carlo outage P(I < R). Draws come in fixed blocks with their own derived streams so
/// the estimate does not depend on the thread count, and two calls with the same seed share
/// channel draws (common random numbers across SNR).
inline double outage_ddf(double snr_db, const OutageDdfConfig& cfg) {
  require(cfg.draws > 0, Errc::InvalidArgument, "outage needs at least one draw");
  require(cfg.subblocks > 0, Errc::InvalidArgument, "M must be positive");
  require(cfg.rate >= 0.0, Errc::InvalidArgument, "rate must be non-negative");
  if (cfg.rate == 0.0) return 0.0;
  const double rho = std::pow(10.0, snr_db / 10.0);
  constexpr long long block = 1 << 14;
  const long long blocks = (cfg.draws + block - 1) / block;
  std::vector<long long> hits(static_cast<std::size_t>(blocks), 0);
  auto work = [&](long long b0, long long stride) {
    for (long long b = b0; b < blocks; b += stride) {
      Rng rng = make_rng(cfg.seed, 0x0D7, static_cast<std::uint64_t>(b));
      const long long end = std::min(cfg.draws, (b + 1) * block);
      long long k = 0;
      for (long long i = b * block; i < end; ++i) {
        const RelayRealization rz = sample_relay_realization(rng);
        const double need = required_wait(cfg.rate, std::norm(rz.h), cfg.c, rho, cfg.subblocks);
        const int wait = quantize_wait(need, cfg.fractions, cfg.subblocks);
        if (ddf_mutual_information(rz, rho, wait, cfg.subblocks) < cfg.rate) ++k;
      }
      hits[static_cast<std::size_t>(b)] = k;
    }
  };
  const int t = std::max(1, cfg.threads);
  if (t == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < t; ++i) pool.emplace_back(work, i, t);
    for (auto& th : pool) th.join();
  }
  long long total = 0;
  for (long long h : hits) total += h;
  return static_cast<double>(total) / static_cast<double>(cfg.draws);
}

/// SNR (dB) at which outage_ddf crosses `target`, by bisection on [lo, hi]. Shared draws make
/// the estimate monotone in SNR.
inline double outage_ddf_snr_at(double target, const OutageDdfConfig& cfg, double lo = 0.0, double hi = 50.0,
                                double tol_db = 1e-3) {
  require(target > 0.0 && target < 1.0, Errc::InvalidArgument, "target outage must be in (0,1)");
  require(outage_ddf(lo, cfg) >= target && outage_ddf(hi, cfg) <= target, Errc::NonConvergence,
          "target outage not bracketed by the SNR range");
  while (hi - lo > tol_db) {
    const double mid = 0.5 * (lo + hi);
    if (outage_ddf(mid, cfg) > target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace latcoop
