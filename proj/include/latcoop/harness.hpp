#pragma once

// Monte Carlo FER experiments: configuration from `key = value` text, batched deterministic
// parallel trial execution, and CSV / SVG output.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "latcoop/channels.hpp"
#include "latcoop/cma_naf.hpp"
#include "latcoop/decoder.hpp"
#include "latcoop/error.hpp"
#include "latcoop/lattice_codec.hpp"
#include "latcoop/relay_ddf.hpp"
#include "latcoop/relay_naf.hpp"
#include "latcoop/trial.hpp"

namespace latcoop {

// ---------------------------------------------------------------------------------------------
// small text helpers

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.push_back({});
  return out;
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw Error(Errc::Config, key + ": not a number: '" + v + "'");
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw Error(Errc::Config, key + ": not an integer: '" + v + "'");
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(Errc::Config, key + ": not a boolean: '" + v + "'");
}

/// "a:b:step" (inclusive), or a comma list.
inline std::vector<double> parse_snr_list(const std::string& v) {
  std::vector<double> out;
  if (v.find(':') != std::string::npos) {
    const auto p = split(v, ':');
    require(p.size() == 3, Errc::Config, "snr range must be a:b:step");
    const double a = parse_double("snr_db", p[0]), b = parse_double("snr_db", p[1]), st = parse_double("snr_db", p[2]);
    require(st > 0.0 && b >= a, Errc::Config, "snr range needs a <= b and step > 0");
    const int n = static_cast<int>(std::floor((b - a) / st + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(a + i * st);
  } else {
    for (const auto& s : split(v, ',')) out.push_back(parse_double("snr_db", s));
  }
  require(!out.empty(), Errc::Config, "snr list is empty");
  return out;
}

/// Comma list of decimals or p/q fractions.
inline std::vector<double> parse_fractions(const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split(v, ',')) {
    const auto slash = s.find('/');
    if (slash == std::string::npos) {
      out.push_back(parse_double("fractions", s));
    } else {
      const double num = parse_double("fractions", trim(s.substr(0, slash)));
      const double den = parse_double("fractions", trim(s.substr(slash + 1)));
      require(den != 0.0, Errc::Config, "fraction with zero denominator");
      out.push_back(num / den);
    }
  }
  return out;
}

/// Parity taps "1,2,1;1,1,2".
inline std::vector<std::vector<int>> parse_taps(const std::string& v) {
  std::vector<std::vector<int>> out;
  for (const auto& set : split(v, ';')) {
    std::vector<int> taps;
    for (const auto& t : split(set, ',')) taps.push_back(static_cast<int>(parse_int("code.taps", t)));
    out.push_back(std::move(taps));
  }
  return out;
}

/// Shortest decimal that reads back to the same double; fixed across runs and platforms.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  for (int prec = 6; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

// ---------------------------------------------------------------------------------------------
// configuration

using ConfigMap = std::map<std::string, std::string>;

/// `key = value` per line; '#' starts a comment; later keys override earlier ones.
inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, Errc::Config, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    require(!key.empty(), Errc::Config, "line " + std::to_string(lineno) + ": empty key");
    m[key] = trim(line.substr(eq + 1));
  }
  return m;
}

inline ConfigMap load_config_file(const std::string& path) {
  std::ifstream f(path);
  require(f.good(), Errc::Config, "cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

enum class Protocol { Naf, Ddf, Cma };

inline std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::Naf: return "naf";
    case Protocol::Ddf: return "ddf";
    case Protocol::Cma: return "cma";
  }
  return "?";
}

inline Protocol parse_protocol(const std::string& v) {
  if (v == "naf") return Protocol::Naf;
  if (v == "ddf") return Protocol::Ddf;
  if (v == "cma") return Protocol::Cma;
  throw Error(Errc::Config, "protocol must be naf, ddf or cma, got '" + v + "'");
}

struct ExperimentConfig {
  Protocol protocol = Protocol::Naf;
  int rate = 2;  // BPCU class selecting the constellation / Q
  std::vector<double> snr_db = {10.0};
  long long min_frame_errors = 100;
  long long max_trials = 10000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
  int batch = 32;   // trials between stop checks; part of the result, unlike threads
  double c = 2.0;   // sigma_v^2 / sigma_w^2, i.e. inter-user SNR +3 dB
  double max_seconds = 0.0;  // 0: unlimited
  bool noiseless = false;
  NafConfig naf = NafConfig::for_rate(2, NafCoding::GoldenOnly);
  DdfConfig ddf = DdfConfig::for_rate(2);
  CmaConfig cma = CmaConfig::for_rate(2, CmaCoding::Uncoded);
  std::string out_csv;
  std::string out_svg;

  DecoderConfig& decoder() {
    switch (protocol) {
      case Protocol::Naf: return naf.decoder;
      case Protocol::Ddf: return ddf.decoder;
      case Protocol::Cma: return cma.decoder;
    }
    return naf.decoder;
  }
  const DecoderConfig& decoder() const { return const_cast<ExperimentConfig*>(this)->decoder(); }

  double rate_bpcu() const {
    switch (protocol) {
      case Protocol::Naf: return naf.rate_bpcu();
      case Protocol::Ddf: return ddf.code_rate();
      case Protocol::Cma: return cma.rate_bpcu();
    }
    return 0.0;
  }

  void validate() const {
    require(!snr_db.empty(), Errc::Config, "SNR list must not be empty");
    require(min_frame_errors >= 1, Errc::Config, "min frame errors must be at least 1");
    require(max_trials >= 1, Errc::Config, "max trials must be at least 1");
    require(batch >= 1, Errc::Config, "batch must be at least 1");
    require(threads >= 0, Errc::Config, "threads must be non-negative");
    require(c > 0.0, Errc::Config, "c must be positive");
    require(max_seconds >= 0.0, Errc::Config, "max_seconds must be non-negative");
    switch (protocol) {
      case Protocol::Naf: naf.validate(); break;
      case Protocol::Ddf: ddf.validate(); break;
      case Protocol::Cma: cma.validate(); break;
    }
  }
};

inline std::vector<std::string> known_config_keys() {
  return {"protocol", "rate", "snr_db", "min_errors", "max_trials", "seed", "threads", "batch", "c",
          "max_seconds", "noiseless", "out", "svg", "decoder.bias", "decoder.step", "decoder.max_nodes",
          "decoder.boundary", "naf.mode", "naf.frame", "naf.gain", "ddf.subblocks", "ddf.symbols_per_subblock",
          "ddf.fractions", "ddf.wait_rate", "cma.mode", "cma.frame", "cma.a", "cma.b", "code.q", "code.memory",
          "code.taps"};
}

/// Builds an experiment from a key map. Protocol, rate, mode and frame pick the base
/// configuration; every other key then overrides one field. Unknown keys are errors.
inline ExperimentConfig build_experiment(const ConfigMap& m) {
  const auto known = known_config_keys();
  for (const auto& [k, v] : m)
    require(std::find(known.begin(), known.end(), k) != known.end(), Errc::Config, "unknown config key '" + k + "'");
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    const auto it = m.find(k);
    if (it == m.end()) return std::nullopt;
    return it->second;
  };

  ExperimentConfig e;
  if (auto v = get("protocol")) e.protocol = parse_protocol(*v);
  if (auto v = get("rate")) e.rate = static_cast<int>(parse_int("rate", *v));

  switch (e.protocol) {
    case Protocol::Naf: {
      NafCoding mode = NafCoding::GoldenOnly;
      if (auto v = get("naf.mode")) {
        if (*v == "gc") mode = NafCoding::GoldenOnly;
        else if (*v == "gc+cc") mode = NafCoding::GoldenPlusCc;
        else throw Error(Errc::Config, "naf.mode must be gc or gc+cc");
      }
      const int frame = get("naf.frame") ? static_cast<int>(parse_int("naf.frame", *get("naf.frame"))) : 128;
      e.naf = NafConfig::for_rate(e.rate, mode, frame);
      if (auto v = get("naf.gain")) e.naf.repetition_gain = parse_double("naf.gain", *v);
      break;
    }
    case Protocol::Ddf: {
      e.ddf = DdfConfig::for_rate(e.rate);
      if (auto v = get("ddf.subblocks")) e.ddf.subblocks = static_cast<int>(parse_int("ddf.subblocks", *v));
      if (auto v = get("ddf.symbols_per_subblock"))
        e.ddf.symbols_per_subblock = static_cast<int>(parse_int("ddf.symbols_per_subblock", *v));
      if (auto v = get("ddf.fractions")) e.ddf.fractions = parse_fractions(*v);
      if (auto v = get("ddf.wait_rate")) e.ddf.rate = parse_double("ddf.wait_rate", *v);
      break;
    }
    case Protocol::Cma: {
      CmaCoding mode = CmaCoding::Uncoded;
      if (auto v = get("cma.mode")) {
        if (*v == "uncoded") mode = CmaCoding::Uncoded;
        else if (*v == "cc") mode = CmaCoding::Coded;
        else throw Error(Errc::Config, "cma.mode must be uncoded or cc");
      }
      const int frame = get("cma.frame") ? static_cast<int>(parse_int("cma.frame", *get("cma.frame"))) : 128;
      e.cma = CmaConfig::for_rate(e.rate, mode, frame);
      const auto a = get("cma.a");
      const auto b = get("cma.b");
      if (a && b) e.cma.gains = CmaGains{parse_double("cma.a", *a), parse_double("cma.b", *b)};
      else if (b) e.cma.default_b = parse_double("cma.b", *b);
      else require(!a, Errc::Config, "cma.a needs cma.b");
      break;
    }
  }

  // Outer code of the active protocol.
  ConvCode* cc = e.protocol == Protocol::Naf ? &e.naf.cc : e.protocol == Protocol::Ddf ? &e.ddf.cc : &e.cma.cc;
  int* q = e.protocol == Protocol::Naf ? &e.naf.q : e.protocol == Protocol::Ddf ? &e.ddf.q : &e.cma.q;
  if (auto v = get("code.q")) {
    *q = static_cast<int>(parse_int("code.q", *v));
    cc->q = *q;
  }
  if (auto v = get("code.taps")) {
    cc->parity_taps = parse_taps(*v);
    cc->n = static_cast<int>(cc->parity_taps.size()) + 1;
    cc->memory = static_cast<int>(cc->parity_taps.front().size()) - 1;
  }
  if (auto v = get("code.memory")) {
    require(static_cast<int>(parse_int("code.memory", *v)) == cc->memory, Errc::Config,
            "code.memory disagrees with the tap length");
  }
  if (get("code.q") && !get("code.taps")) *cc = ConvCode::tuned(*q, cc->n);

  DecoderConfig& d = e.decoder();
  if (auto v = get("decoder.bias")) d.bias = parse_double("decoder.bias", *v);
  if (auto v = get("decoder.step")) d.step = parse_double("decoder.step", *v);
  if (auto v = get("decoder.max_nodes")) d.max_nodes = static_cast<std::size_t>(parse_int("decoder.max_nodes", *v));
  if (auto v = get("decoder.boundary")) {
    if (*v == "relaxed") d.boundary = Boundary::Relaxed;
    else if (*v == "clamp") d.boundary = Boundary::Clamp;
    else throw Error(Errc::Config, "decoder.boundary must be relaxed or clamp");
  }

  if (auto v = get("snr_db")) e.snr_db = parse_snr_list(*v);
  if (auto v = get("min_errors")) e.min_frame_errors = parse_int("min_errors", *v);
  if (auto v = get("max_trials")) e.max_trials = parse_int("max_trials", *v);
  if (auto v = get("seed")) e.seed = static_cast<std::uint64_t>(parse_int("seed", *v));
  if (auto v = get("threads")) e.threads = static_cast<int>(parse_int("threads", *v));
  if (auto v = get("batch")) e.batch = static_cast<int>(parse_int("batch", *v));
  if (auto v = get("c")) e.c = parse_double("c", *v);
  if (auto v = get("max_seconds")) e.max_seconds = parse_double("max_seconds", *v);
  if (auto v = get("noiseless")) e.noiseless = parse_bool("noiseless", *v);
  if (auto v = get("out")) e.out_csv = *v;
  if (auto v = get("svg")) e.out_svg = *v;
  e.naf.noiseless = e.ddf.noiseless = e.cma.noiseless = e.noiseless;
  e.validate();
  return e;
}

// ---------------------------------------------------------------------------------------------
// experiment engine

struct ResultRow {
  std::string protocol;
  double rate_bpcu = 0.0;
  double bias = 0.0;
  double snr_db = 0.0;
  long long trials = 0;
  long long frame_errors = 0;
  double fer = 0.0;
  double ber = 0.0;
  double mean_nodes = 0.0;
  double mean_wait_fraction = std::numeric_limits<double>::quiet_NaN();
  double ci95 = 0.0;
  std::string stop_reason;
};

/// Half-width of the 95% Wilson score interval.
inline double wilson_half_width(long long errors, long long trials, double z = 1.959963984540054) {
  if (trials <= 0) return 0.0;
  const double n = static_cast<double>(trials);
  const double p = errors / n;
  return z / (1.0 + z * z / n) * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n));
}

/// One trial at a given SNR; `rng` is the trial's private stream.
using TrialFn = std::function<TrialRecord(const ChannelParams&, Rng&)>;

/// Trial of the configured protocol. The channel realization is the first draw of the trial
/// stream, so protocols run with the same seed see the same channels.
inline TrialFn make_trial(const ExperimentConfig& e) {
  switch (e.protocol) {
    case Protocol::Naf:
      return [cfg = e.naf](const ChannelParams& p, Rng& rng) {
        const RelayRealization rz = sample_relay_realization(rng);
        const auto payload = random_payload(cfg.payload_symbols(), cfg.q, rng);
        return simulate_naf_trial(cfg, p, rz, payload, rng);
      };
    case Protocol::Ddf:
      return [cfg = e.ddf](const ChannelParams& p, Rng& rng) {
        const RelayRealization rz = sample_relay_realization(rng);
        const auto payload = random_payload(cfg.payload_symbols(), cfg.q, rng);
        return simulate_ddf_trial(cfg, p, rz, payload, rng);
      };
    case Protocol::Cma:
      return [cfg = e.cma](const ChannelParams& p, Rng& rng) {
        const CmaRealization rz = sample_cma_realization(rng);
        const auto p1 = random_payload(cfg.payload_symbols(), cfg.q, rng);
        const auto p2 = random_payload(cfg.payload_symbols(), cfg.q, rng);
        return simulate_cma_trial(cfg, p, rz, p1, p2, rng);
      };
  }
  throw Error(Errc::Config, "unknown protocol");
}

namespace detail {

inline void run_batch(const TrialFn& fn, const ChannelParams& p, std::uint64_t seed, std::uint64_t stream,
                      long long first, std::vector<TrialRecord>& out, int threads) {
  const long long n = static_cast<long long>(out.size());
  auto one = [&](long long i) {
    Rng rng = make_rng(seed, stream, static_cast<std::uint64_t>(first + i));
    out[static_cast<std::size_t>(i)] = fn(p, rng);
  };
  const int t = static_cast<int>(std::min<long long>(threads, n));
  if (t <= 1) {
    for (long long i = 0; i < n; ++i) one(i);
    return;
  }
  std::atomic<long long> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int k = 0; k < t; ++k)
    pool.emplace_back([&] {
      for (long long i = next++; i < n && !failed; i = next++) {
        try {
          one(i);
        } catch (...) {
          if (!failed.exchange(true)) err = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace detail

struct ExperimentOutcome {
  std::vector<ResultRow> rows;
  bool budget_exceeded = false;
};

/// Runs every SNR point with the protocol trial of `e`, or with `fn` when given. Trials run in
/// batches of e.batch; the stop rule is checked between batches and results are folded in
/// trial order, so the rows do not depend on the thread count.
inline ExperimentOutcome run_fer_experiment_ex(const ExperimentConfig& e, TrialFn fn = nullptr) {
  e.validate();
  if (!fn) fn = make_trial(e);
  const int threads = e.threads > 0 ? e.threads : std::max(1u, std::thread::hardware_concurrency());
  const auto start = std::chrono::steady_clock::now();
  auto over_budget = [&] {
    return e.max_seconds > 0.0 &&
           std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() > e.max_seconds;
  };

  ExperimentOutcome out;
  for (std::size_t si = 0; si < e.snr_db.size(); ++si) {
    const ChannelParams p = snr_to_variances(e.snr_db[si], e.c);
    ResultRow row;
    row.protocol = protocol_name(e.protocol);
    row.rate_bpcu = e.rate_bpcu();
    row.bias = e.decoder().bias;
    row.snr_db = e.snr_db[si];
    long long bit_errors = 0, bits = 0, nodes = 0, waits = 0;
    double wait_sum = 0.0;
    std::vector<TrialRecord> recs;
    while (true) {
      const long long n = std::min<long long>(e.batch, e.max_trials - row.trials);
      recs.assign(static_cast<std::size_t>(n), TrialRecord{});
      detail::run_batch(fn, p, e.seed, si, row.trials, recs, threads);
      for (const TrialRecord& r : recs) {
        row.frame_errors += r.frame_error ? 1 : 0;
        bit_errors += static_cast<long long>(r.bit_errors);
        bits += static_cast<long long>(r.bits);
        nodes += static_cast<long long>(r.nodes);
        if (!std::isnan(r.wait_fraction)) {
          wait_sum += r.wait_fraction;
          ++waits;
        }
      }
      row.trials += n;
      if (row.frame_errors >= e.min_frame_errors) { row.stop_reason = "min_errors"; break; }
      if (row.trials >= e.max_trials) { row.stop_reason = "max_trials"; break; }
      if (over_budget()) { row.stop_reason = "budget"; break; }
    }
    row.fer = static_cast<double>(row.frame_errors) / row.trials;
    row.ber = bits > 0 ? static_cast<double>(bit_errors) / bits : 0.0;
    row.mean_nodes = static_cast<double>(nodes) / row.trials;
    if (waits > 0) row.mean_wait_fraction = wait_sum / waits;
    row.ci95 = wilson_half_width(row.frame_errors, row.trials);
    out.rows.push_back(row);
    if (row.stop_reason == "budget" || over_budget()) {
      out.budget_exceeded = true;
      break;
    }
  }
  return out;
}

inline std::vector<ResultRow> run_fer_experiment(const ExperimentConfig& e, TrialFn fn = nullptr) {
  return run_fer_experiment_ex(e, std::move(fn)).rows;
}

/// FER and decoder effort versus Fano bias, one experiment per bias value.
inline ExperimentOutcome run_bias_sweep_ex(const ExperimentConfig& e, const std::vector<double>& biases) {
  require(!biases.empty(), Errc::Config, "bias list must not be empty");
  ExperimentOutcome out;
  const auto start = std::chrono::steady_clock::now();
  for (double b : biases) {
    ExperimentConfig eb = e;
    eb.decoder().bias = b;
    if (e.max_seconds > 0.0) {
      const double used = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      eb.max_seconds = std::max(1e-9, e.max_seconds - used);
    }
    auto r = run_fer_experiment_ex(eb);
    out.rows.insert(out.rows.end(), r.rows.begin(), r.rows.end());
    if (r.budget_exceeded) {
      out.budget_exceeded = true;
      break;
    }
  }
  return out;
}

inline std::vector<ResultRow> run_bias_sweep(const ExperimentConfig& e, const std::vector<double>& biases) {
  return run_bias_sweep_ex(e, biases).rows;
}

// ---------------------------------------------------------------------------------------------
// output

inline const std::vector<std::string>& result_header() {
  static const std::vector<std::string> h = {"protocol", "rate_bpcu", "bias", "snr_db", "trials", "frame_errors", "fer",
                                             "ber", "mean_nodes", "mean_wait_fraction", "ci95", "stop_reason"};
  return h;
}

inline std::string join_csv(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s;
}

inline std::string rows_to_csv(const std::vector<ResultRow>& rows) {
  std::string s = join_csv(result_header()) + "\n";
  for (const auto& r : rows) {
    s += join_csv({r.protocol, format_double(r.rate_bpcu), format_double(r.bias), format_double(r.snr_db),
                   std::to_string(r.trials), std::to_string(r.frame_errors), format_double(r.fer), format_double(r.ber),
                   format_double(r.mean_nodes), format_double(r.mean_wait_fraction), format_double(r.ci95),
                   r.stop_reason}) +
         "\n";
  }
  return s;
}

inline std::vector<ResultRow> csv_to_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == join_csv(result_header()), Errc::Config,
          "unexpected CSV header");
  std::vector<ResultRow> rows;
  auto num = [](const std::string& s) { return s == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(s); };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split(line, ',');
    require(c.size() == result_header().size(), Errc::Config, "CSV row has the wrong number of cells");
    ResultRow r;
    r.protocol = c[0];
    r.rate_bpcu = num(c[1]);
    r.bias = num(c[2]);
    r.snr_db = num(c[3]);
    r.trials = std::stoll(c[4]);
    r.frame_errors = std::stoll(c[5]);
    r.fer = num(c[6]);
    r.ber = num(c[7]);
    r.mean_nodes = num(c[8]);
    r.mean_wait_fraction = num(c[9]);
    r.ci95 = num(c[10]);
    r.stop_reason = c[11];
    rows.push_back(r);
  }
  return rows;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  require(f.good(), Errc::Config, "cannot write " + path);
  f << text;
  require(f.good(), Errc::Config, "write failed for " + path);
}

struct PlotSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (x, y); y <= 0 is dropped on a log axis
};

/// Minimal line plot; one polyline per series. Log-scaled y when `log_y`.
inline std::string render_svg(const std::vector<PlotSeries>& series, const std::string& xlabel,
                              const std::string& ylabel, bool log_y = true) {
  const double w = 640, h = 420, ml = 70, mr = 150, mt = 20, mb = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  for (const auto& s : series)
    for (const auto& [x, y] : s.points) {
      if (log_y && !(y > 0.0)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, ty(y));
      y1 = std::max(y1, ty(y));
    }
  if (!std::isfinite(x0)) { x0 = 0; x1 = 1; y0 = 0; y1 = 1; }
  if (x1 == x0) x1 = x0 + 1;
  if (log_y) { y0 = std::floor(y0); y1 = std::ceil(y1); }
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (w - ml - mr); };
  auto py = [&](double y) { return mt + (y1 - ty(y)) / (y1 - y0) * (h - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\"" << h - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">" << xlabel << "</text>\n";
  o << "<text x=\"15\" y=\"" << (mt + h - mb) / 2 << "\" transform=\"rotate(-90 15," << (mt + h - mb) / 2
    << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  if (log_y)
    for (int k = static_cast<int>(y0); k <= static_cast<int>(y1); ++k) {
      const double yy = py(std::pow(10.0, k));
      o << "<text x=\"" << ml - 5 << "\" y=\"" << yy + 4 << "\" text-anchor=\"end\" font-size=\"11\">1e" << k << "</text>\n";
    }
  o << "<text x=\"" << ml << "\" y=\"" << h - mb + 15 << "\" font-size=\"11\">" << format_double(x0) << "</text>\n";
  o << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 15 << "\" text-anchor=\"end\" font-size=\"11\">"
    << format_double(x1) << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* col = colors[i % 7];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series[i].points) {
      if (log_y && !(y > 0.0)) continue;
      o << (first ? "" : " ") << px(x) << "," << py(y);
      first = false;
    }
    o << "\"/>\n";
    o << "<text x=\"" << w - mr + 10 << "\" y=\"" << mt + 15 + 18 * i << "\" fill=\"" << col << "\" font-size=\"12\">"
      << series[i].label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

/// FER vs SNR, one series per (protocol, bias).
inline std::string rows_to_svg(const std::vector<ResultRow>& rows) {
  std::vector<PlotSeries> series;
  for (const auto& r : rows) {
    const std::string label = r.protocol + " b=" + format_double(r.bias);
    auto it = std::find_if(series.begin(), series.end(), [&](const PlotSeries& s) { return s.label == label; });
    if (it == series.end()) {
      series.push_back({label, {}});
      it = series.end() - 1;
    }
    it->points.push_back({r.snr_db, r.fer});
  }
  return render_svg(series, "SNR (dB)", "FER");
}

}  // namespace latcoop
