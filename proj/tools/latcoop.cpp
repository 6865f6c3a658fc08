// latcoop command line: protocol FER simulations, outage and tradeoff analysis.

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "latcoop/latcoop.hpp"

namespace {

using namespace latcoop;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

// Flags that map one-to-one onto config keys; collected as strings so the file and the command
// line go through the same parser.
struct KeyFlags {
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> opts;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    opts.push_back({app->add_option(flag, values[key], help), key});
  }

  void apply(ConfigMap& m) const {
    for (const auto& [opt, key] : opts)
      if (opt->count() > 0) m[key] = values.at(key);
  }
};

struct SimCommand {
  CLI::App* app = nullptr;
  std::string config_file;
  std::vector<std::string> sets;
  bool noiseless = false;
  KeyFlags flags;
  std::string protocol;
  ConfigMap defaults;  // below the config file in precedence
};

void add_common(SimCommand& c) {
  c.app->add_option("--config", c.config_file, "key = value config file");
  c.app->add_option("--set", c.sets, "extra key=value override (repeatable)");
  c.app->add_flag("--noiseless", c.noiseless, "switch all noise off");
  c.flags.add(c.app, "--rate", "rate", "rate class in BPCU");
  c.flags.add(c.app, "--snr-db", "snr_db", "a:b:step or comma list");
  c.flags.add(c.app, "--trials", "max_trials", "max trials per SNR point");
  c.flags.add(c.app, "--min-errors", "min_errors", "stop a point after this many frame errors");
  c.flags.add(c.app, "--seed", "seed", "master seed");
  c.flags.add(c.app, "--threads", "threads", "worker threads (0: all cores)");
  c.flags.add(c.app, "--batch", "batch", "trials between stop checks");
  c.flags.add(c.app, "--c", "c", "sigma_v^2 / sigma_w^2");
  c.flags.add(c.app, "--max-seconds", "max_seconds", "runtime budget; exit 3 when exceeded");
  c.flags.add(c.app, "--bias", "decoder.bias", "Fano bias");
  c.flags.add(c.app, "--step", "decoder.step", "Fano threshold step");
  c.flags.add(c.app, "--max-nodes", "decoder.max_nodes", "Fano node budget per decode");
  c.flags.add(c.app, "--boundary", "decoder.boundary", "relaxed|clamp");
  c.flags.add(c.app, "--taps", "code.taps", "parity taps, e.g. 1,2,1;1,1,2");
  c.flags.add(c.app, "--q", "code.q", "code alphabet (prime)");
  c.flags.add(c.app, "--out", "out", "CSV output path (default stdout)");
  c.flags.add(c.app, "--svg", "svg", "SVG plot path");
}

ExperimentConfig resolve(const SimCommand& c) {
  ConfigMap m = c.defaults;
  if (!c.config_file.empty())
    for (const auto& [k, v] : load_config_file(c.config_file)) m[k] = v;
  m["protocol"] = c.protocol;
  c.flags.apply(m);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw Error(Errc::Config, "--set expects key=value, got '" + s + "'");
    m[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  if (c.noiseless) m["noiseless"] = "true";
  return build_experiment(m);
}

void emit_csv(const std::string& path, const std::string& csv) {
  if (path.empty()) std::cout << csv;
  else write_text_file(path, csv);
}

int finish(const ExperimentConfig& e, const ExperimentOutcome& r) {
  emit_csv(e.out_csv, rows_to_csv(r.rows));
  if (!e.out_svg.empty()) write_text_file(e.out_svg, rows_to_svg(r.rows));
  if (r.budget_exceeded) {
    std::cerr << "runtime budget of " << e.max_seconds << " s exceeded; partial results written\n";
    return kExitBudget;
  }
  return kExitOk;
}

std::vector<double> fractions_for_segments(int segments) {
  require(segments >= 2, Errc::Config, "need at least 2 segments");
  return pareto_fractions(segments - 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lattice-coded cooperative relaying simulator"};
  app.require_subcommand(1);

  SimCommand naf, ddf, cma, bias;
  naf.protocol = "naf";
  naf.app = app.add_subcommand("sim-naf", "FER of the non-orthogonal amplify-and-forward relay");
  add_common(naf);
  naf.flags.add(naf.app, "--mode", "naf.mode", "gc|gc+cc");
  naf.flags.add(naf.app, "--frame", "naf.frame", "channel uses per codeword");
  naf.flags.add(naf.app, "--gain", "naf.gain", "fixed relay gain (default: max power per codeword)");

  ddf.protocol = "ddf";
  ddf.app = app.add_subcommand("sim-ddf", "FER of the modified dynamic decode-and-forward relay");
  add_common(ddf);
  ddf.flags.add(ddf.app, "--subblocks", "ddf.subblocks", "sub-blocks M");
  ddf.flags.add(ddf.app, "--symbols-per-subblock", "ddf.symbols_per_subblock", "channel uses per sub-block T");
  ddf.flags.add(ddf.app, "--fractions", "ddf.fractions", "waiting fractions, e.g. 1/2,2/3");
  ddf.flags.add(ddf.app, "--wait-rate", "ddf.wait_rate", "rate used by the waiting rule (default: code rate)");

  auto add_cma = [](SimCommand& c) {
    c.flags.add(c.app, "--frame", "cma.frame", "transmission instants N");
    c.flags.add(c.app, "--mode", "cma.mode", "uncoded|cc");
    c.flags.add(c.app, "--a", "cma.a", "broadcast gain (needs --b)");
    c.flags.add(c.app, "--b", "cma.b", "repetition gain");
  };
  cma.protocol = "cma";
  cma.app = app.add_subcommand("sim-cma", "FER of two-user cooperative multiple access");
  add_common(cma);
  add_cma(cma);

  bias.protocol = "cma";
  bias.defaults["cma.frame"] = "64";
  bias.app = app.add_subcommand("bias-sweep", "CMA FER and decoder effort versus Fano bias");
  add_common(bias);
  add_cma(bias);
  std::string biases = "0.8,1.2,2.0";
  bias.app->add_option("--biases", biases, "comma list of biases");

  // outage-ddf
  auto* outage = app.add_subcommand("outage-ddf", "Monte Carlo outage of the DDF relay");
  std::string out_snr = "0:30:1", out_segments = "3,6", out_path, out_svg;
  double out_rate = 2.0, out_c = 2.0, out_budget = 0.0;
  long long out_draws = 1000000;
  int out_m = 120, out_threads = 1;
  std::uint64_t out_seed = 1;
  outage->add_option("--snr-db", out_snr, "a:b:step or comma list");
  outage->add_option("--rate", out_rate, "target rate in BPCU");
  outage->add_option("--segments", out_segments, "comma list of segment counts (Pareto fractions)");
  outage->add_option("--subblocks", out_m, "sub-blocks M used to quantize waiting");
  outage->add_option("--draws", out_draws, "channel draws per point");
  outage->add_option("--seed", out_seed, "master seed");
  outage->add_option("--threads", out_threads, "worker threads");
  outage->add_option("--c", out_c, "sigma_v^2 / sigma_w^2");
  outage->add_option("--max-seconds", out_budget, "runtime budget; exit 3 when exceeded");
  outage->add_option("--out", out_path, "CSV output path");
  outage->add_option("--svg", out_svg, "SVG plot path");

  // dmt
  auto* dmt = app.add_subcommand("dmt", "diversity-multiplexing tradeoff curves");
  std::string dmt_protocol = "ddf", dmt_fractions, dmt_path, dmt_svg;
  int dmt_points = 101, dmt_m = 2, dmt_n = 2, dmt_segments = 0;
  dmt->add_option("--protocol", dmt_protocol, "naf|ddf|ddf-finite|cma|mimo");
  dmt->add_option("--fractions", dmt_fractions, "waiting fractions for ddf-finite");
  dmt->add_option("--segments", dmt_segments, "Pareto fractions for this many segments (ddf-finite)");
  dmt->add_option("--m", dmt_m, "transmit antennas (mimo)");
  dmt->add_option("--n", dmt_n, "receive antennas (mimo)");
  dmt->add_option("--points", dmt_points, "grid points");
  dmt->add_option("--out", dmt_path, "CSV output path");
  dmt->add_option("--svg", dmt_svg, "SVG plot path");

  // pareto
  auto* pareto = app.add_subcommand("pareto", "Pareto-optimal DDF waiting fractions");
  int pareto_segments = 3;
  std::string pareto_path;
  pareto->add_option("--segments", pareto_segments, "number of codeword segments (boundaries + 1)");
  pareto->add_option("--out", pareto_path, "CSV output path");

  // optimize-cma-gains
  auto* gains = app.add_subcommand("optimize-cma-gains", "outage-minimizing CMA gains (a, b)");
  std::string g_snr = "10:30:5", g_path;
  int g_frame = 64, g_draws = 4000;
  double g_rate = 2.0, g_step = 0.05, g_bmax = 0.95, g_c = 2.0;
  std::uint64_t g_seed = 1;
  gains->add_option("--snr-db", g_snr, "a:b:step or comma list");
  gains->add_option("--frame", g_frame, "transmission instants N");
  gains->add_option("--rate", g_rate, "sum rate in BPCU");
  gains->add_option("--draws", g_draws, "channel draws per candidate");
  gains->add_option("--seed", g_seed, "master seed");
  gains->add_option("--grid-step", g_step, "b grid step");
  gains->add_option("--b-max", g_bmax, "largest b on the grid");
  gains->add_option("--c", g_c, "sigma_v^2 / sigma_w^2");
  gains->add_option("--out", g_path, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (naf.app->parsed()) {
      const auto e = resolve(naf);
      return finish(e, run_fer_experiment_ex(e));
    }
    if (ddf.app->parsed()) {
      const auto e = resolve(ddf);
      return finish(e, run_fer_experiment_ex(e));
    }
    if (cma.app->parsed()) {
      const auto e = resolve(cma);
      return finish(e, run_fer_experiment_ex(e));
    }
    if (bias.app->parsed()) {
      const auto e = resolve(bias);
      return finish(e, run_bias_sweep_ex(e, parse_fractions(biases)));
    }
    if (outage->parsed()) {
      OutageDdfConfig oc;
      oc.rate = out_rate;
      oc.subblocks = out_m;
      oc.c = out_c;
      oc.draws = out_draws;
      oc.seed = out_seed;
      oc.threads = out_threads;
      require(out_draws > 0 && out_m > 0, Errc::Config, "draws and subblocks must be positive");
      const auto snrs = parse_snr_list(out_snr);
      const auto start = std::chrono::steady_clock::now();
      std::string csv = "segments,snr_db,outage\n";
      std::vector<PlotSeries> series;
      bool budget = false;
      for (const auto& s : split(out_segments, ',')) {
        const int seg = static_cast<int>(parse_int("segments", s));
        oc.fractions = fractions_for_segments(seg);
        series.push_back({std::to_string(seg) + " segments", {}});
        for (double snr : snrs) {
          const double p = outage_ddf(snr, oc);
          csv += std::to_string(seg) + "," + format_double(snr) + "," + format_double(p) + "\n";
          series.back().points.push_back({snr, p});
          if (out_budget > 0.0 &&
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() > out_budget) {
            budget = true;
            break;
          }
        }
        if (budget) break;
      }
      emit_csv(out_path, csv);
      if (!out_svg.empty()) write_text_file(out_svg, render_svg(series, "SNR (dB)", "outage"));
      if (budget) {
        std::cerr << "runtime budget exceeded; partial results written\n";
        return kExitBudget;
      }
      return kExitOk;
    }
    if (dmt->parsed()) {
      require(dmt_points >= 2, Errc::Config, "need at least 2 grid points");
      DmtCurve curve;
      if (dmt_protocol == "naf") curve = naf_curve();
      else if (dmt_protocol == "ddf") curve = ddf_curve();
      else if (dmt_protocol == "cma") curve = cma_curve();
      else if (dmt_protocol == "mimo") curve = mimo_curve(dmt_m, dmt_n);
      else if (dmt_protocol == "ddf-finite") {
        std::vector<double> f;
        if (!dmt_fractions.empty()) f = parse_fractions(dmt_fractions);
        else f = fractions_for_segments(dmt_segments > 0 ? dmt_segments : 3);
        for (std::size_t j = 0; j < f.size(); ++j)
          require(f[j] > 0.0 && f[j] < 1.0 && (j == 0 || f[j] > f[j - 1]), Errc::Config,
                  "fractions must be strictly increasing in (0,1)");
        curve = ddf_finite_curve(f);
      } else {
        throw Error(Errc::Config, "unknown dmt protocol '" + dmt_protocol + "'");
      }
      std::string csv = "r,d\n";
      PlotSeries s{curve.name, {}};
      for (int i = 0; i < dmt_points; ++i) {
        const double r = curve.r_max * i / (dmt_points - 1);
        csv += format_double(r) + "," + format_double(curve(r)) + "\n";
        s.points.push_back({r, curve(r)});
      }
      emit_csv(dmt_path, csv);
      if (!dmt_svg.empty()) write_text_file(dmt_svg, render_svg({s}, "r", "d(r)", false));
      return kExitOk;
    }
    if (pareto->parsed()) {
      const auto f = fractions_for_segments(pareto_segments);
      std::string csv = "j,f_j\n";
      for (std::size_t j = 0; j < f.size(); ++j) csv += std::to_string(j + 1) + "," + format_double(f[j]) + "\n";
      emit_csv(pareto_path, csv);
      std::cerr << "residual " << pareto_residual(f) << "\n";
      return kExitOk;
    }
    if (gains->parsed()) {
      require(g_frame > 0 && g_draws > 0, Errc::Config, "frame and draws must be positive");
      std::string csv = "snr_db,a,b,outage\n";
      for (double snr : parse_snr_list(g_snr)) {
        const auto p = snr_to_variances(snr, g_c);
        const auto r = optimize_gains(p, g_frame, g_rate, g_draws, g_seed, g_step, g_bmax);
        csv += format_double(snr) + "," + format_double(r.best.a) + "," + format_double(r.best.b) + "," +
               format_double(r.outage) + "\n";
      }
      emit_csv(g_path, csv);
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code() == Errc::Config || e.code() == Errc::NotPrime || e.code() == Errc::InvalidArgument) return kExitConfig;
    return 1;
  }
  return kExitOk;
}
