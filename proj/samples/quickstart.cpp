// Small tour: tradeoff curves, Pareto fractions, and a short DDF run at one SNR.

#include <iostream>

#include "latcoop/latcoop.hpp"

int main() {
  using namespace latcoop;

  std::cout << "d(0.25): naf " << dmt_naf(0.25) << ", ddf " << dmt_ddf(0.25) << ", cma " << dmt_cma(0.25) << "\n";

  std::cout << "Pareto fractions, 4 segments:";
  for (double f : pareto_fractions(3)) std::cout << " " << f;
  std::cout << "\n";

  ExperimentConfig e = build_experiment(parse_config_text(R"(
    protocol = ddf
    rate = 2
    snr_db = 14
    max_trials = 200
    min_errors = 20
    seed = 7
  )"));
  std::cout << rows_to_csv(run_fer_experiment(e));
}
