// Build the combined sampler at moderate parameters, print its construction
// report, then estimate its confidence error over the dyadic box family by
// Monte Carlo and dump one member's report as JSON.

#include <iostream>

#include "cursamp/analysis.hpp"
#include "cursamp/construction.hpp"

using namespace cursamp;

int main() {
  Field f = Field::make(2, 6);  // F_64
  u32 m = 2;
  Rat delta(1, 4096);

  ConstructionReport params = samp_params(m, delta, f);
  std::cout << params.to_json().dump(2) << "\n";

  Sampler s = build_samp(m, delta, f);
  auto boxes = SubsetFamily::dyadic_boxes(f, m);
  auto reports = confidence_error_mc_all(s, boxes, Rat(1, 10), 20000, 1);

  Rat worst;
  size_t worst_i = 0;
  for (size_t i = 0; i < reports.size(); ++i)
    if (reports[i].delta_hat > worst) {
      worst = reports[i].delta_hat;
      worst_i = i;
    }
  std::cout << "measured " << reports.size() << " dyadic boxes, worst delta_hat = "
            << rat_string(worst) << " (target " << rat_string(delta) << ")\n";
  std::cout << reports[worst_i].to_json().dump(2) << "\n";
  return 0;
}
