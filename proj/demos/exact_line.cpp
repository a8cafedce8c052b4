// Exact analysis of a line sampler over a small field: enumerate every
// randomness string, score each coordinate hyperplane, and print which
// members deviate by more than eps.

#include <cstdio>

#include "cursamp/analysis.hpp"

using namespace cursamp;

int main() {
  Field f = Field::make(2, 3);  // F_8
  Sampler s = line_sampler(f, 2);
  auto planes = SubsetFamily::hyperplanes(f, 2);
  Rat eps(1, 2);

  auto reports = confidence_error_exact_all(s, planes, eps);
  std::printf("line over F_%llu, m=2, eps=1/2, %llu randomness strings\n",
              (unsigned long long)f.q(),
              (unsigned long long)pow_sat(f.q(), s.n()));
  std::printf("%-8s %-8s %s\n", "member", "mu", "delta_hat");
  for (const auto& r : reports)
    std::printf("%-8s %-8s %s\n", r.subset_id.c_str(), rat_string(r.mu).c_str(),
                rat_string(r.delta_hat).c_str());

  auto bound = line_confidence(eps, f.q());
  std::printf("exact bound 1/(eps^2 q) = %s\n", rat_string(bound.rational).c_str());
  return 0;
}
