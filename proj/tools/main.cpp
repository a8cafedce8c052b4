#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cursamp/cli.hpp"

namespace {

void add_common_flags(CLI::App* sub, cursamp::RunConfig& cfg) {
  sub->add_option("--q", cfg.field_spec,
                  "field: size, p^k, or p^k:c0,c1,... modulus coefficients");
  sub->add_option("--m", cfg.m, "output dimension");
  sub->add_option("--delta", cfg.delta, "confidence error, e.g. 1/256, 2^-8, q^-2");
  sub->add_option("--epsilon", cfg.epsilon, "accuracy, e.g. 0.1, 1/10");
  sub->add_option("--family", cfg.family,
                  "test sets: hyperplanes | dyadic[:max=N] | balls:r=,count=,seed= | "
                  "random:count=,density=,seed= | explicit:...");
  sub->add_option("--mode", cfg.mode, "eval mode: exact or mc");
  sub->add_option("--trials", cfg.trials, "mc trial count");
  sub->add_option("--seed", cfg.seed, "rng seed");
  sub->add_option("--sampler", cfg.sampler,
                  "line | curve | rscon | blkcnvt | outer | inner | samp");
  sub->add_option("--curve-t", cfg.curve_t, "curve degree (implies --sampler curve)");
  sub->add_option("--source-n", cfg.source_n, "condenser source length");
  sub->add_option("--widths", cfg.widths, "block converter widths")->delimiter(',');
  sub->add_option("--k", cfg.k_param, "entropy threshold for conversion bounds");
  sub->add_option("--n", cfg.n_param, "source length for conversion bounds");
  sub->add_option("--mu", cfg.mu_expr, "mean for the t-wise tail bound");
  sub->add_option("--var", cfg.var_expr, "variance sum for the pairwise tail bound");
  sub->add_option("--dev", cfg.dev_expr, "deviation for the tail bounds");
  sub->add_option("--x", cfg.x_hex, "randomness: comma-separated hex codes");
  sub->add_option("--cap-states", cfg.caps.state_cap, "enumeration size cap");
  sub->add_option("--cap-terms", cfg.caps.term_cap, "symbolic term cap");
  sub->add_option("--out", cfg.out, "report file (default stdout)");
  sub->add_option("--histogram", cfg.histogram_out,
                  "per-randomness density CSV (eval, exact mode)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"explicit low-degree curve sampler toolkit"};
  app.require_subcommand(1);

  cursamp::RunConfig cfg;
  std::string command;
  const std::pair<const char*, const char*> subs[] = {
      {"params", "derive and print the construction parameter ledgers"},
      {"build", "build a sampler and print its descriptor"},
      {"sample", "dump the sample set for one randomness string as CSV"},
      {"eval", "estimate confidence error against a subset family"},
      {"verify", "run structural invariant checks; nonzero exit on failure"},
      {"bounds", "evaluate the applicable tail and conversion bounds"},
  };
  for (auto [name, desc] : subs) {
    CLI::App* sub = app.add_subcommand(name, desc);
    add_common_flags(sub, cfg);
    sub->callback([&command, name = name] { command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!cfg.out.empty()) {
    std::ofstream os(cfg.out);
    if (!os) {
      std::cerr << "error: cannot open output file: " << cfg.out << "\n";
      return 2;
    }
    return cursamp::run(command, cfg, os);
  }
  return cursamp::run(command, cfg, std::cout);
}
