#pragma once

#include <iostream>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cursamp/analysis.hpp"
#include "cursamp/construction.hpp"

namespace cursamp {

// Everything a toolkit run needs, collected so a run is reproducible from its
// serialized form alone.  Probability expressions stay verbatim ("2^-8",
// "q^-2") and are parsed against the chosen field at run time.
struct RunConfig {
  std::string field_spec = "16";
  u32 m = 1;
  std::string delta;
  std::string epsilon;
  std::string family = "hyperplanes";
  std::string mode = "exact";
  u64 trials = 10000;
  u64 seed = 0;
  std::string sampler;  // line|curve|rscon|blkcnvt|outer|inner|samp ("" = infer)
  u32 curve_t = 0;
  u32 source_n = 0;
  std::vector<u32> widths;
  u32 k_param = 0;
  u32 n_param = 0;
  std::string mu_expr, var_expr, dev_expr;
  std::string x_hex;
  Caps caps;
  std::string out;
  std::string histogram_out;

  nlohmann::json to_json() const {
    return {{"field", field_spec},
            {"m", m},
            {"delta", delta},
            {"epsilon", epsilon},
            {"family", family},
            {"mode", mode},
            {"trials", trials},
            {"seed", seed},
            {"sampler", sampler},
            {"curve_t", curve_t},
            {"source_n", source_n},
            {"widths", widths},
            {"k", k_param},
            {"n", n_param},
            {"mu", mu_expr},
            {"var", var_expr},
            {"dev", dev_expr},
            {"x", x_hex},
            {"cap_states", caps.state_cap},
            {"cap_terms", caps.term_cap},
            {"cap_field", caps.field_cap},
            {"out", out},
            {"histogram_out", histogram_out}};
  }

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
      if (j.contains("field")) j.at("field").get_to(c.field_spec);
      if (j.contains("m")) j.at("m").get_to(c.m);
      if (j.contains("delta")) j.at("delta").get_to(c.delta);
      if (j.contains("epsilon")) j.at("epsilon").get_to(c.epsilon);
      if (j.contains("family")) j.at("family").get_to(c.family);
      if (j.contains("mode")) j.at("mode").get_to(c.mode);
      if (j.contains("trials")) j.at("trials").get_to(c.trials);
      if (j.contains("seed")) j.at("seed").get_to(c.seed);
      if (j.contains("sampler")) j.at("sampler").get_to(c.sampler);
      if (j.contains("curve_t")) j.at("curve_t").get_to(c.curve_t);
      if (j.contains("source_n")) j.at("source_n").get_to(c.source_n);
      if (j.contains("widths")) j.at("widths").get_to(c.widths);
      if (j.contains("k")) j.at("k").get_to(c.k_param);
      if (j.contains("n")) j.at("n").get_to(c.n_param);
      if (j.contains("mu")) j.at("mu").get_to(c.mu_expr);
      if (j.contains("var")) j.at("var").get_to(c.var_expr);
      if (j.contains("dev")) j.at("dev").get_to(c.dev_expr);
      if (j.contains("x")) j.at("x").get_to(c.x_hex);
      if (j.contains("cap_states")) j.at("cap_states").get_to(c.caps.state_cap);
      if (j.contains("cap_terms")) j.at("cap_terms").get_to(c.caps.term_cap);
      if (j.contains("cap_field")) j.at("cap_field").get_to(c.caps.field_cap);
      if (j.contains("out")) j.at("out").get_to(c.out);
      if (j.contains("histogram_out")) j.at("histogram_out").get_to(c.histogram_out);
    } catch (const nlohmann::json::exception& e) {
      throw ValueError(std::string("bad config: ") + e.what());
    }
    require(c.caps.state_cap > 0 && c.caps.term_cap > 0 && c.caps.field_cap > 0,
            "caps must be positive");
    return c;
  }
};

namespace cli_detail {

inline std::string sampler_kind(const RunConfig& cfg) {
  if (!cfg.sampler.empty()) return cfg.sampler;
  if (cfg.curve_t > 0) return "curve";
  if (cfg.source_n > 0) return cfg.widths.empty() ? "rscon" : "blkcnvt";
  if (!cfg.delta.empty()) return "samp";
  return "line";
}

inline Rat parse_delta(const RunConfig& cfg, const Field& f) {
  require(!cfg.delta.empty(), "this command needs --delta");
  return parse_prob_expr(cfg.delta, f.q());
}

inline Rat parse_epsilon(const RunConfig& cfg, const Field& f) {
  require(!cfg.epsilon.empty(), "this command needs --epsilon");
  return parse_prob_expr(cfg.epsilon, f.q());
}

inline Sampler build_from_config(const RunConfig& cfg, const Field& f) {
  std::string kind = sampler_kind(cfg);
  if (kind == "line") return line_sampler(f, cfg.m);
  if (kind == "curve") {
    require(cfg.curve_t >= 1, "curve sampler needs --curve-t");
    return curve_sampler(f, cfg.m, cfg.curve_t);
  }
  if (kind == "rscon") {
    require(cfg.source_n >= 1, "condenser needs --source-n");
    return rs_condenser(f, cfg.source_n, cfg.m);
  }
  if (kind == "blkcnvt") {
    require(cfg.source_n >= 1 && !cfg.widths.empty(),
            "block converter needs --source-n and --widths");
    return block_converter(f, cfg.source_n, cfg.widths);
  }
  if (kind == "outer") return build_outer(cfg.m, parse_delta(cfg, f), f, cfg.caps);
  if (kind == "inner") return build_inner(cfg.m, parse_delta(cfg, f), f, cfg.caps);
  if (kind == "samp") return build_samp(cfg.m, parse_delta(cfg, f), f, cfg.caps);
  throw ValueError("unknown sampler kind: " + kind);
}

inline std::vector<u64> randomness_from_config(const RunConfig& cfg, const Sampler& s) {
  std::vector<u64> x;
  if (cfg.x_hex.empty()) {
    Rng rng(cfg.seed);
    x.resize(s.n());
    for (auto& v : x) v = rng.below(s.field().q());
    return x;
  }
  size_t start = 0;
  while (start <= cfg.x_hex.size()) {
    size_t end = cfg.x_hex.find(',', start);
    std::string tok =
        cfg.x_hex.substr(start, end == std::string::npos ? end : end - start);
    x.push_back(parse_hex(tok));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  require(x.size() == s.n(), "--x needs exactly " + std::to_string(s.n()) +
                                 " comma-separated codes");
  for (u64 v : x) require(v < s.field().q(), "--x coordinate out of range");
  return x;
}

inline int cmd_params(const RunConfig& cfg, const Field& f, std::ostream& os) {
  ConstructionReport rep = samp_params(cfg.m, parse_delta(cfg, f), f);
  os << rep.to_json().dump(2) << "\n";
  return 0;
}

inline int cmd_build(const RunConfig& cfg, const Field& f, std::ostream& os) {
  Sampler s = build_from_config(cfg, f);
  os << s.descriptor().dump(2) << "\n";
  return 0;
}

inline int cmd_sample(const RunConfig& cfg, const Field& f, std::ostream& os) {
  Sampler s = build_from_config(cfg, f);
  std::vector<u64> x = randomness_from_config(cfg, s);
  u64 q = f.q();
  u64 rows = pow_sat(q, s.d());
  check_states(rows, cfg.caps, "sample dump");

  os << "seed";
  for (u32 i = 0; i < s.d(); ++i) os << ",y" << i;
  for (u32 i = 0; i < s.m(); ++i) os << ",p" << i;
  os << "\n";

  auto prep = s.prepare();
  prep->rebind(x);
  std::vector<u64> y(s.d(), 0), out(s.m());
  for (u64 r = 0; r < rows; ++r) {
    prep->eval(y, out);
    os << r;
    for (u64 v : y) os << "," << hex_code(v);
    for (u64 v : out) os << "," << hex_code(v);
    os << "\n";
    next_tuple(y, q);
  }
  return 0;
}

inline int cmd_eval(const RunConfig& cfg, const Field& f, std::ostream& os) {
  Sampler s = build_from_config(cfg, f);
  Rat eps = parse_epsilon(cfg, f);
  SubsetFamily fam = parse_subsets(f, s.m(), cfg.family, cfg.caps);
  require(cfg.mode == "exact" || cfg.mode == "mc", "mode must be exact or mc");

  std::vector<EvalReport> reports;
  if (cfg.mode == "exact") {
    reports = confidence_error_exact_all(s, fam, eps, cfg.caps);
  } else {
    require(cfg.trials >= 1, "mc mode needs --trials >= 1");
    reports = confidence_error_mc_all(s, fam, eps, cfg.trials, cfg.seed, cfg.caps);
  }

  nlohmann::json j = {{"schema", "cursamp/eval-run/v1"},
                      {"sampler", s.descriptor()},
                      {"family", fam.to_json()},
                      {"eps", cfg.epsilon},
                      {"mode", cfg.mode},
                      {"reports", nlohmann::json::array()}};
  for (const auto& r : reports) j["reports"].push_back(r.to_json());
  os << j.dump(2) << "\n";

  if (!cfg.histogram_out.empty()) {
    require(cfg.mode == "exact", "histogram export needs exact mode");
    std::ofstream hs(cfg.histogram_out);
    require(bool(hs), "cannot open histogram file: " + cfg.histogram_out);
    density_histogram_csv(hs, s, fam, 0, eps, cfg.caps);
  }
  return 0;
}

inline int cmd_verify(const RunConfig& cfg, const Field& f, std::ostream& os) {
  Sampler s = build_from_config(cfg, f);
  u64 q = f.q();
  nlohmann::json checks = nlohmann::json::array();
  bool failed = false;
  auto note = [&](const std::string& name, const std::string& status,
                  const std::string& detail) {
    checks.push_back({{"name", name}, {"status", status}, {"detail", detail}});
    if (status == "fail") failed = true;
  };

  // Port wiring: random inputs evaluate to field elements of the right arity.
  {
    Rng rng(cfg.seed);
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      std::vector<u64> x(s.n()), y(s.d());
      for (auto& v : x) v = rng.below(q);
      for (auto& v : y) v = rng.below(q);
      auto out = s.eval(x, y);
      ok = out.size() == s.m();
      for (u64 v : out) ok = ok && v < q;
    }
    note("output-range", ok ? "pass" : "fail", "20 random evaluations");
  }

  // Seed enumeration yields exactly q^d sample points.
  if (pow_sat(q, s.d()) <= cfg.caps.state_cap) {
    Rng rng(cfg.seed + 1);
    std::vector<u64> x(s.n());
    for (auto& v : x) v = rng.below(q);
    auto rows = s.sample_set(x, cfg.caps);
    bool ok = rows.size() == pow_sat(q, s.d());
    note("sample-set-shape", ok ? "pass" : "fail",
         std::to_string(rows.size()) + " points");
  } else {
    note("sample-set-shape", "skipped", "seed space exceeds the state cap");
  }

  // Exact joint uniformity for the basic samplers.
  {
    std::string kind = sampler_kind(cfg);
    u64 t = kind == "line" ? 2 : (kind == "curve" ? cfg.curve_t : 0);
    if (t == 0) {
      note("twise-uniformity", "skipped", "only defined for line and curve samplers");
    } else if (t > q || pow_sat(q, s.n()) > cfg.caps.state_cap ||
               pow_sat(q, t * s.m()) > cfg.caps.state_cap) {
      note("twise-uniformity", "skipped", "joint enumeration exceeds the state cap");
    } else {
      std::vector<std::vector<u64>> seeds;
      for (u64 i = 0; i < t; ++i) seeds.push_back({i});
      bool ok = twise_uniform(s, seeds, cfg.caps);
      note("twise-uniformity", ok ? "pass" : "fail",
           std::to_string(t) + "-wise joint distribution");
    }
  }

  // Declared degree dominates the symbolic form.
  try {
    PolyMap pm = s.symbolic(cfg.caps);
    bool ok = pm.degree() <= s.degree_bound();
    note("symbolic-degree", ok ? "pass" : "fail",
         "symbolic " + std::to_string(pm.degree()) + " vs declared " +
             std::to_string(s.degree_bound()));
  } catch (const CapExceeded&) {
    note("symbolic-degree", "skipped", "symbolic expansion exceeds the term cap");
  } catch (const ValueError&) {
    note("symbolic-degree", "skipped", "sampler has no symbolic form");
  }

  // Per-randomness slices interpolate within the declared degree.
  if (s.d() == 1 && q <= 4096) {
    Rng rng(cfg.seed + 2);
    bool ok = true;
    auto prep = s.prepare();
    std::vector<u64> x(s.n()), y(1), out(s.m());
    std::vector<std::vector<u64>> vals(s.m(), std::vector<u64>(q));
    for (int trial = 0; trial < 5 && ok; ++trial) {
      for (auto& v : x) v = rng.below(q);
      prep->rebind(x);
      for (u64 c = 0; c < q; ++c) {
        y[0] = c;
        prep->eval(y, out);
        for (u32 j = 0; j < s.m(); ++j) vals[j][c] = out[j];
      }
      for (u32 j = 0; j < s.m() && ok; ++j)
        ok = interpolated_degree(f, vals[j]) <= s.degree_bound();
    }
    note("slice-degree", ok ? "pass" : "fail", "5 random slices interpolated");
  } else {
    note("slice-degree", "skipped", "needs a one-coordinate seed and small q");
  }

  nlohmann::json j = {{"schema", "cursamp/verify-report/v1"},
                      {"sampler", s.descriptor()},
                      {"checks", checks},
                      {"verdict", failed ? "fail" : "pass"}};
  os << j.dump(2) << "\n";
  return failed ? 1 : 0;
}

inline int cmd_bounds(const RunConfig& cfg, const Field& f, std::ostream& os) {
  u64 q = f.q();
  nlohmann::json rows = nlohmann::json::array();
  if (!cfg.epsilon.empty())
    rows.push_back(line_confidence(parse_epsilon(cfg, f), q).to_json());
  if (cfg.curve_t > 0) rows.push_back(curve_confidence(q, cfg.curve_t).to_json());
  if (!cfg.delta.empty())
    rows.push_back(degree_lower_bound(q, parse_delta(cfg, f)).to_json());
  if (cfg.n_param > 0) {
    rows.push_back(extractor_to_sampler(q, cfg.k_param, cfg.n_param).to_json());
    if (!cfg.epsilon.empty())
      rows.push_back(
          sampler_to_extractor(q, cfg.k_param, cfg.n_param, parse_epsilon(cfg, f))
              .to_json());
  }
  if (!cfg.var_expr.empty() && !cfg.dev_expr.empty())
    rows.push_back(pairwise_tail(parse_prob_expr(cfg.var_expr, q),
                                 parse_prob_expr(cfg.dev_expr, q))
                       .to_json());
  if (!cfg.mu_expr.empty() && !cfg.dev_expr.empty() && cfg.curve_t > 0)
    rows.push_back(twise_tail(cfg.curve_t, parse_prob_expr(cfg.mu_expr, q),
                              parse_prob_expr(cfg.dev_expr, q))
                       .to_json());
  require(!rows.empty(),
          "no bound inputs given; pass --epsilon, --delta, --curve-t, --k/--n, or "
          "--var/--dev");
  nlohmann::json j = {{"schema", "cursamp/bounds-report/v1"},
                      {"field", f.spec_string()},
                      {"bounds", rows}};
  os << j.dump(2) << "\n";
  return 0;
}

}  // namespace cli_detail

// Dispatches one toolkit command against a parsed configuration, writing the
// report to the given stream.  Returns the process exit status: 0 success,
// 1 verification failure, 2 bad input, 3 cap exceeded, 4 internal error.
inline int run(const std::string& command, const RunConfig& cfg, std::ostream& os) {
  using namespace cli_detail;
  try {
    Field f = Field::parse(cfg.field_spec);
    if (command == "params") return cmd_params(cfg, f, os);
    if (command == "build") return cmd_build(cfg, f, os);
    if (command == "sample") return cmd_sample(cfg, f, os);
    if (command == "eval") return cmd_eval(cfg, f, os);
    if (command == "verify") return cmd_verify(cfg, f, os);
    if (command == "bounds") return cmd_bounds(cfg, f, os);
    throw ValueError("unknown command: " + command);
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InternalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ValueError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace cursamp
