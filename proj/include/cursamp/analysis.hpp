#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "cursamp/bounds.hpp"
#include "cursamp/distribution.hpp"
#include "cursamp/samplers.hpp"
#include "cursamp/subsets.hpp"

namespace cursamp {

// Exact density pair for one test set: the true mu(A) and the density of A in
// an explicit sample multiset T.
inline std::pair<Rat, Rat> densities(const SubsetFamily& fam, size_t member,
                                     const std::vector<std::vector<u64>>& sample) {
  require(member < fam.size(), "subset member out of range");
  require(!sample.empty(), "sample multiset is empty");
  u64 h = 0;
  for (const auto& row : sample) {
    require(row.size() == fam.m(), "sample point has wrong arity");
    h += fam.contains(member, row);
  }
  return {fam.member_mu(member), Rat(h, sample.size())};
}

struct EvalReport {
  std::string sampler_kind;
  std::string field;
  u32 n = 0, d = 0, m = 0;
  u64 declared_degree = 0;
  std::string subset_kind, subset_id;
  Rat mu, eps, delta_hat;
  std::string mode;
  u64 trials = 0, fails = 0;
  bool has_ci = false;
  double ci_lo = 0, ci_hi = 0;
  std::string ci_method;
  bool has_seed = false;
  u64 seed = 0;
  std::vector<BoundResult> bounds;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"schema", "cursamp/eval-report/v1"},
                        {"sampler", {{"kind", sampler_kind},
                                     {"field", field},
                                     {"n", n},
                                     {"d", d},
                                     {"m", m},
                                     {"declared_degree", declared_degree}}},
                        {"subset", {{"kind", subset_kind},
                                    {"id", subset_id},
                                    {"mu", rat_string(mu)},
                                    {"mu_value", to_double(mu)}}},
                        {"eps", rat_string(eps)},
                        {"eps_value", to_double(eps)},
                        {"mode", mode},
                        {"trials", trials},
                        {"fails", fails},
                        {"delta_hat", rat_string(delta_hat)},
                        {"delta_hat_value", to_double(delta_hat)}};
    if (has_ci) j["ci"] = {{"lo", ci_lo}, {"hi", ci_hi}, {"method", ci_method}};
    if (has_seed) j["seed"] = seed;
    if (!bounds.empty()) {
      nlohmann::json b = nlohmann::json::array();
      for (const auto& x : bounds) b.push_back(x.to_json());
      j["predicted"] = b;
    }
    return j;
  }
};

namespace analysis_detail {

// Integer cutoffs for the deviation test on hit counts: with h hits out of
// ny sample points, |h/ny - mu| > eps holds iff h < lo or h > hi.
struct FailCuts {
  u64 lo = 0;
  u64 hi = 0;
};

inline FailCuts fail_cuts(const Rat& mu, const Rat& eps, u64 ny) {
  namespace mp = boost::multiprecision;
  FailCuts c;
  Rat hi_x = Rat(ny) * (mu + eps);
  if (hi_x >= Rat(ny)) {
    c.hi = ny;
  } else {
    c.hi = BigInt(mp::numerator(hi_x) / mp::denominator(hi_x)).convert_to<u64>();
  }
  Rat lo_x = Rat(ny) * (mu - eps);
  if (lo_x <= 0) {
    c.lo = 0;
  } else {
    BigInt num = mp::numerator(lo_x), den = mp::denominator(lo_x);
    c.lo = BigInt((num + den - 1) / den).convert_to<u64>();
  }
  return c;
}

inline EvalReport base_report(const Sampler& s, const SubsetFamily& fam, size_t member,
                              const Rat& eps) {
  EvalReport r;
  r.sampler_kind = s.node()->describe().at("kind").get<std::string>();
  r.field = s.field().spec_string();
  r.n = s.n();
  r.d = s.d();
  r.m = s.m();
  r.declared_degree = s.degree_bound();
  r.subset_kind = fam.kind();
  r.subset_id = fam.member_id(member);
  r.mu = fam.member_mu(member);
  r.eps = eps;
  return r;
}

inline void check_spaces(const Sampler& s, const SubsetFamily& fam, const Rat& eps) {
  require(s.valid(), "sampler is empty");
  require(s.field().same(fam.field()), "sampler and subsets live over different fields");
  require(s.m() == fam.m(), "sampler output dimension does not match the subset family");
  require(eps > 0, "accuracy must be positive");
}

inline void wald_ci_99(EvalReport& r) {
  double p = to_double(r.delta_hat);
  double half = 2.5758293035489004 *
                std::sqrt(std::max(0.0, p * (1.0 - p)) / double(r.trials));
  r.ci_lo = std::max(0.0, p - half);
  r.ci_hi = std::min(1.0, p + half);
  r.ci_method = "wald-normal-99";
  r.has_ci = true;
}

}  // namespace analysis_detail

// Attaches the formula predictions that apply to this sampler shape.
inline void attach_predictions(EvalReport& r, const Sampler& s, const Rat& eps) {
  if (r.sampler_kind == "line") r.bounds.push_back(line_confidence(eps, s.field().q()));
  if (r.sampler_kind == "curve")
    r.bounds.push_back(curve_confidence(s.field().q(), s.degree_bound()));
}

// Exact confidence error for one test set: enumerates every randomness string,
// computes the sample density exactly, and counts deviations.  The optional
// per_x callback sees (x index, hits, sample points) for histogram export.
inline EvalReport confidence_error_exact(
    const Sampler& s, const SubsetFamily& fam, size_t member, const Rat& eps, Caps caps = {},
    const std::function<void(u64, u64, u64)>& per_x = nullptr) {
  using namespace analysis_detail;
  check_spaces(s, fam, eps);
  require(member < fam.size(), "subset member out of range");
  u64 q = s.field().q();
  u64 nx = pow_sat(q, s.n());
  u64 ny = pow_sat(q, s.d());
  check_states(nx, caps, "randomness enumeration");
  check_states(ny, caps, "seed enumeration");
  check_states(nx * ny, caps, "exact evaluation work");

  FailCuts cuts = fail_cuts(fam.member_mu(member), eps, ny);
  auto prep = s.prepare();
  std::vector<u64> x(s.n(), 0), y(s.d(), 0), out(s.m());
  u64 fails = 0;
  for (u64 xi = 0; xi < nx; ++xi) {
    prep->rebind(x);
    std::fill(y.begin(), y.end(), 0);
    u64 h = 0;
    for (u64 yi = 0; yi < ny; ++yi) {
      prep->eval(y, out);
      h += fam.contains(member, out);
      next_tuple(y, q);
    }
    if (h < cuts.lo || h > cuts.hi) ++fails;
    if (per_x) per_x(xi, h, ny);
    next_tuple(x, q);
  }

  EvalReport r = base_report(s, fam, member, eps);
  r.mode = "exact";
  r.trials = nx;
  r.fails = fails;
  r.delta_hat = Rat(fails, nx);
  attach_predictions(r, s, eps);
  return r;
}

// Exact confidence error for every member of a family in one pass.  Members
// containing none of the current sample points are settled via bookkeeping,
// so per-point work scales with the incidence count, not the family size.
inline std::vector<EvalReport> confidence_error_exact_all(const Sampler& s,
                                                          const SubsetFamily& fam,
                                                          const Rat& eps, Caps caps = {}) {
  using namespace analysis_detail;
  check_spaces(s, fam, eps);
  require(fam.size() >= 1, "subset family is empty");
  u64 q = s.field().q();
  u64 nx = pow_sat(q, s.n());
  u64 ny = pow_sat(q, s.d());
  check_states(nx, caps, "randomness enumeration");
  check_states(ny, caps, "seed enumeration");
  check_states(nx * ny, caps, "exact evaluation work");

  size_t nm = fam.size();
  std::vector<FailCuts> cuts(nm);
  std::vector<u64> fail_count(nm, 0), touch_count(nm, 0), hits(nm, 0);
  std::vector<u64> stamp(nm, ~u64(0));
  for (size_t i = 0; i < nm; ++i) cuts[i] = fail_cuts(fam.member_mu(i), eps, ny);

  auto prep = s.prepare();
  std::vector<u64> x(s.n(), 0), y(s.d(), 0), out(s.m());
  std::vector<u32> touched, memb;
  for (u64 xi = 0; xi < nx; ++xi) {
    prep->rebind(x);
    std::fill(y.begin(), y.end(), 0);
    for (u64 yi = 0; yi < ny; ++yi) {
      prep->eval(y, out);
      memb.clear();
      fam.members_of(out, memb);
      for (u32 mi : memb) {
        if (stamp[mi] != xi) {
          stamp[mi] = xi;
          hits[mi] = 0;
          touched.push_back(mi);
        }
        ++hits[mi];
      }
      next_tuple(y, q);
    }
    for (u32 mi : touched) {
      if (hits[mi] < cuts[mi].lo || hits[mi] > cuts[mi].hi) ++fail_count[mi];
      ++touch_count[mi];
    }
    touched.clear();
    next_tuple(x, q);
  }

  std::vector<EvalReport> out_reports;
  out_reports.reserve(nm);
  for (size_t i = 0; i < nm; ++i) {
    u64 fails = fail_count[i];
    if (cuts[i].lo > 0) fails += nx - touch_count[i];  // empty slices deviate
    EvalReport r = base_report(s, fam, i, eps);
    r.mode = "exact";
    r.trials = nx;
    r.fails = fails;
    r.delta_hat = Rat(fails, nx);
    attach_predictions(r, s, eps);
    out_reports.push_back(std::move(r));
  }
  return out_reports;
}

// Monte Carlo confidence error: draws trial randomness strings from a seeded
// generator (one derived stream per trial, so reports are reproducible), still
// computing each slice density exactly.  The 99% interval is a Wald normal
// approximation around the hit rate.
inline EvalReport confidence_error_mc(const Sampler& s, const SubsetFamily& fam,
                                      size_t member, const Rat& eps, u64 trials, u64 seed,
                                      Caps caps = {}) {
  using namespace analysis_detail;
  check_spaces(s, fam, eps);
  require(member < fam.size(), "subset member out of range");
  require(trials >= 1, "need at least one trial");
  u64 q = s.field().q();
  u64 ny = pow_sat(q, s.d());
  check_states(ny, caps, "seed enumeration");

  FailCuts cuts = fail_cuts(fam.member_mu(member), eps, ny);
  auto prep = s.prepare();
  std::vector<u64> x(s.n()), y(s.d(), 0), out(s.m());
  u64 fails = 0;
  for (u64 t = 0; t < trials; ++t) {
    Rng rng(seed, t);
    for (auto& v : x) v = rng.below(q);
    prep->rebind(x);
    std::fill(y.begin(), y.end(), 0);
    u64 h = 0;
    for (u64 yi = 0; yi < ny; ++yi) {
      prep->eval(y, out);
      h += fam.contains(member, out);
      next_tuple(y, q);
    }
    if (h < cuts.lo || h > cuts.hi) ++fails;
  }

  EvalReport r = base_report(s, fam, member, eps);
  r.mode = "mc";
  r.trials = trials;
  r.fails = fails;
  r.delta_hat = Rat(fails, trials);
  r.has_seed = true;
  r.seed = seed;
  wald_ci_99(r);
  attach_predictions(r, s, eps);
  return r;
}

// Monte Carlo sweep over a whole family: every member is scored against the
// same seeded trial randomness, with the per-trial sample set shared through
// the incidence machinery of the exact sweep.
inline std::vector<EvalReport> confidence_error_mc_all(const Sampler& s,
                                                       const SubsetFamily& fam,
                                                       const Rat& eps, u64 trials,
                                                       u64 seed, Caps caps = {}) {
  using namespace analysis_detail;
  check_spaces(s, fam, eps);
  require(fam.size() >= 1, "subset family is empty");
  require(trials >= 1, "need at least one trial");
  u64 q = s.field().q();
  u64 ny = pow_sat(q, s.d());
  check_states(ny, caps, "seed enumeration");

  size_t nm = fam.size();
  std::vector<FailCuts> cuts(nm);
  std::vector<u64> fail_count(nm, 0), touch_count(nm, 0), hits(nm, 0);
  std::vector<u64> stamp(nm, ~u64(0));
  for (size_t i = 0; i < nm; ++i) cuts[i] = fail_cuts(fam.member_mu(i), eps, ny);

  auto prep = s.prepare();
  std::vector<u64> x(s.n()), y(s.d(), 0), out(s.m());
  std::vector<u32> touched, memb;
  for (u64 t = 0; t < trials; ++t) {
    Rng rng(seed, t);
    for (auto& v : x) v = rng.below(q);
    prep->rebind(x);
    std::fill(y.begin(), y.end(), 0);
    for (u64 yi = 0; yi < ny; ++yi) {
      prep->eval(y, out);
      memb.clear();
      fam.members_of(out, memb);
      for (u32 mi : memb) {
        if (stamp[mi] != t) {
          stamp[mi] = t;
          hits[mi] = 0;
          touched.push_back(mi);
        }
        ++hits[mi];
      }
      next_tuple(y, q);
    }
    for (u32 mi : touched) {
      if (hits[mi] < cuts[mi].lo || hits[mi] > cuts[mi].hi) ++fail_count[mi];
      ++touch_count[mi];
    }
    touched.clear();
  }

  std::vector<EvalReport> out_reports;
  out_reports.reserve(nm);
  for (size_t i = 0; i < nm; ++i) {
    u64 fails = fail_count[i];
    if (cuts[i].lo > 0) fails += trials - touch_count[i];
    EvalReport r = base_report(s, fam, i, eps);
    r.mode = "mc";
    r.trials = trials;
    r.fails = fails;
    r.delta_hat = Rat(fails, trials);
    r.has_seed = true;
    r.seed = seed;
    wald_ci_99(r);
    attach_predictions(r, s, eps);
    out_reports.push_back(std::move(r));
  }
  return out_reports;
}

// Exact (x index, hits, points) histogram rows as CSV; mu_t is hits/points.
inline void density_histogram_csv(std::ostream& os, const Sampler& s,
                                  const SubsetFamily& fam, size_t member, const Rat& eps,
                                  Caps caps = {}) {
  os << "x_index,hits,points,mu_t\n";
  confidence_error_exact(s, fam, member, eps, caps, [&](u64 xi, u64 h, u64 pts) {
    os << xi << "," << h << "," << pts << "," << (double(h) / double(pts)) << "\n";
  });
}

// Joint output distribution over uniform randomness and uniform seed.
inline DistributionTable output_distribution(const Sampler& s, Caps caps = {}) {
  require(s.valid(), "sampler is empty");
  u64 q = s.field().q();
  u64 nx = pow_sat(q, s.n());
  u64 ny = pow_sat(q, s.d());
  check_states(nx, caps, "randomness enumeration");
  check_states(ny, caps, "seed enumeration");
  check_states(nx * ny, caps, "output distribution work");

  DistributionTable tab(s.field(), s.m(), caps);
  auto prep = s.prepare();
  std::vector<u64> x(s.n(), 0), y(s.d(), 0), out(s.m());
  for (u64 xi = 0; xi < nx; ++xi) {
    prep->rebind(x);
    std::fill(y.begin(), y.end(), 0);
    for (u64 yi = 0; yi < ny; ++yi) {
      prep->eval(y, out);
      tab.add(out);
      next_tuple(y, q);
    }
    next_tuple(x, q);
  }
  return tab;
}

// Checks that the joint output at the given distinct seeds is exactly uniform
// over (F_q^m)^t when the randomness is uniform.
inline bool twise_uniform(const Sampler& s, const std::vector<std::vector<u64>>& seeds,
                          Caps caps = {}) {
  require(s.valid(), "sampler is empty");
  require(!seeds.empty(), "need at least one seed");
  u64 q = s.field().q();
  std::unordered_set<u64> seen;
  for (const auto& sd : seeds) {
    require(sd.size() == s.d(), "seed has wrong arity");
    for (u64 v : sd) require(v < q, "seed coordinate out of range");
    require(seen.insert(tuple_to_index(sd, q)).second, "duplicate seed in t-wise check");
  }
  u64 t = seeds.size();
  u64 nx = pow_sat(q, s.n());
  u64 joint = pow_sat(q, u64(t) * s.m());
  check_states(nx, caps, "randomness enumeration");
  check_states(joint, caps, "joint distribution table");

  std::vector<u64> counts(size_t(joint), 0);
  auto prep = s.prepare();
  std::vector<u64> x(s.n(), 0), out(s.m());
  for (u64 xi = 0; xi < nx; ++xi) {
    prep->rebind(x);
    u64 idx = 0;
    for (const auto& sd : seeds) {
      prep->eval(sd, out);
      for (u64 v : out) idx = idx * q + v;
    }
    ++counts[size_t(idx)];
    next_tuple(x, q);
  }
  auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
  return *mn == *mx;
}

// All randomness strings whose slice lands in T with probability > eps,
// returned as indices in canonical order.
inline std::vector<u64> list_recovery(const Sampler& s,
                                      const std::vector<std::vector<u64>>& t_points,
                                      const Rat& eps, Caps caps = {}) {
  namespace mp = boost::multiprecision;
  require(s.valid(), "sampler is empty");
  require(eps >= 0, "threshold must be nonnegative");
  u64 q = s.field().q();
  std::unordered_set<u64> tset;
  for (const auto& p : t_points) {
    require(p.size() == s.m(), "target point has wrong arity");
    for (u64 v : p) require(v < q, "target point coordinate out of range");
    tset.insert(tuple_to_index(p, q));
  }
  u64 nx = pow_sat(q, s.n());
  u64 ny = pow_sat(q, s.d());
  check_states(nx, caps, "randomness enumeration");
  check_states(ny, caps, "seed enumeration");
  check_states(nx * ny, caps, "list recovery work");

  BigInt rhs = BigInt(mp::numerator(eps)) * ny;
  BigInt eden(mp::denominator(eps));
  auto prep = s.prepare();
  std::vector<u64> x(s.n(), 0), y(s.d(), 0), out(s.m());
  std::vector<u64> found;
  for (u64 xi = 0; xi < nx; ++xi) {
    prep->rebind(x);
    std::fill(y.begin(), y.end(), 0);
    u64 h = 0;
    for (u64 yi = 0; yi < ny; ++yi) {
      prep->eval(y, out);
      h += tset.count(tuple_to_index(out, q)) > 0;
      next_tuple(y, q);
    }
    if (BigInt(h) * eden > rhs) found.push_back(xi);
    next_tuple(x, q);
  }
  return found;
}

}  // namespace cursamp
