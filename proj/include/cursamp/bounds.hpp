#pragma once

#include <cmath>
#include <string>

#include <json.hpp>

#include "cursamp/rational.hpp"

namespace cursamp {

// A predicted value from one of the tail/conversion formulas, tagged with how
// much trust it deserves: exact bounds hold as stated, asymptotic ones hide an
// unknown constant and a minimum field size.
struct BoundResult {
  std::string kind;
  double value = 0;
  bool exact = false;
  bool has_rational = false;
  Rat rational;
  std::string note;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"kind", kind},
                        {"value", value},
                        {"flag", exact ? "exact-bound" : "asymptotic-with-unknown-constant"}};
    if (has_rational) j["exact_value"] = rat_string(rational);
    if (!note.empty()) j["note"] = note;
    return j;
  }
};

inline BoundResult exact_bound(std::string kind, Rat v, std::string note = "") {
  BoundResult r;
  r.kind = std::move(kind);
  r.rational = std::move(v);
  r.value = to_double(r.rational);
  r.exact = true;
  r.has_rational = true;
  r.note = std::move(note);
  return r;
}

// Chebyshev tail for a sum of pairwise independent variables:
// Pr[|X - mu| >= A] <= sum Var[X_i] / A^2.
inline BoundResult pairwise_tail(const Rat& sum_var, const Rat& a) {
  require(sum_var >= 0, "variance sum must be nonnegative");
  require(a > 0, "deviation must be positive");
  return exact_bound("pairwise-tail", sum_var / (a * a));
}

// t-wise independent tail ((t*mu + t^2) / A^2)^{t/2}, reported with constant 1.
inline BoundResult twise_tail(u64 t, const Rat& mu, const Rat& a) {
  require(t >= 1, "t must be >= 1");
  require(mu >= 0, "mean must be nonnegative");
  require(a > 0, "deviation must be positive");
  double base = to_double((Rat(t) * mu + Rat(t) * t) / (a * a));
  BoundResult r;
  r.kind = "twise-tail";
  r.value = std::pow(base, double(t) / 2.0);
  r.exact = false;
  r.note = "asymptotic form with the hidden constant set to 1";
  return r;
}

// Confidence error of the line sampler: delta = 1 / (eps^2 q).
inline BoundResult line_confidence(const Rat& eps, u64 q) {
  require(eps > 0, "accuracy must be positive");
  require(q >= 2, "field size must be >= 2");
  return exact_bound("line-confidence", Rat(1) / (eps * eps * Rat(q)));
}

// Confidence error of the basic curve sampler: delta = q^{-t/4}.  Holds for
// t >= 4 and sufficiently large q; always reported as asymptotic guidance.
inline BoundResult curve_confidence(u64 q, u64 t) {
  require(q >= 2, "field size must be >= 2");
  require(t >= 1, "degree must be >= 1");
  BoundResult r;
  r.kind = "curve-confidence";
  r.value = std::pow(double(q), -double(t) / 4.0);
  r.exact = false;
  r.note = t >= 4 ? "requires sufficiently large q"
                  : "stated for t >= 4; also requires sufficiently large q";
  return r;
}

// Extractor-to-sampler conversion: a (k, eps) extractor yields confidence
// error delta = 2 q^{k-n} at accuracy eps.
inline BoundResult extractor_to_sampler(u64 q, u64 k, u64 n) {
  require(q >= 2, "field size must be >= 2");
  require(k <= n, "entropy threshold cannot exceed the source length");
  return exact_bound("extractor-to-sampler", Rat(2) / Rat(bigpow(q, n - k)));
}

// Sampler-to-extractor conversion: an (eps, delta) sampler gives a
// (k, eps + q^{k-n} + delta') extractor flavor; the delta term is eps q^{k-n}.
inline BoundResult sampler_to_extractor(u64 q, u64 k, u64 n, const Rat& eps) {
  require(q >= 2, "field size must be >= 2");
  require(k <= n, "entropy threshold cannot exceed the source length");
  require(eps > 0, "accuracy must be positive");
  return exact_bound("sampler-to-extractor", eps / Rat(bigpow(q, n - k)));
}

// Lower bound on the degree of any (eps, delta) curve sampler:
// t >= max{1, (1/2) log_q(k/delta) - 1} with k = floor(q/2).
inline BoundResult degree_lower_bound(u64 q, const Rat& delta) {
  require(q >= 2, "field size must be >= 2");
  require(delta > 0 && delta < 1, "confidence error must be in (0,1)");
  double k = double(q / 2);
  double lg = std::log(k / to_double(delta)) / std::log(double(q));
  BoundResult r;
  r.kind = "degree-lower-bound";
  r.value = std::max(1.0, 0.5 * lg - 1.0);
  r.exact = true;
  r.note = "any curve sampler with these parameters needs at least this degree";
  return r;
}

}  // namespace cursamp
