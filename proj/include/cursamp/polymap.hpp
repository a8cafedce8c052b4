#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "cursamp/gf.hpp"

namespace cursamp {

// One monomial: per-variable exponents plus a coefficient code.
struct PolyTerm {
  std::vector<u32> exps;
  u64 coeff = 0;
};

// Sparse polynomial in `arity` variables.  Terms are kept canonical: sorted by
// exponent vector, no zero coefficients, every exponent vector sized to arity.
class SparsePoly {
 public:
  SparsePoly() = default;
  explicit SparsePoly(u32 arity) : arity_(arity) {}

  static SparsePoly constant(u32 arity, u64 c) {
    SparsePoly p(arity);
    if (c) p.terms_.push_back({std::vector<u32>(arity, 0), c});
    return p;
  }

  static SparsePoly variable(u32 arity, u32 i) {
    require(i < arity, "variable index out of range");
    SparsePoly p(arity);
    std::vector<u32> e(arity, 0);
    e[i] = 1;
    p.terms_.push_back({std::move(e), 1});
    return p;
  }

  u32 arity() const { return arity_; }
  const std::vector<PolyTerm>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  // Zero polynomial reports degree 0; callers that care use is_zero().
  u64 degree() const {
    u64 d = 0;
    for (const auto& t : terms_) {
      u64 s = 0;
      for (u32 e : t.exps) s += e;
      d = std::max(d, s);
    }
    return d;
  }

  u64 eval(const Field& f, std::span<const u64> in) const {
    require(in.size() == arity_, "eval arity mismatch");
    u64 acc = 0;
    for (const auto& t : terms_) {
      u64 m = t.coeff;
      for (u32 i = 0; i < arity_ && m; ++i)
        if (t.exps[i]) m = f.mul(m, f.pow(in[i], t.exps[i]));
      acc = f.add(acc, m);
    }
    return acc;
  }

  SparsePoly add(const Field& f, const SparsePoly& o, const Caps& caps = {}) const {
    require(arity_ == o.arity_, "arity mismatch in add");
    std::map<std::vector<u32>, u64> acc;
    for (const auto& t : terms_) acc[t.exps] = t.coeff;
    for (const auto& t : o.terms_) {
      u64& slot = acc[t.exps];
      slot = f.add(slot, t.coeff);
      if (!slot) acc.erase(t.exps);
    }
    return from_map(arity_, std::move(acc), caps);
  }

  SparsePoly scale(const Field& f, u64 c) const {
    SparsePoly r(arity_);
    if (!c) return r;
    r.terms_ = terms_;
    for (auto& t : r.terms_) t.coeff = f.mul(t.coeff, c);
    return r;
  }

  SparsePoly mul(const Field& f, const SparsePoly& o, const Caps& caps = {}) const {
    require(arity_ == o.arity_, "arity mismatch in mul");
    std::map<std::vector<u32>, u64> acc;
    std::vector<u32> e(arity_);
    for (const auto& a : terms_)
      for (const auto& b : o.terms_) {
        for (u32 i = 0; i < arity_; ++i) e[i] = a.exps[i] + b.exps[i];
        u64 c = f.mul(a.coeff, b.coeff);
        auto it = acc.find(e);
        if (it == acc.end()) {
          if (c) {
            acc.emplace(e, c);
            if (acc.size() > caps.term_cap)
              throw CapExceeded("polynomial product exceeds term cap");
          }
        } else {
          it->second = f.add(it->second, c);
          if (!it->second) acc.erase(it);
        }
      }
    return from_map(arity_, std::move(acc), caps);
  }

  SparsePoly pow(const Field& f, u32 e, const Caps& caps = {}) const {
    SparsePoly r = constant(arity_, 1);
    SparsePoly base = *this;
    while (e) {
      if (e & 1) r = r.mul(f, base, caps);
      e >>= 1;
      if (e) base = base.mul(f, base, caps);
    }
    return r;
  }

  // Substitutes args[i] for variable i.  All args share one arity.
  SparsePoly subst(const Field& f, std::span<const SparsePoly> args,
                   const Caps& caps = {}) const {
    require(args.size() == arity_, "subst needs one argument per variable");
    u32 out_arity = arity_ ? args[0].arity() : 0;
    for (const auto& a : args)
      require(a.arity() == out_arity, "subst arguments disagree on arity");
    // incremental power cache per argument
    std::vector<std::vector<SparsePoly>> pows(arity_);
    auto arg_pow = [&](u32 i, u32 e) -> const SparsePoly& {
      auto& v = pows[i];
      if (v.empty()) v.push_back(constant(out_arity, 1));
      while (v.size() <= e) v.push_back(v.back().mul(f, args[i], caps));
      return v[e];
    };
    SparsePoly acc(out_arity);
    for (const auto& t : terms_) {
      SparsePoly m = constant(out_arity, t.coeff);
      for (u32 i = 0; i < arity_; ++i)
        if (t.exps[i]) m = m.mul(f, arg_pow(i, t.exps[i]), caps);
      acc = acc.add(f, m, caps);
    }
    return acc;
  }

  bool operator==(const SparsePoly& o) const {
    return arity_ == o.arity_ && terms_.size() == o.terms_.size() &&
           std::equal(terms_.begin(), terms_.end(), o.terms_.begin(),
                      [](const PolyTerm& a, const PolyTerm& b) {
                        return a.exps == b.exps && a.coeff == b.coeff;
                      });
  }

  static SparsePoly from_terms(u32 arity, std::vector<PolyTerm> ts, const Field& f,
                               const Caps& caps = {}) {
    std::map<std::vector<u32>, u64> acc;
    for (auto& t : ts) {
      require(t.exps.size() == arity, "term exponent vector has wrong length");
      u64& slot = acc[t.exps];
      slot = f.add(slot, t.coeff);
      if (!slot) acc.erase(t.exps);
    }
    return from_map(arity, std::move(acc), caps);
  }

  // For structural rewrites (variable renumbering) where exponent vectors are
  // already pairwise distinct and coefficients nonzero.
  static SparsePoly from_disjoint(u32 arity, std::vector<PolyTerm> ts) {
    std::sort(ts.begin(), ts.end(),
              [](const PolyTerm& a, const PolyTerm& b) { return a.exps < b.exps; });
    for (size_t i = 0; i + 1 < ts.size(); ++i)
      require_internal(ts[i].exps != ts[i + 1].exps, "from_disjoint saw a collision");
    SparsePoly p(arity);
    p.terms_ = std::move(ts);
    return p;
  }

 private:
  static SparsePoly from_map(u32 arity, std::map<std::vector<u32>, u64> acc,
                             const Caps& caps) {
    if (acc.size() > caps.term_cap) throw CapExceeded("polynomial exceeds term cap");
    SparsePoly p(arity);
    p.terms_.reserve(acc.size());
    for (auto& [e, c] : acc) p.terms_.push_back({e, c});
    return p;
  }

  u32 arity_ = 0;
  std::vector<PolyTerm> terms_;
};

// Polynomial map F_q^arity -> F_q^(#components).
class PolyMap {
 public:
  PolyMap() = default;
  PolyMap(Field f, u32 arity, std::vector<SparsePoly> comps)
      : field_(std::move(f)), arity_(arity), comps_(std::move(comps)) {
    for (const auto& c : comps_)
      require(c.arity() == arity_, "component arity mismatch");
  }

  static PolyMap identity(const Field& f, u32 n) {
    std::vector<SparsePoly> comps;
    comps.reserve(n);
    for (u32 i = 0; i < n; ++i) comps.push_back(SparsePoly::variable(n, i));
    return PolyMap(f, n, std::move(comps));
  }

  const Field& field() const { return field_; }
  u32 arity() const { return arity_; }
  u32 coarity() const { return u32(comps_.size()); }
  const std::vector<SparsePoly>& components() const { return comps_; }

  u64 degree() const {
    u64 d = 0;
    for (const auto& c : comps_) d = std::max(d, c.degree());
    return d;
  }

  void eval(std::span<const u64> in, std::span<u64> out) const {
    require(out.size() == comps_.size(), "output span has wrong length");
    for (size_t i = 0; i < comps_.size(); ++i) out[i] = comps_[i].eval(field_, in);
  }

  std::vector<u64> eval(std::span<const u64> in) const {
    std::vector<u64> out(comps_.size());
    eval(in, out);
    return out;
  }

  // this(inner(x)), classic composition.
  PolyMap compose(const PolyMap& inner, const Caps& caps = {}) const {
    require(field_.same(inner.field_), "composition across different fields");
    require(arity_ == inner.coarity(), "composition arity mismatch");
    std::vector<SparsePoly> out;
    out.reserve(comps_.size());
    for (const auto& c : comps_)
      out.push_back(c.subst(field_, inner.comps_, caps));
    return PolyMap(field_, inner.arity_, std::move(out));
  }

  // Substitute arbitrary argument polynomials (all with arity new_arity).
  PolyMap subst(std::span<const SparsePoly> args, u32 new_arity,
                const Caps& caps = {}) const {
    std::vector<SparsePoly> out;
    out.reserve(comps_.size());
    for (const auto& c : comps_) out.push_back(c.subst(field_, args, caps));
    return PolyMap(field_, new_arity, std::move(out));
  }

  bool operator==(const PolyMap& o) const {
    return field_.same(o.field_) && arity_ == o.arity_ && comps_ == o.comps_;
  }

 private:
  Field field_;
  u32 arity_ = 0;
  std::vector<SparsePoly> comps_;
};

// Re-reads a map over F_{q^dim} as a map over F_q by writing every input in
// the tower basis and splitting every output into its basis coordinates.
// Total degree never grows: each extension variable becomes a linear form.
inline PolyMap flatten_map(const PolyMap& f, const ExtensionTower& tower,
                           const Caps& caps = {}) {
  require(f.field().same(tower.ext()), "flatten_map: map is not over this tower");
  const Field& E = tower.ext();
  const Field& B = tower.base();
  u32 D = tower.dim();
  u32 a = f.arity();
  u32 out_arity = a * D;

  // basis constants xi^j as extension codes
  std::vector<u64> basis(D);
  std::vector<u64> unit(D, 0);
  for (u32 j = 0; j < D; ++j) {
    unit.assign(D, 0);
    unit[j] = 1;
    basis[j] = tower.lift(unit);
  }
  std::vector<SparsePoly> forms;  // linear form for each extension variable
  forms.reserve(a);
  for (u32 i = 0; i < a; ++i) {
    SparsePoly L(out_arity);
    std::vector<PolyTerm> ts;
    for (u32 j = 0; j < D; ++j) {
      std::vector<u32> e(out_arity, 0);
      e[i * D + j] = 1;
      ts.push_back({std::move(e), basis[j]});
    }
    forms.push_back(SparsePoly::from_terms(out_arity, std::move(ts), E, caps));
  }

  std::vector<SparsePoly> out(f.coarity() * D, SparsePoly(out_arity));
  std::vector<u64> flat(D);
  for (u32 c = 0; c < f.coarity(); ++c) {
    // expand the component over the extension with base variables
    std::vector<SparsePoly> expanded_args(forms.begin(), forms.end());
    SparsePoly expanded =
        f.components()[c].subst(E, expanded_args, caps);
    // split each extension coefficient into base coordinates
    std::vector<std::map<std::vector<u32>, u64>> buckets(D);
    for (const auto& t : expanded.terms()) {
      tower.flatten(t.coeff, flat);
      for (u32 j = 0; j < D; ++j)
        if (flat[j]) buckets[j][t.exps] = flat[j];
    }
    for (u32 j = 0; j < D; ++j) {
      std::vector<PolyTerm> ts;
      ts.reserve(buckets[j].size());
      for (auto& [e, cf] : buckets[j]) ts.push_back({e, cf});
      out[c * D + j] = SparsePoly::from_terms(out_arity, std::move(ts), B, caps);
    }
  }
  return PolyMap(B, out_arity, std::move(out));
}

// Unique interpolating polynomial of degree < #points through (xs[i], ys[i]).
inline SparsePoly interpolate_univariate(const Field& f, std::span<const u64> xs,
                                         std::span<const u64> ys) {
  require(xs.size() == ys.size(), "interpolation needs matching point lists");
  size_t n = xs.size();
  require(n >= 1, "interpolation needs at least one point");
  // dense Lagrange accumulation
  std::vector<u64> acc(n, 0);
  std::vector<u64> num(n + 1, 0);
  for (size_t i = 0; i < n; ++i) {
    // numerator = prod_{j != i} (X - xs[j])
    num.assign(n + 1, 0);
    num[0] = 1;
    size_t deg = 0;
    u64 denom = 1;
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      require(xs[i] != xs[j], "interpolation points must be distinct");
      denom = f.mul(denom, f.sub(xs[i], xs[j]));
      for (size_t d2 = deg + 2; d2-- > 0;) {
        u64 hi = d2 > 0 ? num[d2 - 1] : 0;
        num[d2] = f.sub(hi, f.mul(num[d2], xs[j]));
      }
      ++deg;
    }
    u64 w = f.div(ys[i], denom);
    for (size_t d2 = 0; d2 <= deg; ++d2)
      acc[d2] = f.add(acc[d2], f.mul(w, num[d2]));
  }
  std::vector<PolyTerm> ts;
  for (size_t d2 = 0; d2 < n; ++d2)
    if (acc[d2]) ts.push_back({{u32(d2)}, acc[d2]});
  return SparsePoly::from_terms(1, std::move(ts), f);
}

// Degree of the unique polynomial of degree < q matching value_at(code) on the
// whole field, in canonical code order.
inline u64 interpolated_degree(const Field& f, std::span<const u64> values) {
  require(values.size() == f.q(), "need one value per field element");
  std::vector<u64> xs(f.q());
  for (u64 i = 0; i < f.q(); ++i) xs[i] = i;
  return interpolate_univariate(f, xs, values).degree();
}

}  // namespace cursamp
