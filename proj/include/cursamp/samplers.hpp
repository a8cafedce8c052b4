#pragma once

#include <functional>
#include <memory>

#include <json.hpp>

#include "cursamp/polymap.hpp"

namespace cursamp {

using json = nlohmann::json;

// Evaluation state bound to one randomness value.  rebind() swaps in a new
// randomness; eval() maps one seed to an output row.  Implementations copy
// whatever they keep out of the spans.
class PreparedEval {
 public:
  virtual ~PreparedEval() = default;
  virtual void rebind(std::span<const u64> x) = 0;
  virtual void eval(std::span<const u64> y, std::span<u64> out) = 0;
};

// A node in a sampler's evaluator tree.  Ports count elements of `field`:
// n randomness, d seed, m output.  degree_bound is the declared per-slice
// degree bound; combinators multiply it.
class EvalNode {
 public:
  EvalNode(Field f, u32 n, u32 d, u32 m, u64 degree_bound)
      : field_(std::move(f)), n_(n), d_(d), m_(m), degree_bound_(degree_bound) {}
  virtual ~EvalNode() = default;

  const Field& field() const { return field_; }
  u32 n() const { return n_; }
  u32 d() const { return d_; }
  u32 m() const { return m_; }
  u64 degree_bound() const { return degree_bound_; }

  virtual std::unique_ptr<PreparedEval> prepare() const = 0;
  // Polynomial form with variables (x_0..x_{n-1}, y_0..y_{d-1}).
  virtual PolyMap symbolic(const Caps& caps) const = 0;
  virtual json describe() const = 0;

 protected:
  Field field_;
  u32 n_, d_, m_;
  u64 degree_bound_;
};

using NodePtr = std::shared_ptr<const EvalNode>;

namespace node_detail {

inline SparsePoly pad_vars(const SparsePoly& p, u32 new_arity) {
  std::vector<PolyTerm> ts;
  ts.reserve(p.terms().size());
  for (const auto& t : p.terms()) {
    std::vector<u32> e(new_arity, 0);
    std::copy(t.exps.begin(), t.exps.end(), e.begin());
    ts.push_back({std::move(e), t.coeff});
  }
  return SparsePoly::from_disjoint(new_arity, std::move(ts));
}

inline SparsePoly shift_vars(const SparsePoly& p, u32 offset, u32 new_arity) {
  std::vector<PolyTerm> ts;
  ts.reserve(p.terms().size());
  for (const auto& t : p.terms()) {
    std::vector<u32> e(new_arity, 0);
    std::copy(t.exps.begin(), t.exps.end(), e.begin() + offset);
    ts.push_back({std::move(e), t.coeff});
  }
  return SparsePoly::from_disjoint(new_arity, std::move(ts));
}

}  // namespace node_detail

// ---- basic samplers --------------------------------------------------------

// S((a,b), y) = (a_1 y + b_1, ..., a_m y + b_m); randomness layout a then b.
class LineNode final : public EvalNode {
 public:
  LineNode(Field f, u32 m) : EvalNode(std::move(f), 2 * m, 1, m, 2) {
    require(m >= 1, "line sampler needs m >= 1");
  }

  std::unique_ptr<PreparedEval> prepare() const override {
    struct P final : PreparedEval {
      const Field f;
      u32 m;
      std::vector<u64> ab;
      P(Field ff, u32 mm) : f(std::move(ff)), m(mm), ab(size_t(2) * mm) {}
      void rebind(std::span<const u64> x) override {
        std::copy(x.begin(), x.end(), ab.begin());
      }
      void eval(std::span<const u64> y, std::span<u64> out) override {
        for (u32 c = 0; c < m; ++c) out[c] = f.add(f.mul(ab[c], y[0]), ab[m + c]);
      }
    };
    return std::make_unique<P>(field_, m_);
  }

  PolyMap symbolic(const Caps& caps) const override {
    u32 ar = n_ + 1;
    std::vector<SparsePoly> comps;
    for (u32 c = 0; c < m_; ++c) {
      std::vector<u32> e1(ar, 0), e2(ar, 0);
      e1[c] = 1;
      e1[n_] = 1;
      e2[m_ + c] = 1;
      comps.push_back(SparsePoly::from_terms(ar, {{e1, 1}, {e2, 1}}, field_, caps));
    }
    return PolyMap(field_, ar, std::move(comps));
  }

  json describe() const override {
    return {{"kind", "line"}, {"q", field_.q()}, {"m", m_}};
  }
};

// S((c_0..c_{t-1}), y) = (sum_i c_{i,1} y^i, ..., sum_i c_{i,m} y^i).
class CurveNode final : public EvalNode {
 public:
  CurveNode(Field f, u32 m, u32 t) : EvalNode(std::move(f), t * m, 1, m, t), t_(t) {
    require(m >= 1 && t >= 1, "curve sampler needs m, t >= 1");
  }

  u32 t() const { return t_; }

  std::unique_ptr<PreparedEval> prepare() const override {
    struct P final : PreparedEval {
      const Field f;
      u32 m, t;
      std::vector<u64> c;
      P(Field ff, u32 mm, u32 tt) : f(std::move(ff)), m(mm), t(tt), c(size_t(mm) * tt) {}
      void rebind(std::span<const u64> x) override {
        std::copy(x.begin(), x.end(), c.begin());
      }
      void eval(std::span<const u64> y, std::span<u64> out) override {
        for (u32 j = 0; j < m; ++j) out[j] = 0;
        u64 pw = 1;
        for (u32 i = 0; i < t; ++i) {
          const u64* ci = &c[size_t(i) * m];
          for (u32 j = 0; j < m; ++j) out[j] = f.add(out[j], f.mul(ci[j], pw));
          if (i + 1 < t) pw = f.mul(pw, y[0]);
        }
      }
    };
    return std::make_unique<P>(field_, m_, t_);
  }

  PolyMap symbolic(const Caps& caps) const override {
    u32 ar = n_ + 1;
    std::vector<SparsePoly> comps;
    for (u32 c = 0; c < m_; ++c) {
      std::vector<PolyTerm> ts;
      for (u32 i = 0; i < t_; ++i) {
        std::vector<u32> e(ar, 0);
        e[i * m_ + c] = 1;
        e[n_] = i;
        ts.push_back({std::move(e), 1});
      }
      comps.push_back(SparsePoly::from_terms(ar, std::move(ts), field_, caps));
    }
    return PolyMap(field_, ar, std::move(comps));
  }

  json describe() const override {
    return {{"kind", "curve"}, {"q", field_.q()}, {"m", m_}, {"t", t_}};
  }

 private:
  u32 t_;
};

// S(x, y) = first m coordinates of y; randomness ignored.
class SeedPrefixNode final : public EvalNode {
 public:
  SeedPrefixNode(Field f, u32 n, u32 d, u32 m) : EvalNode(std::move(f), n, d, m, 1) {
    require(m <= d, "seed prefix cannot exceed the seed length");
  }

  std::unique_ptr<PreparedEval> prepare() const override {
    struct P final : PreparedEval {
      u32 m;
      explicit P(u32 mm) : m(mm) {}
      void rebind(std::span<const u64>) override {}
      void eval(std::span<const u64> y, std::span<u64> out) override {
        std::copy(y.begin(), y.begin() + m, out.begin());
      }
    };
    return std::make_unique<P>(m_);
  }

  PolyMap symbolic(const Caps&) const override {
    std::vector<SparsePoly> comps;
    for (u32 c = 0; c < m_; ++c)
      comps.push_back(SparsePoly::variable(n_ + d_, n_ + c));
    return PolyMap(field_, n_ + d_, std::move(comps));
  }

  json describe() const override {
    return {{"kind", "seed-prefix"}, {"q", field_.q()}, {"n", n_}, {"d", d_}, {"m", m_}};
  }
};

// Opaque sampler for tests and experiments; no symbolic form.
class FunctionNode final : public EvalNode {
 public:
  using Fn = std::function<void(std::span<const u64>, std::span<const u64>, std::span<u64>)>;

  FunctionNode(Field f, u32 n, u32 d, u32 m, u64 degree_bound, Fn fn)
      : EvalNode(std::move(f), n, d, m, degree_bound), fn_(std::move(fn)) {}

  std::unique_ptr<PreparedEval> prepare() const override {
    struct P final : PreparedEval {
      const FunctionNode* node;
      std::vector<u64> x;
      explicit P(const FunctionNode* nn) : node(nn), x(nn->n()) {}
      void rebind(std::span<const u64> xx) override {
        std::copy(xx.begin(), xx.end(), x.begin());
      }
      void eval(std::span<const u64> y, std::span<u64> out) override {
        node->fn_(x, y, out);
      }
    };
    return std::make_unique<P>(this);
  }

  PolyMap symbolic(const Caps&) const override {
    throw ValueError("opaque sampler has no symbolic form");
  }

  json describe() const override {
    return {{"kind", "function"}, {"q", field_.q()}, {"n", n_}, {"d", d_}, {"m", m_}};
  }

 private:
  Fn fn_;
};

// ---- combinators -----------------------------------------------------------

// Error reduction: (S * f)(x, (y_f, y_S)) = S(f(x, y_f), y_S).
// f's output feeds S's randomness port, so f must emit S.n elements.
class ReduceErrorNode final : public EvalNode {
 public:
  ReduceErrorNode(NodePtr S, NodePtr f)
      : EvalNode(S->field(), f->n(), f->d() + S->d(), S->m(),
                 S->degree_bound() * f->degree_bound()),
        S_(std::move(S)),
        f_(std::move(f)) {
    require(S_->field().same(f_->field()), "error reduction across different fields");
    require(f_->m() == S_->n(),
            "error reduction: feeder output must match sampler randomness");
  }

  std::unique_ptr<PreparedEval> prepare() const override {
    struct P final : PreparedEval {
      const ReduceErrorNode* node;
      std::unique_ptr<PreparedEval> fp, sp;
      std::vector<u64> r;
      explicit P(const ReduceErrorNode* nn)
          : node(nn), fp(nn->f_->prepare()), sp(nn->S_->prepare()), r(nn->f_->m()) {}
      void rebind(std::span<const u64> x) override { fp->rebind(x); }
      void eval(std::span<const u64> y, std::span<u64> out) override {
        u32 df = node->f_->d();
        fp->eval(y.subspan(0, df), r);
        sp->rebind(r);
        sp->eval(y.subspan(df), out);
      }
    };
    return std::make_unique<P>(this);
  }

  PolyMap symbolic(const Caps& caps) const override {
    using node_detail::pad_vars;
    PolyMap fsym = f_->symbolic(caps);   // vars: x (n), y_f (d_f)
    PolyMap ssym = S_->symbolic(caps);   // vars: r (S.n), y_S (S.d)
    u32 total = n_ + d_;
    std::vector<SparsePoly> args;
    args.reserve(S_->n() + S_->d());
    for (u32 i = 0; i < S_->n(); ++i)
      args.push_back(pad_vars(fsym.components()[i], total));
    for (u32 j = 0; j < S_->d(); ++j)
      args.push_back(SparsePoly::variable(total, n_ + f_->d() + j));
    return ssym.subst(args, total, caps);
  }

  json describe() const override {
    return {{"kind", "reduce-error"},
            {"sampler", S_->describe()},
            {"feeder", f_->describe()}};
  }

  const NodePtr& inner_sampler() const { return S_; }
  const NodePtr& feeder() const { return f_; }

 private:
  NodePtr S_, f_;
};

// Iterated sampling: (S1 o S2)((x1,x2), y) = S1(x1, S2(x2, y)).
// S2's output becomes S1's seed.
class SubsampleNode final : public EvalNode {
 public:
  SubsampleNode(NodePtr S1, NodePtr S2)
      : EvalNode(S1->field(), S1->n() + S2->n(), S2->d(), S1->m(),
                 S1->degree_bound() * S2->degree_bound()),
        S1_(std::move(S1)),
        S2_(std::move(S2)) {
    require(S1_->field().same(S2_->field()), "subsampling across different fields");
    require(S2_->m() == S1_->d(), "subsampling: inner output must match outer seed");
  }

  std::unique_ptr<PreparedEval> prepare() const override {
    struct P final : PreparedEval {
      const SubsampleNode* node;
      std::unique_ptr<PreparedEval> p1, p2;
      std::vector<u64> mid;
      explicit P(const SubsampleNode* nn)
          : node(nn), p1(nn->S1_->prepare()), p2(nn->S2_->prepare()), mid(nn->S2_->m()) {}
      void rebind(std::span<const u64> x) override {
        p1->rebind(x.subspan(0, node->S1_->n()));
        p2->rebind(x.subspan(node->S1_->n()));
      }
      void eval(std::span<const u64> y, std::span<u64> out) override {
        p2->eval(y, mid);
        p1->eval(mid, out);
      }
    };
    return std::make_unique<P>(this);
  }

  PolyMap symbolic(const Caps& caps) const override {
    using node_detail::shift_vars;
    PolyMap s1 = S1_->symbolic(caps);
    PolyMap s2 = S2_->symbolic(caps);
    u32 total = n_ + d_;
    std::vector<SparsePoly> args;
    args.reserve(S1_->n() + S1_->d());
    for (u32 i = 0; i < S1_->n(); ++i) args.push_back(SparsePoly::variable(total, i));
    for (u32 j = 0; j < S1_->d(); ++j)
      args.push_back(shift_vars(s2.components()[j], S1_->n(), total));
    return s1.subst(args, total, caps);
  }

  json describe() const override {
    return {{"kind", "subsample"},
            {"outer", S1_->describe()},
            {"inner", S2_->describe()}};
  }

 private:
  NodePtr S1_, S2_;
};

// Keep the first m output coordinates.
class ProjectNode final : public EvalNode {
 public:
  ProjectNode(NodePtr S, u32 m)
      : EvalNode(S->field(), S->n(), S->d(), m, S->degree_bound()), S_(std::move(S)) {
    require(m >= 1 && m <= S_->m(), "projection width out of range");
  }

  std::unique_ptr<PreparedEval> prepare() const override {
    struct P final : PreparedEval {
      std::unique_ptr<PreparedEval> sp;
      std::vector<u64> full;
      u32 m;
      P(std::unique_ptr<PreparedEval> s, u32 fullm, u32 mm)
          : sp(std::move(s)), full(fullm), m(mm) {}
      void rebind(std::span<const u64> x) override { sp->rebind(x); }
      void eval(std::span<const u64> y, std::span<u64> out) override {
        sp->eval(y, full);
        std::copy(full.begin(), full.begin() + m, out.begin());
      }
    };
    return std::make_unique<P>(S_->prepare(), S_->m(), m_);
  }

  PolyMap symbolic(const Caps& caps) const override {
    PolyMap s = S_->symbolic(caps);
    std::vector<SparsePoly> comps(s.components().begin(),
                                  s.components().begin() + m_);
    return PolyMap(field_, s.arity(), std::move(comps));
  }

  json describe() const override {
    return {{"kind", "project"}, {"m", m_}, {"inner", S_->describe()}};
  }

 private:
  NodePtr S_;
};

// Presents a sampler over F_{q^D} as a sampler over F_q: every extension
// element becomes D base coordinates through the tower basis.
class FlattenNode final : public EvalNode {
 public:
  FlattenNode(NodePtr S, ExtensionTower tower)
      : EvalNode(tower.base(), S->n() * tower.dim(), S->d() * tower.dim(),
                 S->m() * tower.dim(), S->degree_bound()),
        S_(std::move(S)),
        tower_(std::move(tower)) {
    require(S_->field().same(tower_.ext()), "flatten: sampler is not over this tower");
  }

  std::unique_ptr<PreparedEval> prepare() const override {
    struct P final : PreparedEval {
      const FlattenNode* node;
      std::unique_ptr<PreparedEval> sp;
      std::vector<u64> xe, ye, oe;
      explicit P(const FlattenNode* nn)
          : node(nn),
            sp(nn->S_->prepare()),
            xe(nn->S_->n()),
            ye(nn->S_->d()),
            oe(nn->S_->m()) {}
      void rebind(std::span<const u64> x) override {
        u32 D = node->tower_.dim();
        for (u32 i = 0; i < node->S_->n(); ++i)
          xe[i] = node->tower_.lift(x.subspan(size_t(i) * D, D));
        sp->rebind(xe);
      }
      void eval(std::span<const u64> y, std::span<u64> out) override {
        u32 D = node->tower_.dim();
        for (u32 i = 0; i < node->S_->d(); ++i)
          ye[i] = node->tower_.lift(y.subspan(size_t(i) * D, D));
        sp->eval(ye, oe);
        for (u32 i = 0; i < node->S_->m(); ++i)
          node->tower_.flatten(oe[i], out.subspan(size_t(i) * D, D));
      }
    };
    return std::make_unique<P>(this);
  }

  PolyMap symbolic(const Caps& caps) const override {
    // Variable order after flattening matches the port order: x groups then y
    // groups, each extension element expanding to dim consecutive base vars.
    return flatten_map(S_->symbolic(caps), tower_, caps);
  }

  json describe() const override {
    return {{"kind", "flatten"},
            {"base_q", tower_.base().q()},
            {"dim", tower_.dim()},
            {"inner", S_->describe()}};
  }

  const ExtensionTower& tower() const { return tower_; }

 private:
  NodePtr S_;
  ExtensionTower tower_;
};

// ---- public value type -------------------------------------------------------

class Sampler {
 public:
  Sampler() = default;
  explicit Sampler(NodePtr node) : node_(std::move(node)) {}

  bool valid() const { return bool(node_); }
  const NodePtr& node() const { return node_; }
  const Field& field() const { return node_->field(); }
  u32 n() const { return node_->n(); }
  u32 d() const { return node_->d(); }
  u32 m() const { return node_->m(); }
  u64 degree_bound() const { return node_->degree_bound(); }

  std::unique_ptr<PreparedEval> prepare() const { return node_->prepare(); }

  std::vector<u64> eval(std::span<const u64> x, std::span<const u64> y) const {
    require(x.size() == n() && y.size() == d(), "eval port size mismatch");
    auto p = prepare();
    p->rebind(x);
    std::vector<u64> out(m());
    p->eval(y, out);
    return out;
  }

  // All q^d sample points for this randomness, seed-major in canonical seed
  // order; row i holds S(x, seed_i).
  std::vector<std::vector<u64>> sample_set(std::span<const u64> x,
                                           const Caps& caps = {}) const {
    u64 count = pow_sat(field().q(), d());
    check_states(count, caps, "sample_set seed enumeration");
    auto p = prepare();
    p->rebind(x);
    std::vector<std::vector<u64>> rows;
    rows.reserve(count);
    std::vector<u64> seed(d(), 0), out(m());
    for (u64 i = 0; i < count; ++i) {
      p->eval(seed, out);
      rows.push_back(out);
      next_tuple(seed, field().q());
    }
    return rows;
  }

  PolyMap symbolic(const Caps& caps = {}) const { return node_->symbolic(caps); }

  json descriptor() const {
    return {{"schema", "cursamp/sampler/v1"},
            {"field", field().spec_string()},
            {"n", n()},
            {"d", d()},
            {"m", m()},
            {"declared_degree", degree_bound()},
            {"provenance", node_->describe()}};
  }

 private:
  NodePtr node_;
};

inline Sampler line_sampler(const Field& f, u32 m) {
  return Sampler(std::make_shared<LineNode>(f, m));
}

inline Sampler curve_sampler(const Field& f, u32 m, u32 t) {
  return Sampler(std::make_shared<CurveNode>(f, m, t));
}

inline Sampler seed_prefix_sampler(const Field& f, u32 n, u32 d, u32 m) {
  return Sampler(std::make_shared<SeedPrefixNode>(f, n, d, m));
}

inline Sampler opaque_sampler(const Field& f, u32 n, u32 d, u32 m, u64 degree_bound,
                              FunctionNode::Fn fn) {
  return Sampler(std::make_shared<FunctionNode>(f, n, d, m, degree_bound, std::move(fn)));
}

inline Sampler reduce_error(const Sampler& S, const Sampler& f) {
  return Sampler(std::make_shared<ReduceErrorNode>(S.node(), f.node()));
}

inline Sampler subsample(const Sampler& S1, const Sampler& S2) {
  return Sampler(std::make_shared<SubsampleNode>(S1.node(), S2.node()));
}

inline Sampler project_output(const Sampler& S, u32 m) {
  return Sampler(std::make_shared<ProjectNode>(S.node(), m));
}

inline Sampler flatten_sampler(const Sampler& S, const ExtensionTower& tower) {
  return Sampler(std::make_shared<FlattenNode>(S.node(), tower));
}

}  // namespace cursamp
