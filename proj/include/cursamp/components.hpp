#pragma once

#include <numeric>

#include "cursamp/samplers.hpp"

namespace cursamp {

namespace comp_detail {

// Horner evaluation of f_x(pt) with coefficients x_0..x_{n-1}.
inline u64 poly_at(const Field& f, std::span<const u64> x, u64 pt) {
  u64 acc = 0;
  for (size_t i = x.size(); i-- > 0;) acc = f.add(f.mul(acc, pt), x[i]);
  return acc;
}

// Full value table of f_x over the field.  Worth it once the number of single
// point evaluations against one x passes q.
inline void fill_table(const Field& f, std::span<const u64> x, std::vector<u64>& tab) {
  tab.resize(f.q());
  for (u64 c = 0; c < f.q(); ++c) tab[c] = poly_at(f, x, c);
}

}  // namespace comp_detail

// S(x, y) = (y, f_x(y), f_x(zeta y), ..., f_x(zeta^{m-2} y)) with
// f_x(Y) = sum_i x_i Y^i.  The m-1 multipliers zeta^0..zeta^{m-2} must be
// distinct, so m <= q.
class RSConNode final : public EvalNode {
 public:
  RSConNode(Field f, u32 n, u32 m) : EvalNode(std::move(f), n, 1, m, n) {
    require(n >= 1 && m >= 1, "rs condenser needs n, m >= 1");
    require(u64(m) <= field_.q(),
            "rs condenser needs m <= q for distinct evaluation points");
  }

  std::unique_ptr<PreparedEval> prepare() const override {
    struct P final : PreparedEval {
      const Field f;
      u32 m;
      std::vector<u64> x;
      std::vector<u64> tab;
      u64 pts_done = 0;
      P(Field ff, u32 nn, u32 mm) : f(std::move(ff)), m(mm), x(nn) {}
      void rebind(std::span<const u64> xx) override {
        std::copy(xx.begin(), xx.end(), x.begin());
        tab.clear();
        pts_done = 0;
      }
      void eval(std::span<const u64> y, std::span<u64> out) override {
        out[0] = y[0];
        if (m == 1) return;
        if (tab.empty()) {
          pts_done += m - 1;
          if (pts_done >= f.q()) comp_detail::fill_table(f, x, tab);
        }
        u64 pt = y[0];
        for (u32 j = 1; j < m; ++j) {
          out[j] = tab.empty() ? comp_detail::poly_at(f, x, pt) : tab[pt];
          if (j + 1 < m) pt = f.mul(pt, f.zeta());
        }
      }
    };
    return std::make_unique<P>(field_, n_, m_);
  }

  PolyMap symbolic(const Caps& caps) const override {
    u32 ar = n_ + 1;
    std::vector<SparsePoly> comps;
    comps.push_back(SparsePoly::variable(ar, n_));
    for (u32 j = 0; j + 1 < m_; ++j) {
      std::vector<PolyTerm> ts;
      for (u32 i = 0; i < n_; ++i) {
        std::vector<u32> e(ar, 0);
        e[i] = 1;
        e[n_] = i;
        ts.push_back({std::move(e), field_.pow(field_.zeta(), u64(j) * i)});
      }
      comps.push_back(SparsePoly::from_terms(ar, std::move(ts), field_, caps));
    }
    return PolyMap(field_, ar, std::move(comps));
  }

  json describe() const override {
    return {{"kind", "rs-condenser"}, {"q", field_.q()}, {"n", n_}, {"m", m_}};
  }
};

// Several condenser blocks over one shared randomness: block i applies the
// condenser with output width widths[i] to seed coordinate y_i.  The f_x
// value table, once built, serves every block.
class BlkCnvtNode final : public EvalNode {
 public:
  BlkCnvtNode(Field f, u32 n, std::vector<u32> widths)
      : EvalNode(std::move(f), n, u32(widths.size()),
                 std::accumulate(widths.begin(), widths.end(), u32(0)), n),
        widths_(std::move(widths)) {
    require(n >= 1, "block converter needs n >= 1");
    require(!widths_.empty(), "block converter needs at least one block");
    for (u32 w : widths_) {
      require(w >= 1, "block converter widths must be >= 1");
      require(u64(w) <= field_.q(),
              "block converter needs widths <= q for distinct evaluation points");
    }
  }

  const std::vector<u32>& widths() const { return widths_; }

  std::unique_ptr<PreparedEval> prepare() const override {
    struct P final : PreparedEval {
      const Field f;
      const std::vector<u32>& w;
      std::vector<u64> x;
      std::vector<u64> tab;
      u64 pts_done = 0, pts_per_eval = 0;
      P(Field ff, u32 nn, const std::vector<u32>& ww)
          : f(std::move(ff)), w(ww), x(nn) {
        for (u32 wi : w) pts_per_eval += wi - 1;
      }
      void rebind(std::span<const u64> xx) override {
        std::copy(xx.begin(), xx.end(), x.begin());
        tab.clear();
        pts_done = 0;
      }
      void eval(std::span<const u64> y, std::span<u64> out) override {
        if (tab.empty() && pts_per_eval > 0) {
          pts_done += pts_per_eval;
          if (pts_done >= f.q()) comp_detail::fill_table(f, x, tab);
        }
        size_t off = 0;
        for (size_t i = 0; i < w.size(); ++i) {
          out[off] = y[i];
          u64 pt = y[i];
          for (u32 j = 1; j < w[i]; ++j) {
            out[off + j] = tab.empty() ? comp_detail::poly_at(f, x, pt) : tab[pt];
            if (j + 1 < w[i]) pt = f.mul(pt, f.zeta());
          }
          off += w[i];
        }
      }
    };
    return std::make_unique<P>(field_, n_, widths_);
  }

  PolyMap symbolic(const Caps& caps) const override {
    u32 ar = n_ + d_;
    std::vector<SparsePoly> comps;
    for (u32 b = 0; b < widths_.size(); ++b) {
      comps.push_back(SparsePoly::variable(ar, n_ + b));
      for (u32 j = 0; j + 1 < widths_[b]; ++j) {
        std::vector<PolyTerm> ts;
        for (u32 i = 0; i < n_; ++i) {
          std::vector<u32> e(ar, 0);
          e[i] = 1;
          e[n_ + b] = i;
          ts.push_back({std::move(e), field_.pow(field_.zeta(), u64(j) * i)});
        }
        comps.push_back(SparsePoly::from_terms(ar, std::move(ts), field_, caps));
      }
    }
    return PolyMap(field_, ar, std::move(comps));
  }

  json describe() const override {
    return {{"kind", "block-converter"},
            {"q", field_.q()},
            {"n", n_},
            {"widths", widths_}};
  }

 private:
  std::vector<u32> widths_;
};

// Chains block samplers E_1..E_s: the external seed drives E_s, the first
// d_{i-1} outputs of E_i become E_{i-1}'s seed, and the leftover outputs z_i
// are emitted as (z_1, ..., z_s).  Randomness is (x_1, ..., x_s).
class BlkExtNode final : public EvalNode {
 public:
  explicit BlkExtNode(std::vector<NodePtr> parts)
      : EvalNode(parts.empty() ? Field() : Field(parts[0]->field()), 0, 0, 0, 1),
        parts_(std::move(parts)) {
    require(!parts_.empty(), "block extractor needs at least one part");
    u64 deg = 1;
    u32 n = 0, m = 0;
    for (size_t i = 0; i < parts_.size(); ++i) {
      const auto& e = parts_[i];
      require(e->field().same(field_), "block extractor parts must share a field");
      u32 prev_d = i == 0 ? 0 : parts_[i - 1]->d();
      require(e->m() >= prev_d,
              "block extractor: part output too short to seed the previous part");
      n += e->n();
      m += e->m() - prev_d;
      deg *= e->degree_bound();
    }
    n_ = n;
    m_ = m;
    d_ = parts_.back()->d();
    degree_bound_ = deg;
  }

  const std::vector<NodePtr>& parts() const { return parts_; }

  std::unique_ptr<PreparedEval> prepare() const override {
    struct P final : PreparedEval {
      const BlkExtNode* node;
      std::vector<std::unique_ptr<PreparedEval>> ps;
      std::vector<std::vector<u64>> bufs;
      explicit P(const BlkExtNode* nn) : node(nn) {
        for (const auto& e : nn->parts_) {
          ps.push_back(e->prepare());
          bufs.emplace_back(e->m());
        }
      }
      void rebind(std::span<const u64> x) override {
        size_t off = 0;
        for (size_t i = 0; i < ps.size(); ++i) {
          ps[i]->rebind(x.subspan(off, node->parts_[i]->n()));
          off += node->parts_[i]->n();
        }
      }
      void eval(std::span<const u64> y, std::span<u64> out) override {
        const auto& parts = node->parts_;
        size_t s = parts.size();
        std::span<const u64> seed = y;
        // Output offsets of the z blocks, front to back.
        size_t zoff = node->m();
        for (size_t i = s; i-- > 0;) {
          ps[i]->eval(seed, bufs[i]);
          u32 prev_d = i == 0 ? 0 : parts[i - 1]->d();
          size_t zlen = parts[i]->m() - prev_d;
          zoff -= zlen;
          std::copy(bufs[i].begin() + prev_d, bufs[i].end(), out.begin() + zoff);
          seed = std::span<const u64>(bufs[i]).subspan(0, prev_d);
        }
      }
    };
    return std::make_unique<P>(this);
  }

  PolyMap symbolic(const Caps& caps) const override {
    u32 total = n_ + d_;
    size_t s = parts_.size();
    std::vector<u32> xoff(s, 0);
    for (size_t i = 1; i < s; ++i) xoff[i] = xoff[i - 1] + parts_[i - 1]->n();

    std::vector<std::vector<SparsePoly>> zs(s);
    std::vector<SparsePoly> seed;  // composed seed polys for the current part
    for (u32 j = 0; j < d_; ++j) seed.push_back(SparsePoly::variable(total, n_ + j));
    for (size_t i = s; i-- > 0;) {
      std::vector<SparsePoly> args;
      for (u32 v = 0; v < parts_[i]->n(); ++v)
        args.push_back(SparsePoly::variable(total, xoff[i] + v));
      for (auto& sp : seed) args.push_back(std::move(sp));
      PolyMap cur = parts_[i]->symbolic(caps).subst(args, total, caps);
      u32 prev_d = i == 0 ? 0 : parts_[i - 1]->d();
      seed.assign(cur.components().begin(), cur.components().begin() + prev_d);
      zs[i].assign(cur.components().begin() + prev_d, cur.components().end());
    }

    std::vector<SparsePoly> comps;
    for (auto& z : zs)
      for (auto& c : z) comps.push_back(std::move(c));
    return PolyMap(field_, total, std::move(comps));
  }

  json describe() const override {
    json parts = json::array();
    for (const auto& e : parts_) parts.push_back(e->describe());
    return {{"kind", "block-extractor"}, {"parts", std::move(parts)}};
  }

 private:
  std::vector<NodePtr> parts_;
};

inline Sampler rs_condenser(const Field& f, u32 n, u32 m) {
  return Sampler(std::make_shared<RSConNode>(f, n, m));
}

inline Sampler block_converter(const Field& f, u32 n, std::vector<u32> widths) {
  return Sampler(std::make_shared<BlkCnvtNode>(f, n, std::move(widths)));
}

inline Sampler block_extractor(const std::vector<Sampler>& parts) {
  std::vector<NodePtr> nodes;
  nodes.reserve(parts.size());
  for (const auto& p : parts) nodes.push_back(p.node());
  return Sampler(std::make_shared<BlkExtNode>(std::move(nodes)));
}

}  // namespace cursamp
