#pragma once

#include <string>

#include "cursamp/components.hpp"
#include "cursamp/rational.hpp"

namespace cursamp {

struct Warning {
  std::string kind;
  std::string message;

  json to_json() const { return {{"kind", kind}, {"message", message}}; }
};

inline json warnings_json(const std::vector<Warning>& ws) {
  json arr = json::array();
  for (const auto& w : ws) arr.push_back(w.to_json());
  return arr;
}

// The sampling guarantees hold only for q polynomially large in
// m*log(1/delta); below this heuristic stand-in we attach advisory warnings.
inline void add_q_guidance(std::vector<Warning>& ws, const Field& f, u32 m,
                           const Rat& delta) {
  u64 bits = u64(ceil_log_base(2, Rat(1) / delta));
  u64 threshold = u64(m) * std::max<u64>(bits, 1);
  if (f.q() < threshold) {
    std::ostringstream os;
    os << "q = " << f.q() << " is below the guidance threshold m*ceil(log2(1/delta)) = "
       << threshold << "; the sampling guarantees are asymptotic and uncertified "
       << "at this scale";
    ws.push_back({"q-guidance", os.str()});
  }
}

// ---- outer construction ------------------------------------------------------

struct OuterParams {
  Field field;
  u32 m_requested = 0;
  u32 m = 0;  // power of two actually constructed
  u32 s = 0;
  Rat delta;
  u32 n = 0;
  u32 d = 0;
  std::vector<u32> ext_dims;      // d_1 .. d_s
  std::vector<u32> block_widths;  // 4*d_i
  BigInt degree;                  // n * 2^s
  std::vector<Warning> warnings;

  json to_json() const {
    return {{"m_requested", m_requested},
            {"m", m},
            {"s", s},
            {"delta", rat_string(delta)},
            {"n", n},
            {"d", d},
            {"ext_dims", ext_dims},
            {"block_widths", block_widths},
            {"degree", degree.str()},
            {"warnings", warnings_json(warnings)}};
  }
};

inline OuterParams outer_params(u32 m, const Rat& delta, const Field& f) {
  require(f.valid(), "outer sampler needs a field");
  require(m >= 1 && m <= (1u << 20), "outer sampler needs 1 <= m <= 2^20");
  require(delta > 0 && delta < 1, "confidence error must satisfy 0 < delta < 1");

  OuterParams p;
  p.field = f;
  p.m_requested = m;
  p.s = ceil_log2_u64(m);
  p.m = u32(1) << p.s;
  p.delta = delta;
  p.n = 4 * p.m + u32(ceil_log_base(f.q(), Rat(2) / delta));
  p.d = p.s + 1;
  for (u32 i = 1; i <= p.s; ++i) {
    u32 dim = u32(1) << (p.s - i);
    p.ext_dims.push_back(dim);
    p.block_widths.push_back(4 * dim);
  }
  p.degree = BigInt(p.n) * bigpow(2, p.s);

  for (u32 i = 0; i < p.s; ++i) {
    if (p.block_widths[i] > f.q()) {
      std::ostringstream os;
      os << "converter block " << (i + 1) << " has width 4*d_" << (i + 1) << " = "
         << p.block_widths[i] << " > q = " << f.q()
         << "; distinct evaluation points are unavailable and the build will fail";
      p.warnings.push_back({"converter-width", os.str()});
    }
  }
  add_q_guidance(p.warnings, f, p.m, delta);
  return p;
}

inline Sampler build_outer(u32 m, const Rat& delta, const Field& f,
                           const Caps& caps = {}) {
  OuterParams p = outer_params(m, delta, f);
  for (const auto& w : p.warnings) {
    if (w.kind == "converter-width")
      throw ValueError("outer build: " + w.message);
  }

  Sampler out;
  if (p.s == 0) {
    // Degenerate single-coordinate case: the seed itself is a perfect sample.
    out = seed_prefix_sampler(f, p.n, 1, 1);
  } else {
    std::vector<Sampler> parts;
    for (u32 dim : p.ext_dims) {
      if (dim == 1) {
        parts.push_back(line_sampler(f, 2));
      } else {
        ExtensionTower tower = ExtensionTower::make(f, dim, caps);
        parts.push_back(flatten_sampler(line_sampler(tower.ext(), 2), tower));
      }
    }
    Sampler chain = block_extractor(parts);
    Sampler converter = block_converter(f, p.n, p.block_widths);
    out = reduce_error(chain, converter);
    if (p.m_requested < p.m) out = project_output(out, p.m_requested);
  }

  require_internal(out.n() == p.n && out.d() == p.d && out.m() == p.m_requested,
                   "outer sampler ports disagree with the parameter ledger");
  require_internal(BigInt(out.degree_bound()) <= p.degree,
                   "outer sampler degree exceeds the parameter ledger");
  return out;
}

// ---- inner construction ------------------------------------------------------

struct InnerLevel {
  u32 i = 0;
  u32 dim = 0;        // d_i
  u64 n_i = 0;
  u64 randomness = 0;  // n_i * d_i base coordinates
  u64 rscon_width = 0;  // 2*n_{i-1}, levels i >= 1
  u64 curve_t = 0;      // n_i / 4, levels i >= 1
  BigInt ext_q;         // q^{d_i}
  BigInt degree;        // t_i

  json to_json() const {
    json j = {{"i", i},
              {"dim", dim},
              {"n_i", n_i},
              {"randomness", randomness},
              {"ext_q", ext_q.str()},
              {"degree", degree.str()}};
    if (i >= 1) {
      j["rscon_width"] = rscon_width;
      j["curve_t"] = curve_t;
    }
    return j;
  }
};

struct InnerParams {
  Field field;
  u32 m = 0;
  u32 s = 0;
  Rat delta;
  u64 n = 0;  // n_s * d_s
  std::vector<InnerLevel> levels;
  BigInt degree;  // t_s
  std::vector<Warning> warnings;

  json to_json() const {
    json lv = json::array();
    for (const auto& l : levels) lv.push_back(l.to_json());
    return {{"m", m},
            {"s", s},
            {"delta", rat_string(delta)},
            {"n", n},
            {"d", 1},
            {"levels", std::move(lv)},
            {"degree", degree.str()},
            {"warnings", warnings_json(warnings)}};
  }
};

inline InnerParams inner_params(u32 m, const Rat& delta, const Field& f) {
  require(f.valid(), "inner sampler needs a field");
  require(m >= 1 && m <= 4096, "inner sampler needs 1 <= m <= 4096");
  require(delta > 0 && delta < 1, "confidence error must satisfy 0 < delta < 1");

  InnerParams p;
  p.field = f;
  p.m = m;
  p.s = ceil_log2_u64(m);
  p.delta = delta;

  BigInt t = 1;
  for (u32 i = 0; i <= p.s; ++i) {
    InnerLevel lv;
    lv.i = i;
    lv.dim = u32(1) << (p.s - i);
    lv.n_i = i < p.s ? (u64(1) << (4 * i))
                     : (u64(1) << (4 * p.s)) +
                           20 * u64(ceil_log_base(f.q(), Rat(1) / delta));
    lv.randomness = lv.n_i * lv.dim;
    lv.ext_q = bigpow(f.q(), lv.dim);
    if (i >= 1) {
      lv.rscon_width = 2 * p.levels[i - 1].n_i;
      lv.curve_t = lv.n_i / 4;
      t *= BigInt(lv.curve_t) * lv.curve_t;
      if (BigInt(lv.rscon_width) > lv.ext_q) {
        std::ostringstream os;
        os << "level " << i << ": condenser width 2*n_" << (i - 1) << " = "
           << lv.rscon_width << " > q^d_" << i << " = " << lv.ext_q.str()
           << "; distinct evaluation points are unavailable and the build will fail";
        p.warnings.push_back({"condenser-width", os.str()});
      }
    }
    lv.degree = t;
    p.levels.push_back(std::move(lv));
  }
  p.n = p.levels.back().randomness;
  p.degree = p.levels.back().degree;
  add_q_guidance(p.warnings, f, m, delta);
  return p;
}

inline Sampler build_inner(u32 m, const Rat& delta, const Field& f,
                           const Caps& caps = {}) {
  InnerParams p = inner_params(m, delta, f);
  for (const auto& w : p.warnings) {
    if (w.kind == "condenser-width")
      throw ValueError("inner build: " + w.message);
  }

  u32 d0 = p.levels[0].dim;
  Sampler cur = seed_prefix_sampler(f, u32(p.levels[0].randomness), d0, m);
  for (u32 i = 1; i <= p.s; ++i) {
    const InnerLevel& lv = p.levels[i];
    require(lv.curve_t <= (u64(1) << 30) && lv.rscon_width <= (u64(1) << 30),
            "inner build: level parameters exceed the supported range");
    Sampler rs, curve;
    if (lv.dim == 1) {
      rs = rs_condenser(f, u32(lv.curve_t), u32(lv.rscon_width));
      curve = curve_sampler(f, 3, u32(lv.curve_t));
    } else {
      ExtensionTower tower = ExtensionTower::make(f, lv.dim, caps);
      rs = flatten_sampler(rs_condenser(tower.ext(), u32(lv.curve_t), u32(lv.rscon_width)),
                           tower);
      curve = flatten_sampler(curve_sampler(tower.ext(), 3, u32(lv.curve_t)), tower);
    }
    cur = subsample(reduce_error(cur, rs), curve);
    require_internal(cur.n() == lv.randomness && cur.d() == lv.dim && cur.m() == m,
                     "inner sampler ports disagree with the level ledger");
  }
  require_internal(BigInt(cur.degree_bound()) <= p.degree,
                   "inner sampler degree exceeds the parameter ledger");
  return cur;
}

// ---- combined construction ---------------------------------------------------

struct ConstructionReport {
  Field field;
  u32 m = 0;
  Rat delta;
  OuterParams outer;
  InnerParams inner;
  u64 n = 0;  // outer.n + inner.n
  u32 seed = 1;
  BigInt degree;  // outer.degree * inner.degree
  std::vector<Warning> warnings;

  json to_json() const {
    return {{"schema", "cursamp/construction-report/v1"},
            {"field", field.spec_string()},
            {"m", m},
            {"delta", rat_string(delta)},
            {"outer", outer.to_json()},
            {"inner", inner.to_json()},
            {"n", n},
            {"seed", seed},
            {"degree", degree.str()},
            {"warnings", warnings_json(warnings)}};
  }
};

inline ConstructionReport samp_params(u32 m, const Rat& delta, const Field& f) {
  ConstructionReport r;
  r.field = f;
  r.m = m;
  r.delta = delta;
  r.outer = outer_params(m, delta / 2, f);
  r.inner = inner_params(r.outer.d, delta / 2, f);
  r.n = r.outer.n + r.inner.n;
  r.degree = r.outer.degree * r.inner.degree;
  for (const auto& w : r.outer.warnings) r.warnings.push_back({w.kind, "outer: " + w.message});
  for (const auto& w : r.inner.warnings) r.warnings.push_back({w.kind, "inner: " + w.message});
  return r;
}

inline Sampler build_samp(u32 m, const Rat& delta, const Field& f,
                          const Caps& caps = {}) {
  ConstructionReport r = samp_params(m, delta, f);
  Sampler outer = build_outer(m, delta / 2, f, caps);
  Sampler inner = build_inner(outer.d(), delta / 2, f, caps);
  Sampler samp = subsample(outer, inner);
  require_internal(samp.n() == r.n && samp.d() == 1 && samp.m() == m,
                   "combined sampler ports disagree with the construction report");
  require_internal(BigInt(samp.degree_bound()) <= r.degree,
                   "combined sampler degree exceeds the construction report");
  return samp;
}

}  // namespace cursamp
