#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "cursamp/gf.hpp"
#include "cursamp/rational.hpp"

namespace cursamp {

// A finite family of test sets A subset of F_q^m, each with an exactly known
// density mu(A) = |A| / q^m and a membership predicate.  Estimation sweeps a
// whole family at once, so members_of reports every member containing a point.
class SubsetFamily {
 public:
  const std::string& kind() const { return kind_; }
  const Field& field() const { return field_; }
  u32 m() const { return m_; }
  size_t size() const { return ids_.size(); }
  const std::string& member_id(size_t i) const { return ids_.at(i); }
  const Rat& member_mu(size_t i) const { return mus_.at(i); }

  // All coordinate hyperplanes {x : x_c = v}, m*q members of density 1/q.
  static SubsetFamily hyperplanes(const Field& f, u32 m) {
    require(m >= 1, "dimension must be >= 1");
    SubsetFamily fam(f, m, "hyperplanes");
    for (u32 c = 0; c < m; ++c)
      for (u64 v = 0; v < f.q(); ++v) {
        fam.ids_.push_back("x" + std::to_string(c) + "=" + std::to_string(v));
        fam.mus_.emplace_back(1, f.q());
      }
    return fam;
  }

  // Hamming balls of a fixed radius around seeded centers.
  static SubsetFamily hamming_balls(const Field& f, u32 m, u32 radius, u32 count, u64 seed) {
    require(m >= 1, "dimension must be >= 1");
    require(radius <= m, "radius cannot exceed the dimension");
    require(count >= 1, "need at least one ball");
    SubsetFamily fam(f, m, "hamming-balls");
    fam.radius_ = radius;
    BigInt vol = 0;
    BigInt binom = 1;  // C(m, j) built incrementally
    BigInt qm1 = 1;
    for (u32 j = 0; j <= radius; ++j) {
      vol += binom * qm1;
      binom = binom * (m - j) / (j + 1);
      qm1 *= f.q() - 1;
    }
    Rat mu(vol, bigpow(f.q(), m));
    for (u32 i = 0; i < count; ++i) {
      Rng rng(seed, i);
      std::vector<u64> c(m);
      for (auto& v : c) v = rng.below(f.q());
      fam.centers_.push_back(std::move(c));
      fam.ids_.push_back("ball" + std::to_string(i) + "(r=" + std::to_string(radius) + ")");
      fam.mus_.push_back(mu);
    }
    return fam;
  }

  // Seeded pseudorandom subsets materialized as bitmasks; the density argument
  // is the inclusion probability, the reported mu is the realized count.
  static SubsetFamily random_masks(const Field& f, u32 m, u32 count, const Rat& density,
                                   u64 seed, Caps caps = {}) {
    require(m >= 1, "dimension must be >= 1");
    require(count >= 1, "need at least one subset");
    require(density >= 0 && density <= 1, "density must lie in [0,1]");
    require(boost::multiprecision::denominator(density) <= BigInt(u64(1) << 32),
            "density resolution too fine");
    u64 den = boost::multiprecision::denominator(density).convert_to<u64>();
    u64 num = boost::multiprecision::numerator(density).convert_to<u64>();
    SubsetFamily fam(f, m, "random");
    u64 pts = pow_sat(f.q(), m);
    check_states(pts, caps, "random subset mask");
    for (u32 i = 0; i < count; ++i) {
      Rng rng(seed, i);
      std::vector<bool> mask;
      mask.assign(size_t(pts), false);
      u64 hits = 0;
      for (u64 p = 0; p < pts; ++p) {
        bool in = rng.below(den) < num;
        mask[size_t(p)] = in;
        hits += in;
      }
      fam.masks_.push_back(std::move(mask));
      fam.ids_.push_back("rand" + std::to_string(i));
      fam.mus_.emplace_back(hits, pts);
    }
    return fam;
  }

  // Products of dyadic code intervals on the first min(m,2) axes (remaining
  // coordinates free).  Intervals are clipped to [0,q); members are ordered
  // coarsest first and truncated at max_members.
  static SubsetFamily dyadic_boxes(const Field& f, u32 m, u32 max_members = 4096) {
    require(m >= 1, "dimension must be >= 1");
    require(f.q() <= 4096, "dyadic boxes supported for q <= 4096");
    require(max_members >= 1, "need at least one box");
    SubsetFamily fam(f, m, "dyadic-boxes");
    u64 q = f.q();
    u32 bits = ceil_log2_u64(q);
    fam.dy_bits_ = bits;
    fam.dy_axes_ = std::min<u32>(m, 2);

    // Clipping can make an interval coincide with its parent (the tail beyond
    // a non-power q); such repeats collapse onto the coarsest occurrence so
    // every member is a distinct set.  dy_slot_iv_ maps (level, slot) to the
    // canonical interval.
    struct Iv {
      u32 level;
      u64 lo, hi;
    };
    std::vector<Iv> ivs;
    std::map<std::pair<u64, u64>, u32> span_index;
    fam.dy_level_base_.assign(bits + 2, 0);
    for (u32 l = 0; l <= bits; ++l) {
      fam.dy_level_base_[l] = u32(fam.dy_slot_iv_.size());
      u64 w = u64(1) << (bits - l);
      for (u64 lo = 0; lo < q; lo += w) {
        u64 hi = std::min(lo + w, q);
        auto [it, fresh] = span_index.try_emplace({lo, hi}, u32(ivs.size()));
        if (fresh) ivs.push_back({l, lo, hi});
        fam.dy_slot_iv_.push_back(it->second);
      }
    }
    fam.dy_level_base_[bits + 1] = u32(fam.dy_slot_iv_.size());

    struct Box {
      u32 i0, i1;
      u32 order;
    };
    std::vector<Box> boxes;
    if (fam.dy_axes_ == 1) {
      for (u32 i = 0; i < ivs.size(); ++i) boxes.push_back({i, 0, ivs[i].level});
    } else {
      for (u32 i = 0; i < ivs.size(); ++i)
        for (u32 j = 0; j < ivs.size(); ++j)
          boxes.push_back({i, j, ivs[i].level + ivs[j].level});
    }
    std::stable_sort(boxes.begin(), boxes.end(),
                     [](const Box& a, const Box& b) { return a.order < b.order; });
    if (boxes.size() > max_members) boxes.resize(max_members);

    fam.dy_lo0_.reserve(boxes.size());
    size_t nivs = ivs.size();
    fam.dy_nivs_ = u32(nivs);
    fam.dy_pair_member_.assign(fam.dy_axes_ == 1 ? nivs : nivs * nivs, -1);
    for (u32 bi = 0; bi < boxes.size(); ++bi) {
      const Box& b = boxes[bi];
      const Iv& a0 = ivs[b.i0];
      fam.dy_lo0_.push_back(a0.lo);
      fam.dy_hi0_.push_back(a0.hi);
      std::string id = "[" + std::to_string(a0.lo) + "," + std::to_string(a0.hi) + ")";
      Rat mu(a0.hi - a0.lo, q);
      if (fam.dy_axes_ == 2) {
        const Iv& a1 = ivs[b.i1];
        fam.dy_lo1_.push_back(a1.lo);
        fam.dy_hi1_.push_back(a1.hi);
        id += "x[" + std::to_string(a1.lo) + "," + std::to_string(a1.hi) + ")";
        mu *= Rat(a1.hi - a1.lo, q);
        fam.dy_pair_member_[size_t(b.i0) * nivs + b.i1] = i64(bi);
      } else {
        fam.dy_pair_member_[b.i0] = i64(bi);
      }
      fam.ids_.push_back(std::move(id));
      fam.mus_.push_back(std::move(mu));
    }
    return fam;
  }

  // One explicit member given by a point list (duplicates collapse).
  static SubsetFamily explicit_set(const Field& f, u32 m,
                                   const std::vector<std::vector<u64>>& pts) {
    require(m >= 1, "dimension must be >= 1");
    SubsetFamily fam(f, m, "explicit");
    for (const auto& p : pts) {
      require(p.size() == m, "explicit point has wrong arity");
      for (u64 v : p) require(v < f.q(), "explicit point coordinate out of range");
      fam.points_.insert(tuple_to_index(p, f.q()));
    }
    fam.ids_.push_back("explicit");
    fam.mus_.emplace_back(BigInt(fam.points_.size()), bigpow(f.q(), m));
    return fam;
  }

  bool contains(size_t i, std::span<const u64> pt) const {
    require_internal(pt.size() == m_ && i < size(), "membership query out of range");
    u64 q = field_.q();
    if (kind_ == "hyperplanes") {
      return pt[size_t(i / q)] == i % q;
    }
    if (kind_ == "hamming-balls") {
      const auto& c = centers_[i];
      u32 d = 0;
      for (u32 j = 0; j < m_; ++j) d += pt[j] != c[j];
      return d <= radius_;
    }
    if (kind_ == "random") {
      return masks_[i][size_t(tuple_to_index(pt, q))];
    }
    if (kind_ == "dyadic-boxes") {
      if (pt[0] < dy_lo0_[i] || pt[0] >= dy_hi0_[i]) return false;
      if (dy_axes_ == 2 && (pt[1] < dy_lo1_[i] || pt[1] >= dy_hi1_[i])) return false;
      return true;
    }
    return points_.count(tuple_to_index(pt, q)) > 0;
  }

  // Appends the indices of every member containing pt.
  void members_of(std::span<const u64> pt, std::vector<u32>& out) const {
    u64 q = field_.q();
    if (kind_ == "hyperplanes") {
      for (u32 c = 0; c < m_; ++c) out.push_back(u32(u64(c) * q + pt[c]));
      return;
    }
    if (kind_ == "dyadic-boxes") {
      std::array<u32, 16> ax0{}, ax1{};
      u32 n0 = dy_axis_chain(pt[0], ax0);
      if (dy_axes_ == 1) {
        for (u32 i = 0; i < n0; ++i) {
          i64 mem = dy_pair_member_[ax0[i]];
          if (mem >= 0) out.push_back(u32(mem));
        }
        return;
      }
      u32 n1 = dy_axis_chain(pt[1], ax1);
      for (u32 i = 0; i < n0; ++i)
        for (u32 j = 0; j < n1; ++j) {
          i64 mem = dy_pair_member_[size_t(ax0[i]) * dy_nivs_ + ax1[j]];
          if (mem >= 0) out.push_back(u32(mem));
        }
      return;
    }
    for (u32 i = 0; i < size(); ++i)
      if (contains(i, pt)) out.push_back(i);
  }

  nlohmann::json to_json() const {
    return {{"kind", kind_},
            {"field", field_.spec_string()},
            {"m", m_},
            {"members", size()}};
  }

 private:
  SubsetFamily(const Field& f, u32 m, std::string kind)
      : field_(f), m_(m), kind_(std::move(kind)) {}

  Field field_;
  u32 m_;
  std::string kind_;
  std::vector<std::string> ids_;
  std::vector<Rat> mus_;

  u32 radius_ = 0;
  std::vector<std::vector<u64>> centers_;
  std::vector<std::vector<bool>> masks_;
  std::unordered_set<u64> points_;

  u32 dy_bits_ = 0;
  u32 dy_axes_ = 0;
  u32 dy_nivs_ = 0;
  std::vector<u32> dy_level_base_;
  std::vector<u32> dy_slot_iv_;
  std::vector<u64> dy_lo0_, dy_hi0_, dy_lo1_, dy_hi1_;
  std::vector<i64> dy_pair_member_;

  // Canonical intervals containing a code, one per level, repeats collapsed.
  u32 dy_axis_chain(u64 code, std::array<u32, 16>& out) const {
    u32 n = 0;
    for (u32 l = 0; l <= dy_bits_; ++l) {
      u32 iv = dy_slot_iv_[dy_level_base_[l] + size_t(code >> (dy_bits_ - l))];
      if (n == 0 || out[n - 1] != iv) out[n++] = iv;
    }
    return n;
  }
};

// Parses a family description of the form kind[:key=value,...].
//   hyperplanes
//   dyadic[:max=N]
//   balls:r=R,count=C,seed=S
//   random:count=C,density=EXPR,seed=S
//   explicit:c c ...;c c ...  (points split on ';', coordinates on spaces)
inline SubsetFamily parse_subsets(const Field& f, u32 m, const std::string& spec,
                                  Caps caps = {}) {
  std::string kind = spec, rest;
  if (auto pos = spec.find(':'); pos != std::string::npos) {
    kind = spec.substr(0, pos);
    rest = spec.substr(pos + 1);
  }

  if (kind == "explicit") {
    std::vector<std::vector<u64>> pts;
    size_t start = 0;
    while (start <= rest.size() && !rest.empty()) {
      size_t end = rest.find(';', start);
      std::string chunk = rest.substr(start, end == std::string::npos ? end : end - start);
      std::vector<u64> pt;
      size_t i = 0;
      while (i < chunk.size()) {
        while (i < chunk.size() && chunk[i] == ' ') ++i;
        if (i >= chunk.size()) break;
        size_t j = chunk.find(' ', i);
        std::string tok = chunk.substr(i, j == std::string::npos ? j : j - i);
        try {
          pt.push_back(std::stoull(tok, nullptr, 0));
        } catch (const std::exception&) {
          throw ValueError("bad coordinate in explicit subset: " + tok);
        }
        i = j == std::string::npos ? chunk.size() : j;
      }
      if (!pt.empty()) pts.push_back(std::move(pt));
      if (end == std::string::npos) break;
      start = end + 1;
    }
    return SubsetFamily::explicit_set(f, m, pts);
  }

  std::map<std::string, std::string> kv;
  size_t start = 0;
  while (start < rest.size()) {
    size_t end = rest.find(',', start);
    std::string item = rest.substr(start, end == std::string::npos ? end : end - start);
    auto eq = item.find('=');
    require(eq != std::string::npos, "expected key=value in family options: " + item);
    kv[item.substr(0, eq)] = item.substr(eq + 1);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  auto get_u64 = [&](const std::string& key, u64 fallback, bool required = false) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      require(!required, "family option missing: " + key);
      return fallback;
    }
    try {
      return u64(std::stoull(it->second, nullptr, 0));
    } catch (const std::exception&) {
      throw ValueError("bad family option " + key + "=" + it->second);
    }
  };

  if (kind == "hyperplanes") return SubsetFamily::hyperplanes(f, m);
  if (kind == "dyadic")
    return SubsetFamily::dyadic_boxes(f, m, u32(get_u64("max", 4096)));
  if (kind == "balls")
    return SubsetFamily::hamming_balls(f, m, u32(get_u64("r", 1)),
                                       u32(get_u64("count", 1, true)), get_u64("seed", 0));
  if (kind == "random") {
    auto it = kv.find("density");
    require(it != kv.end(), "family option missing: density");
    return SubsetFamily::random_masks(f, m, u32(get_u64("count", 1, true)),
                                      parse_prob_expr(it->second, f.q()), get_u64("seed", 0),
                                      caps);
  }
  throw ValueError("unknown subset family kind: " + kind);
}

}  // namespace cursamp
