#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cursamp/gf.hpp"
#include "cursamp/rational.hpp"

namespace cursamp {

// -log_q(num/den) for 0 < num <= den.  Detects exact powers of q so that the
// common cases (uniform tables, conditionals collapsing to a point) come out
// as exact integers instead of accumulated floating error.
inline double neg_log_q_mass(u64 q, const BigInt& num, const BigInt& den) {
  require(num > 0 && den >= num, "mass must lie in (0,1]");
  BigInt cur = num;
  u64 k = 0;
  while (cur < den && k < 4096) {
    cur *= q;
    ++k;
  }
  if (cur == den) return double(k);
  return (std::log(den.convert_to<double>()) - std::log(num.convert_to<double>())) /
         std::log(double(q));
}

// Empirical distribution over F_q^dim with exact rational masses, stored as
// integer counts against a running total.  Point indices follow the canonical
// tuple order (first coordinate most significant).
class DistributionTable {
 public:
  DistributionTable(const Field& f, u32 dim, Caps caps = {}) : field_(f), dim_(dim) {
    points_ = pow_sat(f.q(), dim);
    check_states(points_, caps, "distribution table");
    counts_.assign(size_t(points_), 0);
  }

  static DistributionTable uniform(const Field& f, u32 dim, Caps caps = {}) {
    DistributionTable t(f, dim, caps);
    std::fill(t.counts_.begin(), t.counts_.end(), u64(1));
    t.total_ = t.points_;
    return t;
  }

  const Field& field() const { return field_; }
  u32 dim() const { return dim_; }
  u64 points() const { return points_; }
  u64 total() const { return total_; }

  void add_index(u64 idx, u64 w = 1) {
    require_internal(idx < points_, "distribution index out of range");
    counts_[size_t(idx)] += w;
    total_ += w;
  }

  void add(std::span<const u64> pt, u64 w = 1) {
    require_internal(pt.size() == dim_, "distribution point has wrong arity");
    add_index(tuple_to_index(pt, field_.q()), w);
  }

  u64 count(u64 idx) const { return counts_[size_t(idx)]; }

  Rat mass(u64 idx) const {
    require(total_ > 0, "distribution has no samples");
    return Rat(counts_[size_t(idx)], total_);
  }

  u64 support_size() const {
    u64 s = 0;
    for (u64 c : counts_)
      if (c > 0) ++s;
    return s;
  }

  u64 max_count() const { return *std::max_element(counts_.begin(), counts_.end()); }

  // Min-entropy in q-ary digits: -log_q(max_x Pr[X = x]).
  double min_entropy_q() const {
    require(total_ > 0, "distribution has no samples");
    return neg_log_q_mass(field_.q(), BigInt(max_count()), BigInt(total_));
  }

  const std::vector<u64>& counts() const { return counts_; }

 private:
  Field field_;
  u32 dim_;
  u64 points_;
  std::vector<u64> counts_;
  u64 total_ = 0;
};

// Statistical (total variation) distance, exact.
inline Rat stat_distance(const DistributionTable& x, const DistributionTable& y) {
  require(x.field().same(y.field()) && x.dim() == y.dim(),
          "statistical distance needs a common sample space");
  require(x.total() > 0 && y.total() > 0, "distribution has no samples");
  BigInt tx(x.total()), ty(y.total());
  BigInt acc = 0;
  for (u64 i = 0; i < x.points(); ++i) {
    BigInt d = BigInt(x.count(i)) * ty - BigInt(y.count(i)) * tx;
    if (d < 0) d = -d;
    acc += d;
  }
  return Rat(acc, BigInt(2) * tx * ty);
}

// Conditional min-entropy audit for a blockwise source.  Blocks partition the
// coordinates left to right; for every prefix value with positive mass the
// conditional distribution of the next block is tabulated and its min-entropy
// taken, and the per-block figure is the worst prefix.
struct BlockSourceReport {
  std::vector<u32> block_sizes;
  std::vector<double> worst_entropy;   // per block, min over prefixes
  std::vector<double> targets;         // empty when measuring only
  double slack = 0;
  bool has_verdict = false;
  bool verdict = false;

  nlohmann::json to_json() const {
    nlohmann::json j = {{"schema", "cursamp/block-source-report/v1"},
                        {"block_sizes", block_sizes},
                        {"worst_conditional_entropy", worst_entropy}};
    if (has_verdict) {
      j["targets"] = targets;
      j["slack"] = slack;
      j["verdict"] = verdict ? "pass" : "fail";
    }
    return j;
  }
};

inline BlockSourceReport block_source_check(const DistributionTable& z,
                                            const std::vector<u32>& block_sizes,
                                            const std::vector<double>& targets = {},
                                            double slack = 0, Caps caps = {}) {
  require(!block_sizes.empty(), "block structure is empty");
  u64 sum = 0;
  for (u32 b : block_sizes) {
    require(b >= 1, "blocks must be nonempty");
    sum += b;
  }
  require(sum == z.dim(), "block sizes must partition the coordinates");
  require(targets.empty() || targets.size() == block_sizes.size(),
          "one entropy target per block required");
  require(z.total() > 0, "distribution has no samples");

  u64 q = z.field().q();
  BlockSourceReport rep;
  rep.block_sizes = block_sizes;
  rep.targets = targets;
  rep.slack = slack;

  u32 prefix_len = 0;
  for (u32 b : block_sizes) {
    u64 nprefix = pow_sat(q, prefix_len);
    u64 nblock = pow_sat(q, b);
    u64 rest = pow_sat(q, u32(z.dim() - prefix_len - b));
    check_states(nprefix * nblock, caps, "block source prefix table");

    std::vector<u64> joint(size_t(nprefix * nblock), 0);
    std::vector<u64> margin(size_t(nprefix), 0);
    for (u64 idx = 0; idx < z.points(); ++idx) {
      u64 c = z.count(idx);
      if (c == 0) continue;
      u64 pfx = idx / (nblock * rest);
      u64 blk = (idx / rest) % nblock;
      joint[size_t(pfx * nblock + blk)] += c;
      margin[size_t(pfx)] += c;
    }

    double worst = std::numeric_limits<double>::infinity();
    for (u64 p = 0; p < nprefix; ++p) {
      if (margin[size_t(p)] == 0) continue;
      u64 mx = 0;
      for (u64 v = 0; v < nblock; ++v) mx = std::max(mx, joint[size_t(p * nblock + v)]);
      worst = std::min(worst, neg_log_q_mass(q, BigInt(mx), BigInt(margin[size_t(p)])));
    }
    rep.worst_entropy.push_back(worst);
    prefix_len += b;
  }

  if (!targets.empty()) {
    rep.has_verdict = true;
    rep.verdict = true;
    for (size_t i = 0; i < targets.size(); ++i)
      if (rep.worst_entropy[i] < targets[i] - slack) rep.verdict = false;
  }
  return rep;
}

}  // namespace cursamp
