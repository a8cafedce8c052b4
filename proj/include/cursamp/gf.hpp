#pragma once

#include <algorithm>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cursamp/common.hpp"

namespace cursamp {

namespace gf_detail {

inline bool is_prime_u64(u64 p) {
  if (p < 2) return false;
  for (u64 d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

inline u64 inv_mod(u64 a, u64 p) {
  // extended Euclid on (a, p), p prime
  i64 t = 0, nt = 1;
  i64 r = i64(p), nr = i64(a % p);
  while (nr != 0) {
    i64 qq = r / nr;
    std::swap(t -= qq * nt, nt);
    std::swap(r -= qq * nr, nr);
  }
  require_internal(r == 1, "inv_mod of non-unit");
  return u64(t < 0 ? t + i64(p) : t);
}

// Dense univariate polynomials over F_p, low-to-high coefficients.
// Only used while bootstrapping a field (irreducibility, table seeding).
using Poly = std::vector<u64>;

inline void poly_trim(Poly& a) {
  while (!a.empty() && a.back() == 0) a.pop_back();
}

inline Poly poly_mul_mod(const Poly& a, const Poly& b, const Poly& f, u64 p) {
  if (a.empty() || b.empty()) return {};
  Poly prod(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    for (size_t j = 0; j < b.size(); ++j)
      prod[i + j] = (prod[i + j] + u128(a[i]) * b[j]) % p;
  }
  // f is monic of degree deg
  size_t deg = f.size() - 1;
  for (size_t i = prod.size(); i-- > deg;) {
    u64 c = prod[i];
    if (!c) continue;
    prod[i] = 0;
    for (size_t j = 0; j < deg; ++j)
      prod[i - deg + j] = (prod[i - deg + j] + u128(c) * (p - f[j] % p)) % p;
  }
  prod.resize(deg);
  poly_trim(prod);
  return prod;
}

inline Poly poly_pow_mod(Poly base, u64 e, const Poly& f, u64 p) {
  Poly r{1};
  while (e) {
    if (e & 1) r = poly_mul_mod(r, base, f, p);
    base = poly_mul_mod(base, base, f, p);
    e >>= 1;
  }
  return r;
}

inline Poly poly_mod(Poly a, const Poly& b, u64 p) {
  poly_trim(a);
  u64 lead_inv = inv_mod(b.back(), p);
  while (a.size() >= b.size()) {
    u64 c = (u128(a.back()) * lead_inv) % p;
    size_t shift = a.size() - b.size();
    if (c) {
      for (size_t j = 0; j < b.size(); ++j)
        a[shift + j] = (a[shift + j] + u128(c) * (p - b[j] % p)) % p;
    }
    poly_trim(a);
  }
  return a;
}

inline Poly poly_gcd(Poly a, Poly b, u64 p) {
  poly_trim(a);
  poly_trim(b);
  while (!b.empty()) {
    Poly r = poly_mod(a, b, p);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

// Rabin's criterion: f irreducible over F_p of degree k iff x^(p^k) = x mod f
// and gcd(x^(p^(k/r)) - x, f) = 1 for every prime r | k.
inline bool poly_irreducible(const Poly& f, u64 p) {
  size_t k = f.size() - 1;
  if (k == 0) return false;
  if (k == 1) return true;
  Poly x{0, 1};
  auto frob_iter = [&](u64 times) {
    Poly t = x;
    for (u64 i = 0; i < times; ++i) t = poly_pow_mod(t, p, f, p);
    return t;
  };
  Poly xq = frob_iter(k);
  Poly diff = xq;
  // xq - x
  if (diff.size() < 2) diff.resize(2, 0);
  diff[1] = (diff[1] + p - 1) % p;
  poly_trim(diff);
  if (!diff.empty()) return false;
  u64 kk = k;
  for (u64 r = 2; r * r <= kk; ++r) {
    if (kk % r) continue;
    while (kk % r == 0) kk /= r;
    Poly t = frob_iter(k / r);
    if (t.size() < 2) t.resize(2, 0);
    t[1] = (t[1] + p - 1) % p;
    poly_trim(t);
    if (poly_gcd(t, f, p).size() != 1) return false;
  }
  if (kk > 1) {
    Poly t = frob_iter(k / kk);
    if (t.size() < 2) t.resize(2, 0);
    t[1] = (t[1] + p - 1) % p;
    poly_trim(t);
    if (poly_gcd(t, f, p).size() != 1) return false;
  }
  return true;
}

inline std::vector<u64> prime_factors(u64 n) {
  std::vector<u64> fs;
  for (u64 d = 2; d * d <= n; ++d) {
    if (n % d) continue;
    fs.push_back(d);
    while (n % d == 0) n /= d;
  }
  if (n > 1) fs.push_back(n);
  return fs;
}

}  // namespace gf_detail

// A fully materialised finite field F_{p^k}.  Element codes are integers in
// [0, p^k): the base-p digits of a code are the polynomial-basis coefficients,
// least significant digit = constant term.  Code order therefore doubles as
// the canonical element order used everywhere (seeds, generator search).
struct FieldData {
  u64 p = 0;
  u32 k = 0;
  u64 q = 0;
  std::vector<u64> modulus;  // k+1 coefficients, low-to-high, monic
  std::vector<u64> pow_p;    // p^0 .. p^k
  u64 zeta = 0;              // canonical multiplicative generator
  std::vector<u64> q1_primes;
  std::vector<u32> exp_tab;  // 2(q-1) entries, exp_tab[i] = zeta^i
  std::vector<u32> log_tab;  // q entries, log_tab[0] unused
  bool char2 = false;
};

class FieldElement;

class Field {
 public:
  Field() = default;

  static Field make(u64 p, u32 k, const Caps& caps = {});
  static Field make_with_modulus(u64 p, u32 k, std::vector<u64> modulus, const Caps& caps = {});
  // Accepts "q", "p^k" or "p^k:c0,c1,...,ck".
  static Field parse(const std::string& text, const Caps& caps = {});

  bool valid() const { return bool(d_); }
  u64 p() const { return d_->p; }
  u32 k() const { return d_->k; }
  u64 q() const { return d_->q; }
  u64 zeta() const { return d_->zeta; }
  const std::vector<u64>& modulus() const { return d_->modulus; }

  bool same(const Field& o) const {
    return d_ == o.d_ || (d_ && o.d_ && d_->p == o.d_->p && d_->k == o.d_->k &&
                          d_->modulus == o.d_->modulus);
  }

  std::string spec_string() const {
    std::ostringstream os;
    os << d_->p << "^" << d_->k << ":";
    for (u32 i = 0; i <= d_->k; ++i) {
      if (i) os << ",";
      os << d_->modulus[i];
    }
    return os.str();
  }

  u64 add(u64 a, u64 b) const {
    const FieldData& f = *d_;
    if (f.char2) return a ^ b;
    if (f.k == 1) {
      u64 s = a + b;
      return s >= f.p ? s - f.p : s;
    }
    return digit_op(a, b, false);
  }

  u64 sub(u64 a, u64 b) const {
    const FieldData& f = *d_;
    if (f.char2) return a ^ b;
    if (f.k == 1) return a >= b ? a - b : a + f.p - b;
    return digit_op(a, b, true);
  }

  u64 neg(u64 a) const { return sub(0, a); }

  u64 mul(u64 a, u64 b) const {
    if (!a || !b) return 0;
    const FieldData& f = *d_;
    return f.exp_tab[u64(f.log_tab[a]) + f.log_tab[b]];
  }

  u64 inv(u64 a) const {
    require(a != 0, "field inverse of zero");
    const FieldData& f = *d_;
    return f.exp_tab[(f.q - 1) - f.log_tab[a]];
  }

  u64 div(u64 a, u64 b) const { return mul(a, inv(b)); }

  u64 pow(u64 a, u64 e) const {
    if (a == 0) return e == 0 ? 1 : 0;
    const FieldData& f = *d_;
    u64 le = (u128(f.log_tab[a]) * (e % (f.q - 1))) % (f.q - 1);
    return f.exp_tab[le];
  }

  u64 element_order(u64 a) const {
    require(a != 0, "order of zero");
    u64 ord = d_->q - 1;
    for (u64 r : d_->q1_primes)
      while (ord % r == 0 && pow(a, ord / r) == 1) ord /= r;
    return ord;
  }

  std::vector<u64> coeffs(u64 code) const {
    std::vector<u64> c(d_->k);
    for (u32 i = 0; i < d_->k; ++i) {
      c[i] = code % d_->p;
      code /= d_->p;
    }
    return c;
  }

  u64 from_coeffs(std::span<const u64> c) const {
    require(c.size() == d_->k, "coefficient vector has wrong length");
    u64 code = 0;
    for (size_t i = c.size(); i-- > 0;) {
      require(c[i] < d_->p, "coefficient out of range");
      code = code * d_->p + c[i];
    }
    return code;
  }

  FieldElement elem(u64 code) const;

  const FieldData& data() const { return *d_; }

 private:
  explicit Field(std::shared_ptr<const FieldData> d) : d_(std::move(d)) {}

  u64 digit_op(u64 a, u64 b, bool subtract) const {
    const FieldData& f = *d_;
    u64 r = 0, mult = 1;
    while (a || b) {
      u64 da = a % f.p, db = b % f.p;
      u64 s = subtract ? (da + f.p - db) % f.p : (da + db) % f.p;
      r += s * mult;
      mult *= f.p;
      a /= f.p;
      b /= f.p;
    }
    return r;
  }

  std::shared_ptr<const FieldData> d_;
};

class FieldElement {
 public:
  FieldElement() = default;
  FieldElement(Field f, u64 code) : f_(std::move(f)), code_(code) {
    require(code_ < f_.q(), "element code out of range");
  }

  u64 code() const { return code_; }
  const Field& field() const { return f_; }
  std::vector<u64> coeffs() const { return f_.coeffs(code_); }

  FieldElement operator+(const FieldElement& o) const { return bin(o, &Field::add); }
  FieldElement operator-(const FieldElement& o) const { return bin(o, &Field::sub); }
  FieldElement operator*(const FieldElement& o) const { return bin(o, &Field::mul); }
  FieldElement operator/(const FieldElement& o) const {
    check(o);
    return FieldElement(f_, f_.div(code_, o.code_));
  }
  FieldElement operator-() const { return FieldElement(f_, f_.neg(code_)); }
  FieldElement inv() const { return FieldElement(f_, f_.inv(code_)); }
  FieldElement pow(u64 e) const { return FieldElement(f_, f_.pow(code_, e)); }

  bool operator==(const FieldElement& o) const {
    return f_.same(o.f_) && code_ == o.code_;
  }

 private:
  void check(const FieldElement& o) const {
    require(f_.same(o.f_), "mixed-field operands");
  }
  FieldElement bin(const FieldElement& o, u64 (Field::*op)(u64, u64) const) const {
    check(o);
    return FieldElement(f_, (f_.*op)(code_, o.code_));
  }

  Field f_;
  u64 code_ = 0;
};

inline FieldElement Field::elem(u64 code) const { return FieldElement(*this, code); }

namespace gf_detail {

inline u64 raw_mul(const FieldData& f, u64 a, u64 b) {
  if (f.k == 1) return (u128(a) * b) % f.p;
  Poly pa, pb;
  u64 x = a;
  while (x) {
    pa.push_back(x % f.p);
    x /= f.p;
  }
  x = b;
  while (x) {
    pb.push_back(x % f.p);
    x /= f.p;
  }
  Poly pr = poly_mul_mod(pa, pb, f.modulus, f.p);
  u64 code = 0;
  for (size_t i = pr.size(); i-- > 0;) code = code * f.p + pr[i];
  return code;
}

inline u64 raw_pow(const FieldData& f, u64 a, u64 e) {
  u64 r = 1;
  while (e) {
    if (e & 1) r = raw_mul(f, r, a);
    a = raw_mul(f, a, a);
    e >>= 1;
  }
  return r;
}

}  // namespace gf_detail

inline Field Field::make_with_modulus(u64 p, u32 k, std::vector<u64> modulus, const Caps& caps) {
  using namespace gf_detail;
  require(is_prime_u64(p), "field characteristic must be prime: " + std::to_string(p));
  require(k >= 1, "extension degree must be >= 1");

  auto d = std::make_shared<FieldData>();
  d->p = p;
  d->k = k;
  d->q = 1;
  for (u32 i = 0; i < k; ++i) {
    require(d->q <= caps.field_cap / p, "field size exceeds table cap");
    d->q *= p;
  }
  require(d->q >= 2 && d->q <= caps.field_cap, "field size exceeds table cap");
  d->char2 = (p == 2);
  d->pow_p.resize(k + 1);
  d->pow_p[0] = 1;
  for (u32 i = 1; i <= k; ++i) d->pow_p[i] = d->pow_p[i - 1] * p;

  require(modulus.size() == size_t(k) + 1, "modulus must have k+1 coefficients");
  require(modulus[k] == 1, "modulus must be monic");
  for (u64 c : modulus) require(c < p, "modulus coefficient out of range");
  if (k > 1) require(poly_irreducible(modulus, p), "modulus is reducible");
  d->modulus = std::move(modulus);

  d->q1_primes = prime_factors(d->q - 1);
  u64 zeta = 0;
  for (u64 g = 1; g < d->q; ++g) {
    bool full = true;
    for (u64 r : d->q1_primes)
      if (raw_pow(*d, g, (d->q - 1) / r) == 1) {
        full = false;
        break;
      }
    if (full) {
      zeta = g;
      break;
    }
  }
  require_internal(zeta != 0, "no multiplicative generator found");
  d->zeta = zeta;

  d->exp_tab.resize(2 * (d->q - 1));
  d->log_tab.assign(d->q, 0);
  u64 e = 1;
  for (u64 i = 0; i < d->q - 1; ++i) {
    d->exp_tab[i] = u32(e);
    d->exp_tab[i + d->q - 1] = u32(e);
    d->log_tab[e] = u32(i);
    e = raw_mul(*d, e, zeta);
  }
  require_internal(e == 1, "generator order mismatch while building tables");

  return Field(std::move(d));
}

inline Field Field::make(u64 p, u32 k, const Caps& caps) {
  using namespace gf_detail;
  require(is_prime_u64(p), "field characteristic must be prime: " + std::to_string(p));
  require(k >= 1, "extension degree must be >= 1");

  std::vector<u64> modulus;
  if (k == 1) {
    modulus = {0, 1};  // x
  } else {
    // Smallest monic irreducible of degree k: scan the non-leading coefficient
    // vectors in increasing base-p code order.
    u64 count = pow_sat(p, k);
    require(count <= caps.field_cap, "field size exceeds table cap");
    Poly f(k + 1, 0);
    f[k] = 1;
    bool found = false;
    for (u64 n = 0; n < count; ++n) {
      u64 x = n;
      for (u32 i = 0; i < k; ++i) {
        f[i] = x % p;
        x /= p;
      }
      if (poly_irreducible(f, p)) {
        found = true;
        break;
      }
    }
    require_internal(found, "no irreducible modulus found");
    modulus.assign(f.begin(), f.end());
  }
  return make_with_modulus(p, k, std::move(modulus), caps);
}

inline Field Field::parse(const std::string& text, const Caps& caps) {
  require(!text.empty(), "empty field spec");
  auto colon = text.find(':');
  std::string head = text.substr(0, colon == std::string::npos ? text.size() : colon);
  u64 p = 0;
  u32 k = 0;
  auto caret = head.find('^');
  try {
    if (caret == std::string::npos) {
      u64 q = std::stoull(head);
      require(q >= 2, "field size must be >= 2");
      // unique prime-power factorisation
      u64 base = 0;
      for (u64 d = 2; d * d <= q; ++d)
        if (q % d == 0) {
          base = d;
          break;
        }
      if (base == 0) base = q;
      u64 x = q;
      k = 0;
      while (x % base == 0) {
        x /= base;
        ++k;
      }
      require(x == 1, "field size must be a prime power: " + head);
      p = base;
    } else {
      p = std::stoull(head.substr(0, caret));
      u64 kk = std::stoull(head.substr(caret + 1));
      require(kk >= 1 && kk <= 64, "extension degree out of range");
      k = u32(kk);
    }
  } catch (const ValueError&) {
    throw;
  } catch (...) {
    throw ValueError("bad field spec: " + text);
  }
  if (colon == std::string::npos) return make(p, k, caps);

  std::vector<u64> coeffs;
  std::string rest = text.substr(colon + 1);
  std::istringstream is(rest);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    try {
      coeffs.push_back(std::stoull(tok));
    } catch (...) {
      throw ValueError("bad modulus coefficient: " + tok);
    }
  }
  return make_with_modulus(p, k, std::move(coeffs), caps);
}

// F_{q^dim} realised over base F_q (q = p^k itself possibly an extension).
// The extension is materialised as F_{p^(k*dim)}; what makes it a tower is the
// recorded q-linear basis (1, xi, ..., xi^(dim-1)) with xi the class of X.
// flatten/lift translate between one extension element and dim base elements;
// both maps are q-linear, which is what keeps curve degrees intact when a map
// over the extension is re-read over the base field.
class ExtensionTower {
 public:
  static ExtensionTower make(const Field& base, u32 dim, const Caps& caps = {}) {
    require(dim >= 1, "tower dimension must be >= 1");
    ExtensionTower t;
    t.base_ = base;
    t.dim_ = dim;
    if (dim == 1) {
      t.ext_ = base;
      t.embed_.resize(base.q());
      t.lift_tab_.assign(1, std::vector<u32>(base.q()));
      t.flat_tab_.resize(base.q());
      for (u64 a = 0; a < base.q(); ++a) {
        t.embed_[a] = u32(a);
        t.lift_tab_[0][a] = u32(a);
        t.flat_tab_[a] = u32(a);
      }
      return t;
    }

    u64 p = base.p();
    u32 n = base.k() * dim;
    t.ext_ = Field::make(p, n, caps);
    const Field& E = t.ext_;
    u64 qb = base.q(), qe = E.q();

    // Root of the base modulus inside the subfield of size qb.
    u64 w = E.pow(E.zeta(), (qe - 1) / (qb - 1));
    const auto& bm = base.modulus();
    auto eval_bm = [&](u64 at) {
      u64 acc = 0;
      for (size_t i = bm.size(); i-- > 0;) acc = E.add(E.mul(acc, at), bm[i] % p);
      return acc;
    };
    u64 theta = 0;
    bool have = false;
    auto consider = [&](u64 cand) {
      if (eval_bm(cand) == 0 && (!have || cand < theta)) {
        theta = cand;
        have = true;
      }
    };
    consider(0);
    u64 el = 1;
    for (u64 j = 0; j + 1 < qb; ++j) {
      consider(el);
      el = E.mul(el, w);
    }
    require_internal(have, "base modulus has no root in the extension");

    t.embed_.resize(qb);
    for (u64 a = 0; a < qb; ++a) {
      u64 acc = 0, x = a;
      std::vector<u64> digs;
      while (x) {
        digs.push_back(x % base.p());
        x /= base.p();
      }
      for (size_t i = digs.size(); i-- > 0;) acc = E.add(E.mul(acc, theta), digs[i]);
      t.embed_[a] = u32(acc);
    }

    u64 xi = p;  // class of X in the extension
    std::vector<u64> xi_pow(dim);
    xi_pow[0] = 1;
    for (u32 j = 1; j < dim; ++j) xi_pow[j] = E.mul(xi_pow[j - 1], xi);

    t.lift_tab_.assign(dim, std::vector<u32>(qb));
    for (u32 j = 0; j < dim; ++j)
      for (u64 a = 0; a < qb; ++a) t.lift_tab_[j][a] = u32(E.mul(t.embed_[a], xi_pow[j]));

    // Invert the p-linear lift map to get flatten.
    auto digits_of = [&](u64 code) {
      std::vector<u64> d(n);
      for (u32 i = 0; i < n; ++i) {
        d[i] = code % p;
        code /= p;
      }
      return d;
    };
    std::vector<std::vector<u64>> mat(n, std::vector<u64>(2 * n, 0));
    for (u32 j = 0; j < dim; ++j)
      for (u32 i = 0; i < base.k(); ++i) {
        u64 col_code = t.lift_tab_[j][base.data().pow_p[i]];
        auto digs = digits_of(col_code);
        for (u32 r = 0; r < n; ++r) mat[r][j * base.k() + i] = digs[r];
      }
    for (u32 r = 0; r < n; ++r) mat[r][n + r] = 1;
    for (u32 col = 0; col < n; ++col) {
      u32 piv = col;
      while (piv < n && mat[piv][col] == 0) ++piv;
      require_internal(piv < n, "tower basis matrix is singular");
      std::swap(mat[piv], mat[col]);
      u64 inv = gf_detail::inv_mod(mat[col][col], p);
      for (u32 c = 0; c < 2 * n; ++c) mat[col][c] = (u128(mat[col][c]) * inv) % p;
      for (u32 r = 0; r < n; ++r) {
        if (r == col || mat[r][col] == 0) continue;
        u64 f = mat[r][col];
        for (u32 c = 0; c < 2 * n; ++c)
          mat[r][c] = (mat[r][c] + u128(f) * (p - mat[col][c]) % p) % p;
      }
    }

    t.flat_tab_.resize(qe * dim);
    std::vector<u64> v(n), u(n);
    for (u64 e2 = 0; e2 < qe; ++e2) {
      u64 x = e2;
      for (u32 i = 0; i < n; ++i) {
        v[i] = x % p;
        x /= p;
      }
      for (u32 r = 0; r < n; ++r) {
        u64 acc = 0;
        for (u32 c = 0; c < n; ++c) acc += mat[r][n + c] * v[c] % p;
        u[r] = acc % p;
      }
      for (u32 j = 0; j < dim; ++j) {
        u64 code = 0;
        for (u32 i = base.k(); i-- > 0;) code = code * p + u[j * base.k() + i];
        t.flat_tab_[e2 * dim + j] = u32(code);
      }
    }
    return t;
  }

  const Field& base() const { return base_; }
  const Field& ext() const { return ext_; }
  u32 dim() const { return dim_; }

  u64 embed(u64 base_code) const { return embed_[base_code]; }

  u64 lift(std::span<const u64> tuple) const {
    u64 acc = 0;
    for (u32 j = 0; j < dim_; ++j) acc = ext_.add(acc, lift_tab_[j][tuple[j]]);
    return acc;
  }

  void flatten(u64 ext_code, std::span<u64> out) const {
    for (u32 j = 0; j < dim_; ++j) out[j] = flat_tab_[ext_code * dim_ + j];
  }

  std::vector<u64> flatten(u64 ext_code) const {
    std::vector<u64> out(dim_);
    flatten(ext_code, out);
    return out;
  }

 private:
  Field base_, ext_;
  u32 dim_ = 0;
  std::vector<u32> embed_;
  std::vector<std::vector<u32>> lift_tab_;
  std::vector<u32> flat_tab_;
};

}  // namespace cursamp
