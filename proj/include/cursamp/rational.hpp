#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

#include "cursamp/common.hpp"

namespace cursamp {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

inline double to_double(const Rat& r) { return r.convert_to<double>(); }

inline std::string rat_string(const Rat& r) {
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

inline BigInt bigpow(BigInt base, u64 exp) {
  BigInt r = 1;
  while (exp) {
    if (exp & 1) r *= base;
    base *= base;
    exp >>= 1;
  }
  return r;
}

inline Rat rat_pow(const Rat& base, i64 exp) {
  BigInt n = boost::multiprecision::numerator(base);
  BigInt d = boost::multiprecision::denominator(base);
  if (exp >= 0) return Rat(bigpow(n, u64(exp)), bigpow(d, u64(exp)));
  require(n != 0, "zero base with negative exponent");
  return Rat(bigpow(d, u64(-exp)), bigpow(n, u64(-exp)));
}

// Smallest integer e >= 0 with q^e >= x.  Exact; no floating point.
inline u64 ceil_log_base(u64 q, const Rat& x) {
  require(q >= 2, "log base must be >= 2");
  u64 e = 0;
  Rat p = 1;
  while (p < x) {
    p *= q;
    ++e;
    require(e <= 4096, "ceil_log_base: exponent out of range");
  }
  return e;
}

// Parses an exact probability expression.  Accepted forms:
//   "3/4"      plain rational
//   "0.125"    decimal, kept exact
//   "2^-8"     integer base power
//   "q^-2"     power of the field size (q must be supplied)
//   "17"       integer
inline Rat parse_prob_expr(const std::string& s, u64 q = 0) {
  require(!s.empty(), "empty probability expression");
  auto caret = s.find('^');
  if (caret != std::string::npos) {
    std::string base_s = s.substr(0, caret);
    std::string exp_s = s.substr(caret + 1);
    require(!base_s.empty() && !exp_s.empty(), "malformed power expression: " + s);
    BigInt base;
    if (base_s == "q") {
      require(q != 0, "expression '" + s + "' needs a field size for q");
      base = q;
    } else {
      try {
        base = BigInt(base_s);
      } catch (...) {
        throw ValueError("bad base in expression: " + s);
      }
    }
    bool neg = exp_s[0] == '-';
    if (neg) exp_s = exp_s.substr(1);
    i64 exp = 0;
    try {
      exp = std::stoll(exp_s);
    } catch (...) {
      throw ValueError("bad exponent in expression: " + s);
    }
    require(exp >= 0 && exp <= 65536, "exponent out of range in expression: " + s);
    require(base > 0, "power base must be positive: " + s);
    return rat_pow(Rat(base), neg ? -exp : exp);
  }
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    try {
      BigInt n(s.substr(0, slash));
      BigInt d(s.substr(slash + 1));
      require(d != 0, "zero denominator: " + s);
      return Rat(n, d);
    } catch (const ValueError&) {
      throw;
    } catch (...) {
      throw ValueError("bad rational: " + s);
    }
  }
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string whole = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    require(!frac.empty(), "bad decimal: " + s);
    try {
      BigInt w = whole.empty() ? BigInt(0) : BigInt(whole);
      BigInt f(frac);
      BigInt den = bigpow(10, frac.size());
      bool neg = !whole.empty() && whole[0] == '-';
      Rat r = Rat(boost::multiprecision::abs(w)) + Rat(f, den);
      return neg ? -r : r;
    } catch (const ValueError&) {
      throw;
    } catch (...) {
      throw ValueError("bad decimal: " + s);
    }
  }
  try {
    return Rat(BigInt(s));
  } catch (...) {
    throw ValueError("bad probability expression: " + s);
  }
}

}  // namespace cursamp
