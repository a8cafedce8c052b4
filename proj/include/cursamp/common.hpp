#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cursamp {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;

// Bad parameters or malformed config.  CLI maps this to exit code 2.
struct ValueError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Requested work exceeds a configured size cap.  Exit code 3.
struct CapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A structural invariant failed at runtime.  Exit code 4.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValueError(msg);
}

inline void require_internal(bool ok, const std::string& msg) {
  if (!ok) throw InternalError(msg);
}

// Size limits for anything that enumerates or expands.
struct Caps {
  u64 state_cap = u64(1) << 28;  // max enumerated states (q^n, q^d, table cells)
  u64 term_cap = u64(1) << 22;   // max terms in a symbolic polynomial expansion
  u64 field_cap = u64(1) << 20;  // max field size backed by full mul/log tables
};

inline void check_states(u64 states, const Caps& caps, const std::string& what) {
  if (states > caps.state_cap)
    throw CapExceeded(what + ": " + std::to_string(states) + " states exceeds cap " +
                      std::to_string(caps.state_cap));
}

// Saturating q^e used for cap checks before enumerating.
inline u64 pow_sat(u64 base, u64 exp) {
  u64 r = 1;
  for (u64 i = 0; i < exp; ++i) {
    if (base != 0 && r > std::numeric_limits<u64>::max() / base)
      return std::numeric_limits<u64>::max();
    r *= base;
  }
  return r;
}

inline u32 ceil_log2_u64(u64 v) {
  u32 e = 0;
  u64 x = 1;
  while (x < v) {
    x <<= 1;
    ++e;
  }
  return e;
}

// Mixed-radix odometer over [0,base)^len, most significant digit first so the
// sweep order matches lexicographic tuple order.  Returns false after the last
// tuple wraps back to all zeros.
inline bool next_tuple(std::span<u64> t, u64 base) {
  for (size_t i = t.size(); i-- > 0;) {
    if (++t[i] < base) return true;
    t[i] = 0;
  }
  return false;
}

inline void index_to_tuple(u64 idx, u64 base, std::span<u64> out) {
  for (size_t i = out.size(); i-- > 0;) {
    out[i] = idx % base;
    idx /= base;
  }
}

inline u64 tuple_to_index(std::span<const u64> t, u64 base) {
  u64 idx = 0;
  for (u64 v : t) idx = idx * base + v;
  return idx;
}

inline u64 splitmix64(u64& state) {
  u64 z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic stream RNG: draws depend only on (seed, stream), never on how
// work is batched, so identical configs reproduce reports byte for byte.
struct Rng {
  u64 state;

  explicit Rng(u64 seed, u64 stream = 0) {
    state = seed ^ 0x6a09e667f3bcc909ULL;
    state ^= 0x510e527fade682d1ULL * (stream + 1);
    splitmix64(state);
  }

  u64 next() { return splitmix64(state); }

  // Unbiased uniform draw from [0,n) by rejection.
  u64 below(u64 n) {
    require_internal(n > 0, "Rng::below(0)");
    u64 limit = std::numeric_limits<u64>::max() - std::numeric_limits<u64>::max() % n;
    for (;;) {
      u64 v = next();
      if (v < limit) return v % n;
    }
  }

  double unit() { return double(next() >> 11) * 0x1.0p-53; }
};

inline std::string hex_code(u64 v) {
  static const char* digits = "0123456789abcdef";
  if (v == 0) return "0";
  std::string s;
  while (v) {
    s.insert(s.begin(), digits[v & 15]);
    v >>= 4;
  }
  return s;
}

inline u64 parse_hex(const std::string& s) {
  require(!s.empty(), "empty hex literal");
  u64 v = 0;
  for (char c : s) {
    u64 d;
    if (c >= '0' && c <= '9') d = u64(c - '0');
    else if (c >= 'a' && c <= 'f') d = u64(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') d = u64(c - 'A' + 10);
    else throw ValueError(std::string("bad hex digit '") + c + "'");
    require(v <= (std::numeric_limits<u64>::max() >> 4), "hex literal overflows 64 bits");
    v = (v << 4) | d;
  }
  return v;
}

}  // namespace cursamp
