#pragma once

#include <cstdint>
#include <optional>
#include <utility>

namespace rvtrace::softfloat {

// RISC-V fflags bit layout.
enum Fflags : unsigned {
  FLAG_NX = 1u << 0,  // inexact
  FLAG_UF = 1u << 1,  // underflow
  FLAG_OF = 1u << 2,  // overflow
  FLAG_DZ = 1u << 3,  // divide by zero
  FLAG_NV = 1u << 4,  // invalid operation
};

enum class RoundingMode : uint8_t { RNE = 0, RTZ = 1, RDN = 2, RUP = 3, RMM = 4 };

// rm field values 5 and 6 are reserved; 7 is DYN (resolved before calling here).
inline std::optional<RoundingMode> decode_rm(unsigned bits) {
  if (bits <= 4) return static_cast<RoundingMode>(bits);
  return std::nullopt;
}

constexpr uint32_t kCanonicalNan = 0x7FC00000;
constexpr uint32_t kPosInf = 0x7F800000;
constexpr uint32_t kNegInf = 0xFF800000;
constexpr uint32_t kMaxFinite = 0x7F7FFFFF;

struct FResult {
  uint32_t bits;
  unsigned flags;
  bool operator==(const FResult&) const = default;
};

struct IResult {
  uint64_t value;
  unsigned flags;
  bool operator==(const IResult&) const = default;
};

// ---- unpacking -------------------------------------------------------------

inline bool f32_sign(uint32_t f) { return f >> 31; }
inline unsigned f32_exp(uint32_t f) { return (f >> 23) & 0xFF; }
inline uint32_t f32_frac(uint32_t f) { return f & 0x7FFFFF; }

inline bool is_nan(uint32_t f) { return f32_exp(f) == 0xFF && f32_frac(f) != 0; }
inline bool is_snan(uint32_t f) { return is_nan(f) && !(f & 0x400000); }
inline bool is_inf(uint32_t f) { return f32_exp(f) == 0xFF && f32_frac(f) == 0; }
inline bool is_zero(uint32_t f) { return (f & 0x7FFFFFFF) == 0; }
inline bool is_subnormal(uint32_t f) { return f32_exp(f) == 0 && f32_frac(f) != 0; }

inline uint32_t pack(bool sign, unsigned exp, uint32_t frac) {
  return (uint32_t(sign) << 31) | (uint32_t(exp) << 23) | frac;
}

// Exact unpacked finite value: (-1)^sign * sig * 2^exp, sig < 2^24. Zero has sig 0.
struct Unpacked {
  bool sign;
  int exp;
  uint64_t sig;
};

inline Unpacked unpack(uint32_t f) {
  Unpacked u{f32_sign(f), 0, 0};
  unsigned e = f32_exp(f);
  uint32_t m = f32_frac(f);
  if (e == 0) {
    u.exp = -149;
    u.sig = m;
  } else {
    u.exp = static_cast<int>(e) - 127 - 23;
    u.sig = m | 0x800000;
  }
  return u;
}

// Normalize sig into [2^23, 2^24); requires sig != 0.
inline void normalize24(Unpacked& u) {
  while (u.sig < 0x800000) {
    u.sig <<= 1;
    u.exp -= 1;
  }
  while (u.sig >= 0x1000000) {
    // only needed for widened inputs
    u.exp += 1;
    u.sig >>= 1;
  }
}

// ---- rounding core ---------------------------------------------------------

inline bool round_increment(RoundingMode rm, bool sign, unsigned round_bits, bool sticky, bool lsb) {
  switch (rm) {
    case RoundingMode::RNE:
      return round_bits == 3 || (round_bits == 2 && (sticky || lsb));
    case RoundingMode::RTZ:
      return false;
    case RoundingMode::RDN:
      return sign && (round_bits != 0 || sticky);
    case RoundingMode::RUP:
      return !sign && (round_bits != 0 || sticky);
    case RoundingMode::RMM:
      return round_bits >= 2;
  }
  return false;
}

inline FResult overflow_result(bool sign, RoundingMode rm) {
  uint32_t mag;
  switch (rm) {
    case RoundingMode::RNE:
    case RoundingMode::RMM:
      mag = kPosInf;
      break;
    case RoundingMode::RTZ:
      mag = kMaxFinite;
      break;
    case RoundingMode::RDN:
      mag = sign ? kPosInf : kMaxFinite;
      break;
    case RoundingMode::RUP:
      mag = sign ? kMaxFinite : kPosInf;
      break;
    default:
      mag = kPosInf;
  }
  return {mag | (uint32_t(sign) << 31), FLAG_OF | FLAG_NX};
}

// Round the exact value (-1)^sign * sig * 2^exp (plus a positive infinitesimal
// below the lsb when sticky_in) to binary32. sig may be any nonzero uint64.
// Tininess is detected after rounding, per RV.
inline FResult round_pack(bool sign, int64_t exp, uint64_t sig, bool sticky_in, RoundingMode rm) {
  if (sig == 0) {
    // exact zero unless sticky carries a lost nonzero tail
    if (!sticky_in) return {uint32_t(sign) << 31, 0};
    // magnitude strictly between 0 and one lsb: treat as fully sticky
    sig = 1;
    sticky_in = false;
    exp -= 100;  // far below subnormal range; rounds per mode
  }
  // Bring sig to exactly 26 bits: 24 result bits + 2 round bits.
  bool sticky = sticky_in;
  int k = 63 - __builtin_clzll(sig);
  if (k > 25) {
    int extra = k - 25;
    sticky = sticky || (sig & ((uint64_t(1) << extra) - 1)) != 0;
    sig >>= extra;
    exp += extra;
  } else if (k < 25) {
    sig <<= (25 - k);
    exp -= (25 - k);
  }
  // value = sig * 2^exp, sig in [2^25, 2^26); unbiased exponent E = exp + 25.
  int64_t biased = exp + 25 + 127;

  if (biased >= 255) {
    // Already at or above the overflow threshold before rounding, except the
    // boundary case biased==255 ... actually sig>=2^25 means magnitude >= 2^(E),
    // E-biased>=255 → >= 2^128 > max: overflow. biased==254 can still carry up,
    // handled below.
    return overflow_result(sign, rm);
  }

  if (biased <= 0) {
    // Subnormal (or smaller): shift right by 1-biased more before rounding.
    int64_t d = 1 - biased;
    bool tiny = true;
    if (biased == 0) {
      // Tiny-after-rounding check: would unbounded-exponent rounding carry the
      // 26-bit sig up to 2^26 (i.e. reach the minimum normal)?
      unsigned rb = sig & 3;
      bool inc = round_increment(rm, sign, rb, sticky, (sig >> 2) & 1);
      if ((sig >> 2) + (inc ? 1 : 0) == (uint64_t(1) << 24)) tiny = false;
    }
    if (d >= 26) {
      sticky = sticky || sig != 0;
      sig = 0;
    } else {
      sticky = sticky || (sig & ((uint64_t(1) << d) - 1)) != 0;
      sig >>= d;
    }
    unsigned rb = sig & 3;
    uint64_t m = sig >> 2;
    bool inexact = rb != 0 || sticky;
    if (round_increment(rm, sign, rb, sticky, m & 1)) m += 1;
    unsigned flags = 0;
    if (inexact) {
      flags |= FLAG_NX;
      if (tiny) flags |= FLAG_UF;
    }
    // m == 2^23 means we rounded up to the minimum normal.
    if (m >= (uint64_t(1) << 23)) return {pack(sign, 1, 0), flags};
    return {pack(sign, 0, static_cast<uint32_t>(m)), flags};
  }

  unsigned rb = sig & 3;
  uint64_t m = sig >> 2;
  bool inexact = rb != 0 || sticky;
  if (round_increment(rm, sign, rb, sticky, m & 1)) m += 1;
  if (m == (uint64_t(1) << 24)) {
    m >>= 1;
    biased += 1;
  }
  if (biased >= 255) return overflow_result(sign, rm);
  unsigned flags = inexact ? FLAG_NX : 0;
  // implicit bit folds into the exponent field
  return {pack(sign, static_cast<unsigned>(biased), static_cast<uint32_t>(m & 0x7FFFFF)), flags};
}

// ---- exact signed addition of two unpacked magnitudes ----------------------

// (-1)^s1 * sig1 * 2^e1 + (-1)^s2 * sig2 * 2^e2, sigs < 2^61.
inline FResult add_exact(bool s1, uint64_t sig1, int64_t e1, bool s2, uint64_t sig2, int64_t e2,
                         RoundingMode rm) {
  if (sig1 == 0 && sig2 == 0) {
    bool sign = (s1 == s2) ? s1 : (rm == RoundingMode::RDN);
    return {uint32_t(sign) << 31, 0};
  }
  if (sig1 == 0) return round_pack(s2, e2, sig2, false, rm);
  if (sig2 == 0) return round_pack(s1, e1, sig1, false, rm);
  if (e1 < e2) {
    std::swap(e1, e2);
    std::swap(sig1, sig2);
    std::swap(s1, s2);
  }
  // Maximize sig1's headroom, then discard sig2 bits into sticky if needed.
  int head = __builtin_clzll(sig1) - 2;  // keep top two bits clear
  int64_t shift = e1 - e2;
  int up = static_cast<int>(shift < head ? shift : head);
  sig1 <<= up;
  e1 -= up;
  shift = e1 - e2;
  bool sticky = false;
  if (shift > 0) {
    if (shift >= 64) {
      sticky = sig2 != 0;
      sig2 = 0;
    } else {
      sticky = (sig2 & ((uint64_t(1) << shift) - 1)) != 0;
      sig2 >>= shift;
    }
  }
  int64_t e = e1;
  if (s1 == s2) {
    return round_pack(s1, e, sig1 + sig2, sticky, rm);
  }
  // Opposite signs. The sticky tail belongs to the smaller-exponent operand,
  // i.e. it subtracts: borrow one unit and keep sticky.
  if (!sticky && sig1 == sig2) {
    return {uint32_t(rm == RoundingMode::RDN) << 31, 0};
  }
  if (sig1 > sig2 || (sig1 == sig2 && sticky)) {
    uint64_t mag = sig1 - sig2 - (sticky ? 1 : 0);
    return round_pack(s1, e, mag, sticky, rm);
  }
  // sig2 wins; shift was 0 so no sticky here.
  return round_pack(s2, e, sig2 - sig1, sticky, rm);
}

// ---- arithmetic ------------------------------------------------------------

inline FResult propagate_nan(uint32_t a, uint32_t b) {
  unsigned flags = (is_snan(a) || is_snan(b)) ? FLAG_NV : 0;
  return {kCanonicalNan, flags};
}

inline FResult f32_add(uint32_t a, uint32_t b, RoundingMode rm) {
  if (is_nan(a) || is_nan(b)) return propagate_nan(a, b);
  if (is_inf(a) || is_inf(b)) {
    if (is_inf(a) && is_inf(b) && f32_sign(a) != f32_sign(b)) return {kCanonicalNan, FLAG_NV};
    return {is_inf(a) ? a : b, 0};
  }
  Unpacked ua = unpack(a), ub = unpack(b);
  return add_exact(ua.sign, ua.sig, ua.exp, ub.sign, ub.sig, ub.exp, rm);
}

inline FResult f32_sub(uint32_t a, uint32_t b, RoundingMode rm) {
  return f32_add(a, b ^ 0x80000000u, rm);
}

inline FResult f32_mul(uint32_t a, uint32_t b, RoundingMode rm) {
  if (is_nan(a) || is_nan(b)) return propagate_nan(a, b);
  bool sign = f32_sign(a) != f32_sign(b);
  if (is_inf(a) || is_inf(b)) {
    if (is_zero(a) || is_zero(b)) return {kCanonicalNan, FLAG_NV};
    return {pack(sign, 0xFF, 0), 0};
  }
  if (is_zero(a) || is_zero(b)) return {uint32_t(sign) << 31, 0};
  Unpacked ua = unpack(a), ub = unpack(b);
  return round_pack(sign, int64_t(ua.exp) + ub.exp, ua.sig * ub.sig, false, rm);
}

inline FResult f32_div(uint32_t a, uint32_t b, RoundingMode rm) {
  if (is_nan(a) || is_nan(b)) return propagate_nan(a, b);
  bool sign = f32_sign(a) != f32_sign(b);
  if (is_inf(a)) {
    if (is_inf(b)) return {kCanonicalNan, FLAG_NV};
    return {pack(sign, 0xFF, 0), 0};
  }
  if (is_inf(b)) return {uint32_t(sign) << 31, 0};
  if (is_zero(b)) {
    if (is_zero(a)) return {kCanonicalNan, FLAG_NV};
    return {pack(sign, 0xFF, 0), FLAG_DZ};
  }
  if (is_zero(a)) return {uint32_t(sign) << 31, 0};
  Unpacked ua = unpack(a), ub = unpack(b);
  normalize24(ua);
  normalize24(ub);
  // a/b = (sig_a << 26) / sig_b * 2^(ea - eb - 26); quotient has >= 26 bits.
  uint64_t num = ua.sig << 26;
  uint64_t q = num / ub.sig;
  bool sticky = (num % ub.sig) != 0;
  return round_pack(sign, int64_t(ua.exp) - ub.exp - 26, q, sticky, rm);
}

inline uint64_t isqrt64(uint64_t n) {
  if (n == 0) return 0;
  uint64_t x = static_cast<uint64_t>(1) << ((64 - __builtin_clzll(n) + 1) / 2);
  // Newton iteration converges from above.
  while (true) {
    uint64_t y = (x + n / x) / 2;
    if (y >= x) break;
    x = y;
  }
  while (x * x > n) --x;
  while ((x + 1) * (x + 1) <= n) ++x;
  return x;
}

inline FResult f32_sqrt(uint32_t a, RoundingMode rm) {
  if (is_nan(a)) return propagate_nan(a, a);
  if (is_zero(a)) return {a, 0};
  if (f32_sign(a)) return {kCanonicalNan, FLAG_NV};
  if (is_inf(a)) return {a, 0};
  Unpacked u = unpack(a);
  normalize24(u);
  if (u.exp & 1) {
    u.sig <<= 1;
    u.exp -= 1;
  }
  uint64_t m = u.sig << 28;  // <= 2^53
  uint64_t r = isqrt64(m);
  bool sticky = r * r != m;
  return round_pack(false, (u.exp - 28) / 2, r, sticky, rm);
}

// Fused multiply-add: a*b + c with a single rounding.
inline FResult f32_fmadd(uint32_t a, uint32_t b, uint32_t c, RoundingMode rm) {
  bool invalid_mul = (is_inf(a) && is_zero(b)) || (is_zero(a) && is_inf(b));
  if (is_nan(a) || is_nan(b) || is_nan(c)) {
    unsigned flags = (is_snan(a) || is_snan(b) || is_snan(c) || invalid_mul) ? FLAG_NV : 0;
    return {kCanonicalNan, flags};
  }
  if (invalid_mul) return {kCanonicalNan, FLAG_NV};
  bool psign = f32_sign(a) != f32_sign(b);
  if (is_inf(a) || is_inf(b)) {
    if (is_inf(c) && f32_sign(c) != psign) return {kCanonicalNan, FLAG_NV};
    return {pack(psign, 0xFF, 0), 0};
  }
  if (is_inf(c)) return {c, 0};
  Unpacked ua = unpack(a), ub = unpack(b), uc = unpack(c);
  uint64_t prod = ua.sig * ub.sig;  // <= 2^48
  int64_t pexp = int64_t(ua.exp) + ub.exp;
  return add_exact(psign, prod, pexp, uc.sign, uc.sig, uc.exp, rm);
}

inline FResult f32_fmsub(uint32_t a, uint32_t b, uint32_t c, RoundingMode rm) {
  return f32_fmadd(a, b, c ^ 0x80000000u, rm);
}

// The negated variants flip input signs (exact) rather than the rounded
// output, which would pick the wrong neighbor under RDN/RUP.
inline FResult f32_fnmadd(uint32_t a, uint32_t b, uint32_t c, RoundingMode rm) {
  return f32_fmadd(a ^ 0x80000000u, b, c ^ 0x80000000u, rm);  // -(a*b) - c
}

inline FResult f32_fnmsub(uint32_t a, uint32_t b, uint32_t c, RoundingMode rm) {
  return f32_fmadd(a ^ 0x80000000u, b, c, rm);  // -(a*b) + c
}

// ---- comparisons, min/max, classification ----------------------------------

// Signed-magnitude ordering on the bit patterns; callers exclude NaN.
inline bool f32_lt_total(uint32_t a, uint32_t b) {
  bool sa = f32_sign(a), sb = f32_sign(b);
  if (sa != sb) return sa && ((a | b) & 0x7FFFFFFF) != 0;  // -0 == +0
  if (sa) return a > b;
  return a < b;
}

inline IResult f32_feq(uint32_t a, uint32_t b) {
  if (is_nan(a) || is_nan(b)) {
    return {0, (is_snan(a) || is_snan(b)) ? FLAG_NV : 0u};
  }
  bool eq = (a == b) || (is_zero(a) && is_zero(b));
  return {eq ? 1u : 0u, 0};
}

inline IResult f32_flt(uint32_t a, uint32_t b) {
  if (is_nan(a) || is_nan(b)) return {0, FLAG_NV};
  return {f32_lt_total(a, b) ? 1u : 0u, 0};
}

inline IResult f32_fle(uint32_t a, uint32_t b) {
  if (is_nan(a) || is_nan(b)) return {0, FLAG_NV};
  bool le = f32_lt_total(a, b) || a == b || (is_zero(a) && is_zero(b));
  return {le ? 1u : 0u, 0};
}

inline FResult f32_min(uint32_t a, uint32_t b) {
  unsigned flags = (is_snan(a) || is_snan(b)) ? FLAG_NV : 0;
  if (is_nan(a) && is_nan(b)) return {kCanonicalNan, flags};
  if (is_nan(a)) return {b, flags};
  if (is_nan(b)) return {a, flags};
  if (is_zero(a) && is_zero(b)) return {f32_sign(a) ? a : b, flags};  // prefer -0
  return {f32_lt_total(a, b) ? a : b, flags};
}

inline FResult f32_max(uint32_t a, uint32_t b) {
  unsigned flags = (is_snan(a) || is_snan(b)) ? FLAG_NV : 0;
  if (is_nan(a) && is_nan(b)) return {kCanonicalNan, flags};
  if (is_nan(a)) return {b, flags};
  if (is_nan(b)) return {a, flags};
  if (is_zero(a) && is_zero(b)) return {f32_sign(a) ? b : a, flags};  // prefer +0
  return {f32_lt_total(a, b) ? b : a, flags};
}

inline uint32_t f32_classify(uint32_t a) {
  bool sign = f32_sign(a);
  if (is_inf(a)) return sign ? (1u << 0) : (1u << 7);
  if (is_nan(a)) return is_snan(a) ? (1u << 8) : (1u << 9);
  if (is_zero(a)) return sign ? (1u << 3) : (1u << 4);
  if (is_subnormal(a)) return sign ? (1u << 2) : (1u << 5);
  return sign ? (1u << 1) : (1u << 6);
}

inline uint32_t f32_sgnj(uint32_t a, uint32_t b) { return (a & 0x7FFFFFFF) | (b & 0x80000000); }
inline uint32_t f32_sgnjn(uint32_t a, uint32_t b) { return (a & 0x7FFFFFFF) | (~b & 0x80000000); }
inline uint32_t f32_sgnjx(uint32_t a, uint32_t b) { return a ^ (b & 0x80000000); }

// ---- conversions -----------------------------------------------------------

enum class IntKind : uint8_t { W, WU, L, LU };

inline bool int_kind_signed(IntKind k) { return k == IntKind::W || k == IntKind::L; }
inline bool int_kind_64(IntKind k) { return k == IntKind::L || k == IntKind::LU; }

// Float to integer with RV saturation rules. The returned value is the raw
// integer, zero-width-extended into 64 bits for W/WU (exec sign-extends).
inline IResult f32_to_int(uint32_t a, IntKind kind, RoundingMode rm) {
  bool sgn = int_kind_signed(kind);
  bool w64 = int_kind_64(kind);
  auto clamp_max = [&]() -> uint64_t {
    if (sgn) return w64 ? 0x7FFFFFFFFFFFFFFFull : 0x7FFFFFFFull;
    return w64 ? 0xFFFFFFFFFFFFFFFFull : 0xFFFFFFFFull;
  };
  auto clamp_min = [&]() -> uint64_t {
    if (sgn) return w64 ? 0x8000000000000000ull : 0x80000000ull;
    return 0;
  };
  if (is_nan(a)) return {clamp_max(), FLAG_NV};
  if (is_inf(a)) return {f32_sign(a) ? clamp_min() : clamp_max(), FLAG_NV};
  Unpacked u = unpack(a);
  if (u.sig == 0) return {0, 0};

  // Integer magnitude with round/sticky from the fractional part. `huge`
  // marks a magnitude beyond 2^64, which mag alone cannot represent.
  uint64_t mag;
  bool inexact = false;
  bool huge = false;
  if (u.exp >= 0) {
    if (u.exp > 40) {
      // magnitude >= 2^40 * 2^23 > any 64-bit bound
      mag = UINT64_MAX;
      huge = true;
    } else {
      unsigned __int128 wide = static_cast<unsigned __int128>(u.sig) << u.exp;
      huge = wide > UINT64_MAX;
      mag = huge ? UINT64_MAX : static_cast<uint64_t>(wide);
    }
  } else {
    int shift = -u.exp;
    uint64_t ipart = shift >= 64 ? 0 : (u.sig >> shift);
    uint64_t fmask = shift >= 64 ? ~uint64_t(0) : ((uint64_t(1) << shift) - 1);
    uint64_t frac = u.sig & fmask;
    if (shift >= 64 && u.sig != 0) frac = 1, fmask = 1;  // everything fractional
    if (frac != 0) {
      inexact = true;
      // two rounding bits + sticky relative to the integer lsb
      unsigned rb;
      bool sticky;
      if (shift >= 2 && shift <= 63) {
        rb = static_cast<unsigned>((u.sig >> (shift - 2)) & 3);
        sticky = (u.sig & ((uint64_t(1) << (shift - 2)) - 1)) != 0;
      } else if (shift == 1) {
        rb = static_cast<unsigned>((u.sig & 1) << 1);
        sticky = false;
      } else {  // shift >= 64: value < 1 in magnitude? sig < 2^24 << 2^64 yes
        rb = 0;
        sticky = true;
      }
      if (round_increment(rm, u.sign, rb, sticky, ipart & 1)) ipart += 1;
    }
    mag = ipart;
  }

  // Range check on the signed result.
  if (u.sign) {
    if (!sgn) {
      if (mag != 0) return {0, FLAG_NV};
      return {0, inexact ? FLAG_NX : 0u};
    }
    uint64_t lim = w64 ? 0x8000000000000000ull : 0x80000000ull;
    if (mag > lim) return {clamp_min(), FLAG_NV};
    uint64_t v = (~mag + 1);
    if (!w64) v &= 0xFFFFFFFFull;
    return {v, inexact ? FLAG_NX : 0u};
  }
  if (huge || mag > clamp_max()) return {clamp_max(), FLAG_NV};
  return {mag, inexact ? FLAG_NX : 0u};
}

// Integer to float.
inline FResult int_to_f32(uint64_t value, IntKind kind, RoundingMode rm) {
  bool sign = false;
  uint64_t mag = value;
  if (!int_kind_64(kind)) {
    if (int_kind_signed(kind)) {
      int32_t v = static_cast<int32_t>(value & 0xFFFFFFFF);
      sign = v < 0;
      mag = sign ? static_cast<uint64_t>(-(int64_t)v) : static_cast<uint64_t>(v);
    } else {
      mag = value & 0xFFFFFFFF;
    }
  } else if (int_kind_signed(kind)) {
    int64_t v = static_cast<int64_t>(value);
    sign = v < 0;
    mag = sign ? (~value + 1) : value;
  }
  if (mag == 0) return {0, 0};
  return round_pack(sign, 0, mag, false, rm);
}

}  // namespace rvtrace::softfloat
