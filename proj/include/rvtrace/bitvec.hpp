#pragma once

#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rvtrace {

// Fixed-width two's-complement bitvector, 1..64 bits.
// All operations truncate modulo 2^width; signed views are computed on demand.
class BitVec {
public:
  BitVec() : width_(1), value_(0) {}

  BitVec(unsigned width, uint64_t value) : width_(width), value_(value & mask(width)) {
    if (width == 0 || width > 64)
      throw std::logic_error("BitVec: width must be in [1,64], got " + std::to_string(width));
  }

  static uint64_t mask(unsigned width) {
    return width >= 64 ? ~uint64_t(0) : ((uint64_t(1) << width) - 1);
  }

  static BitVec from_signed(unsigned width, int64_t v) {
    return BitVec(width, static_cast<uint64_t>(v));
  }

  unsigned width() const { return width_; }
  uint64_t value() const { return value_; }

  int64_t signed_value() const {
    if (width_ == 64) return static_cast<int64_t>(value_);
    uint64_t sign = uint64_t(1) << (width_ - 1);
    return static_cast<int64_t>((value_ ^ sign)) - static_cast<int64_t>(sign);
  }

  bool bit(unsigned i) const {
    check(i < width_, "bit index out of range");
    return (value_ >> i) & 1;
  }

  bool operator==(const BitVec& o) const { return width_ == o.width_ && value_ == o.value_; }
  bool operator!=(const BitVec& o) const { return !(*this == o); }

  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    unsigned nibbles = (width_ + 3) / 4;
    std::string s = "0x";
    for (unsigned i = nibbles; i-- > 0;) s += digits[(value_ >> (4 * i)) & 0xF];
    return s;
  }

  static void check(bool cond, const char* msg) {
    if (!cond) throw std::logic_error(std::string("BitVec: ") + msg);
  }

private:
  unsigned width_;
  uint64_t value_;
};

inline void require_same_width(const BitVec& a, const BitVec& b) {
  BitVec::check(a.width() == b.width(), "width mismatch");
}

inline BitVec bv_add(const BitVec& a, const BitVec& b) {
  require_same_width(a, b);
  return BitVec(a.width(), a.value() + b.value());
}

inline BitVec bv_sub(const BitVec& a, const BitVec& b) {
  require_same_width(a, b);
  return BitVec(a.width(), a.value() - b.value());
}

inline BitVec bv_and(const BitVec& a, const BitVec& b) {
  require_same_width(a, b);
  return BitVec(a.width(), a.value() & b.value());
}

inline BitVec bv_or(const BitVec& a, const BitVec& b) {
  require_same_width(a, b);
  return BitVec(a.width(), a.value() | b.value());
}

inline BitVec bv_xor(const BitVec& a, const BitVec& b) {
  require_same_width(a, b);
  return BitVec(a.width(), a.value() ^ b.value());
}

// Shift amounts are taken modulo the operand width (RV masks to log2(width) bits
// for the power-of-two widths; modulo-width is the same thing there).
inline unsigned effective_shamt(const BitVec& a, uint64_t shamt) {
  unsigned w = a.width();
  if ((w & (w - 1)) == 0) return static_cast<unsigned>(shamt & (w - 1));
  return static_cast<unsigned>(shamt % w);
}

inline BitVec bv_sll(const BitVec& a, uint64_t shamt) {
  unsigned s = effective_shamt(a, shamt);
  return BitVec(a.width(), s ? (a.value() << s) : a.value());
}

inline BitVec bv_srl(const BitVec& a, uint64_t shamt) {
  unsigned s = effective_shamt(a, shamt);
  return BitVec(a.width(), s ? (a.value() >> s) : a.value());
}

inline BitVec bv_sra(const BitVec& a, uint64_t shamt) {
  unsigned s = effective_shamt(a, shamt);
  return BitVec(a.width(), static_cast<uint64_t>(a.signed_value() >> s));
}

inline BitVec bv_sll(const BitVec& a, const BitVec& shamt) { return bv_sll(a, shamt.value()); }
inline BitVec bv_srl(const BitVec& a, const BitVec& shamt) { return bv_srl(a, shamt.value()); }
inline BitVec bv_sra(const BitVec& a, const BitVec& shamt) { return bv_sra(a, shamt.value()); }

inline BitVec bv_slt(const BitVec& a, const BitVec& b) {
  require_same_width(a, b);
  return BitVec(1, a.signed_value() < b.signed_value() ? 1 : 0);
}

inline BitVec bv_ult(const BitVec& a, const BitVec& b) {
  require_same_width(a, b);
  return BitVec(1, a.value() < b.value() ? 1 : 0);
}

inline BitVec sign_extend(unsigned target_width, const BitVec& v) {
  BitVec::check(target_width >= v.width(), "sign_extend: target narrower than source");
  return BitVec(target_width, static_cast<uint64_t>(v.signed_value()));
}

inline BitVec zero_extend(unsigned target_width, const BitVec& v) {
  BitVec::check(target_width >= v.width(), "zero_extend: target narrower than source");
  return BitVec(target_width, v.value());
}

inline BitVec bv_extract(unsigned lo, unsigned len, const BitVec& v) {
  BitVec::check(lo + len <= v.width(), "extract: range out of bounds");
  return BitVec(len, v.value() >> lo);
}

inline BitVec bv_concat(const BitVec& hi, const BitVec& lo) {
  BitVec::check(hi.width() + lo.width() <= 64, "concat: result wider than 64");
  return BitVec(hi.width() + lo.width(), (hi.value() << lo.width()) | lo.value());
}

// MULH-family helpers: full 2*XLEN product, upper half.
inline BitVec bv_mulh_ss(const BitVec& a, const BitVec& b) {
  require_same_width(a, b);
  unsigned w = a.width();
  __int128 p = static_cast<__int128>(a.signed_value()) * static_cast<__int128>(b.signed_value());
  return BitVec(w, static_cast<uint64_t>(p >> w));
}

inline BitVec bv_mulh_su(const BitVec& a, const BitVec& b) {
  require_same_width(a, b);
  unsigned w = a.width();
  __int128 p = static_cast<__int128>(a.signed_value()) * static_cast<__int128>(static_cast<unsigned __int128>(b.value()));
  return BitVec(w, static_cast<uint64_t>(p >> w));
}

inline BitVec bv_mulh_uu(const BitVec& a, const BitVec& b) {
  require_same_width(a, b);
  unsigned w = a.width();
  unsigned __int128 p = static_cast<unsigned __int128>(a.value()) * static_cast<unsigned __int128>(b.value());
  return BitVec(w, static_cast<uint64_t>(p >> w));
}

}  // namespace rvtrace
