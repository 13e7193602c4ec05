#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rvtrace/bitvec.hpp"

using namespace rvtrace;

namespace {

std::mt19937_64 rng(0xb17b17);

BitVec rand_bv(unsigned width) { return BitVec(width, rng()); }

unsigned rand_width() {
  static const unsigned widths[] = {1, 5, 8, 12, 16, 20, 21, 32, 33, 48, 63, 64};
  return widths[rng() % (sizeof(widths) / sizeof(widths[0]))];
}

// Independent reference: arithmetic through __int128 and explicit modular
// reduction, no BitVec helpers.
uint64_t ref_mask(unsigned w) { return w == 64 ? ~uint64_t(0) : (uint64_t(1) << w) - 1; }

int64_t ref_signed(uint64_t v, unsigned w) {
  uint64_t m = ref_mask(w);
  v &= m;
  if (w < 64 && (v >> (w - 1)) & 1) return int64_t(v - m - 1);
  return int64_t(v);
}

}  // namespace

TEST_CASE("bitvec construction masks to width") {
  for (int i = 0; i < 10000; i++) {
    unsigned w = rand_width();
    uint64_t raw = rng();
    BitVec v(w, raw);
    REQUIRE(v.value() == (raw & ref_mask(w)));
    REQUIRE(v.width() == w);
  }
}

TEST_CASE("add/sub/mul match 128-bit reference") {
  for (int i = 0; i < 20000; i++) {
    unsigned w = rand_width();
    uint64_t a = rng(), b = rng();
    BitVec x(w, a), y(w, b);
    REQUIRE(bv_add(x, y).value() == ((a + b) & ref_mask(w)));
    REQUIRE(bv_sub(x, y).value() == ((a - b) & ref_mask(w)));
  }
}

TEST_CASE("logic ops match reference") {
  for (int i = 0; i < 20000; i++) {
    unsigned w = rand_width();
    uint64_t a = rng(), b = rng();
    BitVec x(w, a), y(w, b);
    REQUIRE(bv_and(x, y).value() == ((a & b) & ref_mask(w)));
    REQUIRE(bv_or(x, y).value() == ((a | b) & ref_mask(w)));
    REQUIRE(bv_xor(x, y).value() == ((a ^ b) & ref_mask(w)));
  }
}

TEST_CASE("shifts mask the shift amount modulo width (power-of-two widths)") {
  for (int i = 0; i < 20000; i++) {
    static const unsigned pw[] = {8, 16, 32, 64};
    unsigned w = pw[rng() % 4];
    uint64_t a = rng();
    uint64_t sh = rng();
    unsigned eff = unsigned(sh % w);
    uint64_t m = ref_mask(w);
    REQUIRE(bv_sll(BitVec(w, a), sh).value() == (((a & m) << eff) & m));
    REQUIRE(bv_srl(BitVec(w, a), sh).value() == ((a & m) >> eff));
    int64_t sa = ref_signed(a, w);
    REQUIRE(bv_sra(BitVec(w, a), sh).value() == (uint64_t(sa >> eff) & m));
  }
}

TEST_CASE("comparisons match reference") {
  for (int i = 0; i < 20000; i++) {
    unsigned w = rand_width();
    uint64_t a = rng(), b = rng();
    BitVec x(w, a), y(w, b);
    REQUIRE(bv_ult(x, y).value() == ((a & ref_mask(w)) < (b & ref_mask(w)) ? 1u : 0u));
    REQUIRE(bv_slt(x, y).value() == (ref_signed(a, w) < ref_signed(b, w) ? 1u : 0u));
  }
}

TEST_CASE("signed_value agrees with two's complement reference") {
  for (int i = 0; i < 20000; i++) {
    unsigned w = rand_width();
    uint64_t a = rng();
    REQUIRE(BitVec(w, a).signed_value() == ref_signed(a, w));
  }
}

TEST_CASE("sign/zero extension") {
  for (int i = 0; i < 20000; i++) {
    unsigned from = rand_width();
    unsigned to = rand_width();
    if (to < from) std::swap(from, to);
    uint64_t a = rng();
    BitVec x(from, a);
    REQUIRE(zero_extend(to, x).value() == (a & ref_mask(from)));
    REQUIRE(ref_signed(sign_extend(to, x).value(), to) == ref_signed(a, from));
  }
}

TEST_CASE("extract and concat roundtrip") {
  for (int i = 0; i < 20000; i++) {
    unsigned w = rand_width();
    uint64_t a = rng();
    BitVec x(w, a);
    unsigned lo = unsigned(rng() % w);
    unsigned len = 1 + unsigned(rng() % (w - lo));
    REQUIRE(bv_extract(lo, len, x).value() == ((a >> lo) & ref_mask(len)));
    if (w <= 32) {
      BitVec hi(w, rng());
      BitVec cat = bv_concat(hi, x);
      REQUIRE(cat.width() == 2 * w);
      REQUIRE(cat.value() == ((hi.value() << w) | x.value()));
    }
  }
}

TEST_CASE("mulh variants match 128-bit reference") {
  for (int i = 0; i < 20000; i++) {
    static const unsigned pw[] = {8, 16, 32, 64};
    unsigned w = pw[rng() % 4];
    uint64_t a = rng() & ref_mask(w), b = rng() & ref_mask(w);
    __int128 ss = (__int128)ref_signed(a, w) * ref_signed(b, w);
    __int128 su = (__int128)ref_signed(a, w) * (__int128)b;
    unsigned __int128 uu = (unsigned __int128)a * b;
    BitVec x(w, a), y(w, b);
    REQUIRE(bv_mulh_ss(x, y).value() == (uint64_t(ss >> w) & ref_mask(w)));
    REQUIRE(bv_mulh_su(x, y).value() == (uint64_t(su >> w) & ref_mask(w)));
    REQUIRE(bv_mulh_uu(x, y).value() == (uint64_t(uu >> w) & ref_mask(w)));
  }
}

TEST_CASE("width violations throw") {
  REQUIRE_THROWS_AS(BitVec(0, 0), std::logic_error);
  REQUIRE_THROWS_AS(BitVec(65, 0), std::logic_error);
  REQUIRE_THROWS_AS(bv_add(BitVec(8, 1), BitVec(16, 1)), std::logic_error);
  REQUIRE_THROWS_AS(bv_extract(4, 8, BitVec(8, 0)), std::logic_error);
}

TEST_CASE("from_signed roundtrips") {
  for (int i = 0; i < 10000; i++) {
    unsigned w = rand_width();
    int64_t v = ref_signed(rng(), w);
    REQUIRE(BitVec::from_signed(w, v).signed_value() == v);
  }
}
