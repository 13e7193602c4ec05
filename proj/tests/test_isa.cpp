#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <vector>

#include "rvtrace/isa.hpp"

using namespace rvtrace;

namespace {

std::mt19937_64 rng(0x15a15a);

uint8_t reg() { return uint8_t(rng() % 32); }
uint8_t rm7() { return uint8_t(rng() % 8); }
BitVec imm12() { return BitVec(12, rng()); }

// One random canonical instance of every variant for a given xlen.
std::vector<Instr> random_instrs(unsigned xlen) {
  std::vector<Instr> out;

  ItypeOp iop = ItypeOp(rng() % 9);
  bool shift = iop == ItypeOp::SLLI || iop == ItypeOp::SRLI || iop == ItypeOp::SRAI;
  out.push_back(Itype{shift ? BitVec(12, rng() % xlen) : imm12(), reg(), reg(), iop});
  out.push_back(Rtype{reg(), reg(), reg(), RtypeOp(rng() % 10)});
  out.push_back(Btype{BitVec(13, rng() & ~uint64_t(1)), reg(), reg(), BtypeOp(rng() % 6)});
  out.push_back(Utype{BitVec(20, rng()), reg(), UtypeOp(rng() % 2)});
  out.push_back(Jal{BitVec(21, rng() & ~uint64_t(1)), reg()});
  out.push_back(Jalr{imm12(), reg(), reg()});

  {
    static const std::pair<bool, Width> l32[] = {{false, Width::Byte}, {false, Width::Half},
                                                 {false, Width::Word}, {true, Width::Byte},
                                                 {true, Width::Half}};
    static const std::pair<bool, Width> l64[] = {{false, Width::Byte},   {false, Width::Half},
                                                 {false, Width::Word},   {false, Width::Double},
                                                 {true, Width::Byte},    {true, Width::Half},
                                                 {true, Width::Word}};
    auto pick = xlen == 64 ? l64[rng() % 7] : l32[rng() % 5];
    out.push_back(Load{imm12(), reg(), reg(), pick.first, pick.second});
  }
  {
    static const Width sw[] = {Width::Byte, Width::Half, Width::Word, Width::Double};
    out.push_back(Store{imm12(), reg(), reg(), sw[rng() % (xlen == 64 ? 4 : 3)]});
  }
  out.push_back(Fence{BitVec(4, rng()), BitVec(4, rng())});
  out.push_back(FenceI{});
  out.push_back(Mtype{reg(), reg(), reg(), MtypeOp(rng() % 8)});
  if (xlen == 64) {
    out.push_back(Addiw{imm12(), reg(), reg()});
    out.push_back(Shiftiw{uint8_t(rng() % 32), reg(), reg(), ShiftiwOp(rng() % 3)});
    out.push_back(Rtypew{reg(), reg(), reg(), RtypewOp(rng() % 5)});
    out.push_back(Mtypew{reg(), reg(), reg(), MtypewOp(rng() % 5)});
  }
  {
    AmoOp aop = AmoOp(rng() % 11);
    Width wd = (xlen == 64 && (rng() & 1)) ? Width::Double : Width::Word;
    out.push_back(Atype{reg(), aop == AmoOp::LR ? uint8_t(0) : reg(), reg(), wd,
                        bool(rng() & 1), bool(rng() & 1), aop});
  }
  out.push_back(Csr{uint16_t(rng() % 4096), reg(), reg(), CsrOp(rng() % 3)});
  out.push_back(Csri{uint16_t(rng() % 4096), uint8_t(rng() % 32), reg(), CsrOp(rng() % 3)});
  out.push_back(Fload{imm12(), reg(), reg()});
  out.push_back(Fstore{imm12(), reg(), reg()});
  out.push_back(Ffma{reg(), reg(), reg(), reg(), rm7(), FfmaOp(rng() % 4)});
  {
    FarithOp fop = FarithOp(rng() % 5);
    out.push_back(Farith{reg(), fop == FarithOp::FSQRT_S ? uint8_t(0) : reg(), reg(), rm7(), fop});
  }
  out.push_back(Fsgnj{reg(), reg(), reg(), FsgnjOp(rng() % 3)});
  out.push_back(Fminmax{reg(), reg(), reg(), bool(rng() & 1)});
  out.push_back(Fcmp{reg(), reg(), reg(), FcmpOp(rng() % 3)});
  out.push_back(FcvtToInt{reg(), reg(), rm7(), IntKind(rng() % (xlen == 64 ? 4 : 2))});
  out.push_back(FcvtFromInt{reg(), reg(), rm7(), IntKind(rng() % (xlen == 64 ? 4 : 2))});
  out.push_back(FmvXW{reg(), reg()});
  out.push_back(FmvWX{reg(), reg()});
  out.push_back(Fclass{reg(), reg()});
  out.push_back(Ecall{});
  out.push_back(Ebreak{});
  out.push_back(Mret{});
  out.push_back(Wfi{});
  return out;
}

}  // namespace

TEST_CASE("decode is a left inverse of encode on canonical instructions") {
  for (int i = 0; i < 10000; i++) {
    for (unsigned xlen : {32u, 64u}) {
      for (const Instr& ins : random_instrs(xlen)) {
        uint32_t w = encode(ins, xlen);
        Instr back = decode(w, xlen);
        INFO("xlen=" << xlen << " word=0x" << std::hex << w << " index=" << std::dec
                     << ins.index());
        REQUIRE(back == ins);
      }
    }
  }
}

TEST_CASE("golden encodings") {
  struct Golden {
    uint32_t word;
    unsigned xlen;
    Instr instr;
  };
  // Hand-assembled from the base ISA encoding tables.
  const Golden cases[] = {
      {0x003100B3, 32, Rtype{2, 3, 1, RtypeOp::ADD}},
      {0x403100B3, 32, Rtype{2, 3, 1, RtypeOp::SUB}},
      {0x0000006F, 32, Jal{BitVec(21, 0), 0}},
      {0x001000EF, 32, Jal{BitVec(21, 0x800), 1}},
      {0xFFF00093, 32, Itype{BitVec(12, 0xFFF), 0, 1, ItypeOp::ADDI}},
      {0x123452B7, 32, Utype{BitVec(20, 0x12345), 5, UtypeOp::LUI}},
      {0x0020A423, 32, Store{BitVec(12, 8), 1, 2, Width::Word}},
      {0x00208863, 32, Btype{BitVec(13, 16), 1, 2, BtypeOp::BEQ}},
      {0x004280E7, 32, Jalr{BitVec(12, 4), 5, 1}},
      {0x00311093, 32, Itype{BitVec(12, 3), 2, 1, ItypeOp::SLLI}},
      {0x40515093, 32, Itype{BitVec(12, 5), 2, 1, ItypeOp::SRAI}},
      {0x00000073, 32, Ecall{}},
      {0x00100073, 32, Ebreak{}},
      {0x30200073, 32, Mret{}},
      {0x10500073, 32, Wfi{}},
      {0x300110F3, 32, Csr{0x300, 2, 1, CsrOp::CSRRW}},
      {0x023100B3, 32, Mtype{2, 3, 1, MtypeOp::MUL}},
      {0x023140B3, 32, Mtype{2, 3, 1, MtypeOp::DIV}},
      {0x100522AF, 32, Atype{10, 0, 5, Width::Word, false, false, AmoOp::LR}},
      {0x006522AF, 32, Atype{10, 6, 5, Width::Word, false, false, AmoOp::AMOADD}},
      {0x203100C3, 32, Ffma{2, 3, 4, 1, 0, FfmaOp::FMADD_S}},
      {0x003170D3, 32, Farith{2, 3, 1, 7, FarithOp::FADD_S}},
      {0x00412087, 32, Fload{BitVec(12, 4), 2, 1}},
      {0x0020A227, 32, Fstore{BitVec(12, 4), 1, 2}},
      {0x0FF0000F, 32, Fence{BitVec(4, 0xF), BitVec(4, 0xF)}},
      {0x0000100F, 32, FenceI{}},
      {0xC00110D3, 32, FcvtToInt{2, 1, 1, IntKind::W}},
      {0xE00100D3, 32, FmvXW{2, 1}},
      {0xF00100D3, 32, FmvWX{2, 1}},
      {0x00013083, 64, Load{BitVec(12, 0), 2, 1, false, Width::Double}},
      {0x0011009B, 64, Addiw{BitVec(12, 1), 2, 1}},
      {0x003100BB, 64, Rtypew{2, 3, 1, RtypewOp::ADDW}},
      {0x403150BB, 64, Rtypew{2, 3, 1, RtypewOp::SRAW}},
      {0x186532AF, 64, Atype{10, 6, 5, Width::Double, false, false, AmoOp::SC}},
  };
  for (const Golden& g : cases) {
    INFO("word=0x" << std::hex << g.word);
    REQUIRE(encode(g.instr, g.xlen) == g.word);
    REQUIRE(decode(g.word, g.xlen) == g.instr);
  }
}

TEST_CASE("decode is total and idempotent through encode") {
  for (int i = 0; i < 1000000; i++) {
    uint32_t w = uint32_t(rng());
    for (unsigned xlen : {32u, 64u}) {
      Instr d = decode(w, xlen);  // must not throw
      if (!is_illegal(d)) {
        // Re-encoding the decoded form must decode back to the same thing
        // even when w itself was a non-canonical spelling.
        uint32_t w2 = encode(d, xlen);
        REQUIRE(decode(w2, xlen) == d);
      }
    }
  }
}

TEST_CASE("RV64-only encodings are illegal on RV32") {
  REQUIRE(is_illegal(decode(0x00013083, 32)));  // ld
  REQUIRE(is_illegal(decode(0x00016083, 32)));  // lwu
  REQUIRE(is_illegal(decode(0x00313023, 32)));  // sd
  REQUIRE(is_illegal(decode(0x0011009B, 32)));  // addiw
  REQUIRE(is_illegal(decode(0x003100BB, 32)));  // addw
  REQUIRE(is_illegal(decode(0x186532AF, 32)));  // sc.d
  REQUIRE(is_illegal(decode(0xC02110D3, 32)));  // fcvt.l.s
  // and legal on RV64
  REQUIRE(!is_illegal(decode(0x00013083, 64)));
  REQUIRE(!is_illegal(decode(0xC02110D3, 64)));
}

TEST_CASE("encode rejects malformed instructions") {
  REQUIRE_THROWS_AS(encode(Illegal{}, 32), EncodeError);
  REQUIRE_THROWS_AS(encode(Itype{BitVec(12, 32), 1, 1, ItypeOp::SLLI}, 32), EncodeError);
  REQUIRE_THROWS_AS(encode(Jal{BitVec(21, 3), 1}, 32), EncodeError);
  REQUIRE_THROWS_AS(encode(Btype{BitVec(13, 5), 1, 2, BtypeOp::BEQ}, 32), EncodeError);
  REQUIRE_THROWS_AS(encode(Load{BitVec(12, 0), 1, 2, false, Width::Double}, 32), EncodeError);
  REQUIRE_THROWS_AS(encode(Atype{1, 2, 3, Width::Word, false, false, AmoOp::LR}, 32), EncodeError);
  REQUIRE_THROWS_AS(encode(Addiw{BitVec(12, 0), 1, 2}, 32), EncodeError);
}
