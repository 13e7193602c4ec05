#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>

#include "rvtrace/bitvec.hpp"
#include "rvtrace/effects.hpp"
#include "rvtrace/softfloat.hpp"

namespace rvtrace {

using softfloat::IntKind;

// ---------------------------------------------------------------------------
// Operation selectors
// ---------------------------------------------------------------------------

enum class ItypeOp : uint8_t { ADDI, SLTI, SLTIU, XORI, ORI, ANDI, SLLI, SRLI, SRAI };
enum class RtypeOp : uint8_t { ADD, SUB, SLL, SLT, SLTU, XOR, SRL, SRA, OR, AND };
enum class BtypeOp : uint8_t { BEQ, BNE, BLT, BGE, BLTU, BGEU };
enum class UtypeOp : uint8_t { LUI, AUIPC };
enum class RtypewOp : uint8_t { ADDW, SUBW, SLLW, SRLW, SRAW };
enum class ShiftiwOp : uint8_t { SLLIW, SRLIW, SRAIW };
enum class MtypeOp : uint8_t { MUL, MULH, MULHSU, MULHU, DIV, DIVU, REM, REMU };
enum class MtypewOp : uint8_t { MULW, DIVW, DIVUW, REMW, REMUW };
enum class AmoOp : uint8_t {
  LR, SC, AMOSWAP, AMOADD, AMOXOR, AMOAND, AMOOR, AMOMIN, AMOMAX, AMOMINU, AMOMAXU
};
enum class CsrOp : uint8_t { CSRRW, CSRRS, CSRRC };
enum class FfmaOp : uint8_t { FMADD_S, FMSUB_S, FNMSUB_S, FNMADD_S };
enum class FarithOp : uint8_t { FADD_S, FSUB_S, FMUL_S, FDIV_S, FSQRT_S };
enum class FsgnjOp : uint8_t { FSGNJ, FSGNJN, FSGNJX };
enum class FcmpOp : uint8_t { FEQ, FLT, FLE };

// ---------------------------------------------------------------------------
// Instruction variant
// ---------------------------------------------------------------------------

struct Itype { BitVec imm; uint8_t rs1, rd; ItypeOp op; bool operator==(const Itype&) const = default; };
struct Rtype { uint8_t rs1, rs2, rd; RtypeOp op; bool operator==(const Rtype&) const = default; };
struct Btype { BitVec imm; uint8_t rs1, rs2; BtypeOp op; bool operator==(const Btype&) const = default; };
struct Utype { BitVec imm; uint8_t rd; UtypeOp op; bool operator==(const Utype&) const = default; };
struct Jal { BitVec imm; uint8_t rd; bool operator==(const Jal&) const = default; };
struct Jalr { BitVec imm; uint8_t rs1, rd; bool operator==(const Jalr&) const = default; };
struct Load {
  BitVec imm; uint8_t rs1, rd; bool is_unsigned; Width width;
  bool operator==(const Load&) const = default;
};
struct Store {
  BitVec imm; uint8_t rs1, rs2; Width width;
  bool operator==(const Store&) const = default;
};
struct Fence { BitVec pred, succ; bool operator==(const Fence&) const = default; };
struct FenceI { bool operator==(const FenceI&) const = default; };
struct Addiw { BitVec imm; uint8_t rs1, rd; bool operator==(const Addiw&) const = default; };
struct Shiftiw { uint8_t shamt, rs1, rd; ShiftiwOp op; bool operator==(const Shiftiw&) const = default; };
struct Rtypew { uint8_t rs1, rs2, rd; RtypewOp op; bool operator==(const Rtypew&) const = default; };
struct Mtype { uint8_t rs1, rs2, rd; MtypeOp op; bool operator==(const Mtype&) const = default; };
struct Mtypew { uint8_t rs1, rs2, rd; MtypewOp op; bool operator==(const Mtypew&) const = default; };
struct Atype {
  uint8_t rs1, rs2, rd; Width width; bool aq, rl; AmoOp op;
  bool operator==(const Atype&) const = default;
};
struct Csr { uint16_t csr; uint8_t rs1, rd; CsrOp op; bool operator==(const Csr&) const = default; };
struct Csri { uint16_t csr; uint8_t uimm, rd; CsrOp op; bool operator==(const Csri&) const = default; };
struct Fload { BitVec imm; uint8_t rs1, fd; bool operator==(const Fload&) const = default; };
struct Fstore { BitVec imm; uint8_t rs1, fs2; bool operator==(const Fstore&) const = default; };
struct Ffma {
  uint8_t fs1, fs2, fs3, fd, rm; FfmaOp op;
  bool operator==(const Ffma&) const = default;
};
struct Farith {
  uint8_t fs1, fs2, fd, rm; FarithOp op;  // FSQRT_S has fs2 == 0
  bool operator==(const Farith&) const = default;
};
struct Fsgnj { uint8_t fs1, fs2, fd; FsgnjOp op; bool operator==(const Fsgnj&) const = default; };
struct Fminmax { uint8_t fs1, fs2, fd; bool is_max; bool operator==(const Fminmax&) const = default; };
struct Fcmp { uint8_t fs1, fs2, rd; FcmpOp op; bool operator==(const Fcmp&) const = default; };
struct FcvtToInt { uint8_t fs1, rd, rm; IntKind kind; bool operator==(const FcvtToInt&) const = default; };
struct FcvtFromInt { uint8_t rs1, fd, rm; IntKind kind; bool operator==(const FcvtFromInt&) const = default; };
struct FmvXW { uint8_t fs1, rd; bool operator==(const FmvXW&) const = default; };
struct FmvWX { uint8_t rs1, fd; bool operator==(const FmvWX&) const = default; };
struct Fclass { uint8_t fs1, rd; bool operator==(const Fclass&) const = default; };
struct Ecall { bool operator==(const Ecall&) const = default; };
struct Ebreak { bool operator==(const Ebreak&) const = default; };
struct Mret { bool operator==(const Mret&) const = default; };
struct Wfi { bool operator==(const Wfi&) const = default; };
struct Illegal { uint32_t raw = 0; bool operator==(const Illegal&) const { return true; } };

using Instr = std::variant<Itype, Rtype, Btype, Utype, Jal, Jalr, Load, Store, Fence, FenceI,
                           Addiw, Shiftiw, Rtypew, Mtype, Mtypew, Atype, Csr, Csri, Fload, Fstore,
                           Ffma, Farith, Fsgnj, Fminmax, Fcmp, FcvtToInt, FcvtFromInt, FmvXW, FmvWX,
                           Fclass, Ecall, Ebreak, Mret, Wfi, Illegal>;

inline bool is_illegal(const Instr& i) { return std::holds_alternative<Illegal>(i); }

// ---------------------------------------------------------------------------
// Decode
// ---------------------------------------------------------------------------

namespace detail {
inline uint32_t bits(uint32_t w, unsigned hi, unsigned lo) {
  return (w >> lo) & ((hi - lo == 31) ? ~0u : ((1u << (hi - lo + 1)) - 1));
}
}  // namespace detail

// Total and deterministic: every 32-bit word maps to an Instr, unrecognized
// encodings to Illegal. xlen gates RV64-only encodings.
inline Instr decode(uint32_t w, unsigned xlen) {
  using detail::bits;
  const uint32_t opcode = bits(w, 6, 0);
  const uint8_t rd = static_cast<uint8_t>(bits(w, 11, 7));
  const uint8_t rs1 = static_cast<uint8_t>(bits(w, 19, 15));
  const uint8_t rs2 = static_cast<uint8_t>(bits(w, 24, 20));
  const uint32_t f3 = bits(w, 14, 12);
  const uint32_t f7 = bits(w, 31, 25);
  const BitVec imm12(12, bits(w, 31, 20));
  const Illegal ill{w};

  switch (opcode) {
    case 0x37: return Utype{BitVec(20, bits(w, 31, 12)), rd, UtypeOp::LUI};
    case 0x17: return Utype{BitVec(20, bits(w, 31, 12)), rd, UtypeOp::AUIPC};
    case 0x6F: {
      uint32_t imm = (bits(w, 31, 31) << 20) | (bits(w, 19, 12) << 12) | (bits(w, 20, 20) << 11) |
                     (bits(w, 30, 21) << 1);
      return Jal{BitVec(21, imm), rd};
    }
    case 0x67:
      if (f3 != 0) return ill;
      return Jalr{imm12, rs1, rd};
    case 0x63: {
      uint32_t imm = (bits(w, 31, 31) << 12) | (bits(w, 7, 7) << 11) | (bits(w, 30, 25) << 5) |
                     (bits(w, 11, 8) << 1);
      static constexpr BtypeOp ops[8] = {BtypeOp::BEQ, BtypeOp::BNE, BtypeOp::BEQ, BtypeOp::BEQ,
                                         BtypeOp::BLT, BtypeOp::BGE, BtypeOp::BLTU, BtypeOp::BGEU};
      if (f3 == 2 || f3 == 3) return ill;
      return Btype{BitVec(13, imm), rs1, rs2, ops[f3]};
    }
    case 0x03:
      switch (f3) {
        case 0: return Load{imm12, rs1, rd, false, Width::Byte};
        case 1: return Load{imm12, rs1, rd, false, Width::Half};
        case 2: return Load{imm12, rs1, rd, false, Width::Word};
        case 3: return xlen == 64 ? Instr{Load{imm12, rs1, rd, false, Width::Double}} : Instr{ill};
        case 4: return Load{imm12, rs1, rd, true, Width::Byte};
        case 5: return Load{imm12, rs1, rd, true, Width::Half};
        case 6: return xlen == 64 ? Instr{Load{imm12, rs1, rd, true, Width::Word}} : Instr{ill};
        default: return ill;
      }
    case 0x23: {
      BitVec imm(12, (bits(w, 31, 25) << 5) | bits(w, 11, 7));
      switch (f3) {
        case 0: return Store{imm, rs1, rs2, Width::Byte};
        case 1: return Store{imm, rs1, rs2, Width::Half};
        case 2: return Store{imm, rs1, rs2, Width::Word};
        case 3: return xlen == 64 ? Instr{Store{imm, rs1, rs2, Width::Double}} : Instr{ill};
        default: return ill;
      }
    }
    case 0x13: {
      switch (f3) {
        case 0: return Itype{imm12, rs1, rd, ItypeOp::ADDI};
        case 2: return Itype{imm12, rs1, rd, ItypeOp::SLTI};
        case 3: return Itype{imm12, rs1, rd, ItypeOp::SLTIU};
        case 4: return Itype{imm12, rs1, rd, ItypeOp::XORI};
        case 6: return Itype{imm12, rs1, rd, ItypeOp::ORI};
        case 7: return Itype{imm12, rs1, rd, ItypeOp::ANDI};
        case 1: {
          uint32_t top = xlen == 64 ? bits(w, 31, 26) : f7;
          unsigned shamt = xlen == 64 ? bits(w, 25, 20) : rs2;
          if (top != 0) return ill;
          return Itype{BitVec(12, shamt), rs1, rd, ItypeOp::SLLI};
        }
        case 5: {
          uint32_t top = xlen == 64 ? bits(w, 31, 26) : f7;
          unsigned shamt = xlen == 64 ? bits(w, 25, 20) : rs2;
          uint32_t sra_top = xlen == 64 ? 0x10 : 0x20;
          if (top == 0) return Itype{BitVec(12, shamt), rs1, rd, ItypeOp::SRLI};
          if (top == sra_top) return Itype{BitVec(12, shamt), rs1, rd, ItypeOp::SRAI};
          return ill;
        }
      }
      return ill;
    }
    case 0x33: {
      if (f7 == 1) {
        static constexpr MtypeOp mops[8] = {MtypeOp::MUL, MtypeOp::MULH, MtypeOp::MULHSU,
                                            MtypeOp::MULHU, MtypeOp::DIV, MtypeOp::DIVU,
                                            MtypeOp::REM, MtypeOp::REMU};
        return Mtype{rs1, rs2, rd, mops[f3]};
      }
      if (f7 == 0) {
        static constexpr RtypeOp rops[8] = {RtypeOp::ADD, RtypeOp::SLL, RtypeOp::SLT, RtypeOp::SLTU,
                                            RtypeOp::XOR, RtypeOp::SRL, RtypeOp::OR, RtypeOp::AND};
        return Rtype{rs1, rs2, rd, rops[f3]};
      }
      if (f7 == 0x20) {
        if (f3 == 0) return Rtype{rs1, rs2, rd, RtypeOp::SUB};
        if (f3 == 5) return Rtype{rs1, rs2, rd, RtypeOp::SRA};
        return ill;
      }
      return ill;
    }
    case 0x1B: {
      if (xlen != 64) return ill;
      if (f3 == 0) return Addiw{imm12, rs1, rd};
      if (f3 == 1 && f7 == 0) return Shiftiw{rs2, rs1, rd, ShiftiwOp::SLLIW};
      if (f3 == 5 && f7 == 0) return Shiftiw{rs2, rs1, rd, ShiftiwOp::SRLIW};
      if (f3 == 5 && f7 == 0x20) return Shiftiw{rs2, rs1, rd, ShiftiwOp::SRAIW};
      return ill;
    }
    case 0x3B: {
      if (xlen != 64) return ill;
      if (f7 == 1) {
        switch (f3) {
          case 0: return Mtypew{rs1, rs2, rd, MtypewOp::MULW};
          case 4: return Mtypew{rs1, rs2, rd, MtypewOp::DIVW};
          case 5: return Mtypew{rs1, rs2, rd, MtypewOp::DIVUW};
          case 6: return Mtypew{rs1, rs2, rd, MtypewOp::REMW};
          case 7: return Mtypew{rs1, rs2, rd, MtypewOp::REMUW};
          default: return ill;
        }
      }
      if (f7 == 0) {
        if (f3 == 0) return Rtypew{rs1, rs2, rd, RtypewOp::ADDW};
        if (f3 == 1) return Rtypew{rs1, rs2, rd, RtypewOp::SLLW};
        if (f3 == 5) return Rtypew{rs1, rs2, rd, RtypewOp::SRLW};
        return ill;
      }
      if (f7 == 0x20) {
        if (f3 == 0) return Rtypew{rs1, rs2, rd, RtypewOp::SUBW};
        if (f3 == 5) return Rtypew{rs1, rs2, rd, RtypewOp::SRAW};
        return ill;
      }
      return ill;
    }
    case 0x0F:
      if (f3 == 0) return Fence{BitVec(4, bits(w, 27, 24)), BitVec(4, bits(w, 23, 20))};
      if (f3 == 1 && rd == 0 && rs1 == 0 && bits(w, 31, 20) == 0) return FenceI{};
      return ill;
    case 0x73: {
      if (f3 == 0) {
        if (w == 0x00000073) return Ecall{};
        if (w == 0x00100073) return Ebreak{};
        if (w == 0x30200073) return Mret{};
        if (w == 0x10500073) return Wfi{};
        return ill;
      }
      uint16_t csr = static_cast<uint16_t>(bits(w, 31, 20));
      switch (f3) {
        case 1: return Csr{csr, rs1, rd, CsrOp::CSRRW};
        case 2: return Csr{csr, rs1, rd, CsrOp::CSRRS};
        case 3: return Csr{csr, rs1, rd, CsrOp::CSRRC};
        case 5: return Csri{csr, rs1, rd, CsrOp::CSRRW};
        case 6: return Csri{csr, rs1, rd, CsrOp::CSRRS};
        case 7: return Csri{csr, rs1, rd, CsrOp::CSRRC};
      }
      return ill;
    }
    case 0x2F: {
      Width wd;
      if (f3 == 2) wd = Width::Word;
      else if (f3 == 3 && xlen == 64) wd = Width::Double;
      else return ill;
      bool aq = bits(w, 26, 26), rl = bits(w, 25, 25);
      switch (bits(w, 31, 27)) {
        case 0x02: return rs2 == 0 ? Instr{Atype{rs1, 0, rd, wd, aq, rl, AmoOp::LR}} : Instr{ill};
        case 0x03: return Atype{rs1, rs2, rd, wd, aq, rl, AmoOp::SC};
        case 0x01: return Atype{rs1, rs2, rd, wd, aq, rl, AmoOp::AMOSWAP};
        case 0x00: return Atype{rs1, rs2, rd, wd, aq, rl, AmoOp::AMOADD};
        case 0x04: return Atype{rs1, rs2, rd, wd, aq, rl, AmoOp::AMOXOR};
        case 0x0C: return Atype{rs1, rs2, rd, wd, aq, rl, AmoOp::AMOAND};
        case 0x08: return Atype{rs1, rs2, rd, wd, aq, rl, AmoOp::AMOOR};
        case 0x10: return Atype{rs1, rs2, rd, wd, aq, rl, AmoOp::AMOMIN};
        case 0x14: return Atype{rs1, rs2, rd, wd, aq, rl, AmoOp::AMOMAX};
        case 0x18: return Atype{rs1, rs2, rd, wd, aq, rl, AmoOp::AMOMINU};
        case 0x1C: return Atype{rs1, rs2, rd, wd, aq, rl, AmoOp::AMOMAXU};
        default: return ill;
      }
    }
    case 0x07:
      if (f3 == 2) return Fload{imm12, rs1, rd};
      return ill;
    case 0x27:
      if (f3 == 2) return Fstore{BitVec(12, (bits(w, 31, 25) << 5) | bits(w, 11, 7)), rs1, rs2};
      return ill;
    case 0x43: case 0x47: case 0x4B: case 0x4F: {
      if (bits(w, 26, 25) != 0) return ill;  // fmt must be S
      uint8_t fs3 = static_cast<uint8_t>(bits(w, 31, 27));
      uint8_t rm = static_cast<uint8_t>(f3);
      static constexpr FfmaOp fop[4] = {FfmaOp::FMADD_S, FfmaOp::FMSUB_S, FfmaOp::FNMSUB_S,
                                        FfmaOp::FNMADD_S};
      return Ffma{rs1, rs2, fs3, rd, rm, fop[(opcode >> 2) & 3]};
    }
    case 0x53: {
      uint8_t rm = static_cast<uint8_t>(f3);
      switch (f7) {
        case 0x00: return Farith{rs1, rs2, rd, rm, FarithOp::FADD_S};
        case 0x04: return Farith{rs1, rs2, rd, rm, FarithOp::FSUB_S};
        case 0x08: return Farith{rs1, rs2, rd, rm, FarithOp::FMUL_S};
        case 0x0C: return Farith{rs1, rs2, rd, rm, FarithOp::FDIV_S};
        case 0x2C: return rs2 == 0 ? Instr{Farith{rs1, 0, rd, rm, FarithOp::FSQRT_S}} : Instr{ill};
        case 0x10:
          if (f3 == 0) return Fsgnj{rs1, rs2, rd, FsgnjOp::FSGNJ};
          if (f3 == 1) return Fsgnj{rs1, rs2, rd, FsgnjOp::FSGNJN};
          if (f3 == 2) return Fsgnj{rs1, rs2, rd, FsgnjOp::FSGNJX};
          return ill;
        case 0x14:
          if (f3 == 0) return Fminmax{rs1, rs2, rd, false};
          if (f3 == 1) return Fminmax{rs1, rs2, rd, true};
          return ill;
        case 0x50:
          if (f3 == 2) return Fcmp{rs1, rs2, rd, FcmpOp::FEQ};
          if (f3 == 1) return Fcmp{rs1, rs2, rd, FcmpOp::FLT};
          if (f3 == 0) return Fcmp{rs1, rs2, rd, FcmpOp::FLE};
          return ill;
        case 0x60:
          if (rs2 == 0) return FcvtToInt{rs1, rd, rm, IntKind::W};
          if (rs2 == 1) return FcvtToInt{rs1, rd, rm, IntKind::WU};
          if (rs2 == 2 && xlen == 64) return FcvtToInt{rs1, rd, rm, IntKind::L};
          if (rs2 == 3 && xlen == 64) return FcvtToInt{rs1, rd, rm, IntKind::LU};
          return ill;
        case 0x68:
          if (rs2 == 0) return FcvtFromInt{rs1, rd, rm, IntKind::W};
          if (rs2 == 1) return FcvtFromInt{rs1, rd, rm, IntKind::WU};
          if (rs2 == 2 && xlen == 64) return FcvtFromInt{rs1, rd, rm, IntKind::L};
          if (rs2 == 3 && xlen == 64) return FcvtFromInt{rs1, rd, rm, IntKind::LU};
          return ill;
        case 0x70:
          if (rs2 == 0 && f3 == 0) return FmvXW{rs1, rd};
          if (rs2 == 0 && f3 == 1) return Fclass{rs1, rd};
          return ill;
        case 0x78:
          if (rs2 == 0 && f3 == 0) return FmvWX{rs1, rd};
          return ill;
        default: return ill;
      }
    }
    default:
      return ill;
  }
}

// ---------------------------------------------------------------------------
// Encode
// ---------------------------------------------------------------------------

struct EncodeError : std::logic_error {
  using std::logic_error::logic_error;
};

namespace detail {

inline uint32_t enc_r(uint32_t f7, unsigned rs2, unsigned rs1, uint32_t f3, unsigned rd,
                      uint32_t opcode) {
  return (f7 << 25) | (uint32_t(rs2) << 20) | (uint32_t(rs1) << 15) | (f3 << 12) |
         (uint32_t(rd) << 7) | opcode;
}

inline uint32_t enc_i(uint32_t imm12, unsigned rs1, uint32_t f3, unsigned rd, uint32_t opcode) {
  return ((imm12 & 0xFFF) << 20) | (uint32_t(rs1) << 15) | (f3 << 12) | (uint32_t(rd) << 7) | opcode;
}

inline uint32_t enc_s(uint32_t imm12, unsigned rs2, unsigned rs1, uint32_t f3, uint32_t opcode) {
  return ((imm12 >> 5) << 25) | (uint32_t(rs2) << 20) | (uint32_t(rs1) << 15) | (f3 << 12) |
         ((imm12 & 0x1F) << 7) | opcode;
}

inline void enc_check(bool cond, const char* msg) {
  if (!cond) throw EncodeError(msg);
}

}  // namespace detail

// Left inverse of decode on legal instructions: decode(encode(i), xlen) == i.
inline uint32_t encode(const Instr& instr, unsigned xlen) {
  using namespace detail;
  struct V {
    unsigned xlen;

    uint32_t operator()(const Utype& i) const {
      return (i.imm.value() << 12) | (uint32_t(i.rd) << 7) | (i.op == UtypeOp::LUI ? 0x37 : 0x17);
    }
    uint32_t operator()(const Jal& i) const {
      uint32_t imm = static_cast<uint32_t>(i.imm.value());
      enc_check((imm & 1) == 0, "jal: odd immediate");
      uint32_t f = (((imm >> 20) & 1) << 31) | (((imm >> 1) & 0x3FF) << 21) |
                   (((imm >> 11) & 1) << 20) | (((imm >> 12) & 0xFF) << 12);
      return f | (uint32_t(i.rd) << 7) | 0x6F;
    }
    uint32_t operator()(const Jalr& i) const {
      return enc_i(static_cast<uint32_t>(i.imm.value()), i.rs1, 0, i.rd, 0x67);
    }
    uint32_t operator()(const Btype& i) const {
      uint32_t imm = static_cast<uint32_t>(i.imm.value());
      enc_check((imm & 1) == 0, "branch: odd immediate");
      static constexpr uint32_t f3s[6] = {0, 1, 4, 5, 6, 7};
      uint32_t f3 = f3s[static_cast<unsigned>(i.op)];
      return (((imm >> 12) & 1) << 31) | (((imm >> 5) & 0x3F) << 25) | (uint32_t(i.rs2) << 20) |
             (uint32_t(i.rs1) << 15) | (f3 << 12) | (((imm >> 1) & 0xF) << 8) |
             (((imm >> 11) & 1) << 7) | 0x63;
    }
    uint32_t operator()(const Load& i) const {
      uint32_t f3;
      switch (i.width) {
        case Width::Byte: f3 = i.is_unsigned ? 4 : 0; break;
        case Width::Half: f3 = i.is_unsigned ? 5 : 1; break;
        case Width::Word: f3 = i.is_unsigned ? 6 : 2; break;
        case Width::Double: f3 = 3; break;
      }
      enc_check(!(i.width == Width::Double && (i.is_unsigned || xlen != 64)), "load: bad width");
      enc_check(!(i.width == Width::Word && i.is_unsigned && xlen != 64), "lwu: RV64 only");
      return enc_i(static_cast<uint32_t>(i.imm.value()), i.rs1, f3, i.rd, 0x03);
    }
    uint32_t operator()(const Store& i) const {
      uint32_t f3 = 0;
      switch (i.width) {
        case Width::Byte: f3 = 0; break;
        case Width::Half: f3 = 1; break;
        case Width::Word: f3 = 2; break;
        case Width::Double: f3 = 3; enc_check(xlen == 64, "sd: RV64 only"); break;
      }
      return enc_s(static_cast<uint32_t>(i.imm.value()), i.rs2, i.rs1, f3, 0x23);
    }
    uint32_t operator()(const Itype& i) const {
      switch (i.op) {
        case ItypeOp::ADDI: return enc_i(static_cast<uint32_t>(i.imm.value()), i.rs1, 0, i.rd, 0x13);
        case ItypeOp::SLTI: return enc_i(static_cast<uint32_t>(i.imm.value()), i.rs1, 2, i.rd, 0x13);
        case ItypeOp::SLTIU: return enc_i(static_cast<uint32_t>(i.imm.value()), i.rs1, 3, i.rd, 0x13);
        case ItypeOp::XORI: return enc_i(static_cast<uint32_t>(i.imm.value()), i.rs1, 4, i.rd, 0x13);
        case ItypeOp::ORI: return enc_i(static_cast<uint32_t>(i.imm.value()), i.rs1, 6, i.rd, 0x13);
        case ItypeOp::ANDI: return enc_i(static_cast<uint32_t>(i.imm.value()), i.rs1, 7, i.rd, 0x13);
        case ItypeOp::SLLI:
        case ItypeOp::SRLI:
        case ItypeOp::SRAI: {
          uint32_t shamt = static_cast<uint32_t>(i.imm.value());
          enc_check(shamt < xlen, "shift: shamt out of range");
          uint32_t f3 = i.op == ItypeOp::SLLI ? 1 : 5;
          uint32_t hi = i.op == ItypeOp::SRAI ? (xlen == 64 ? 0x400u : 0x400u) : 0;
          return enc_i(hi | shamt, i.rs1, f3, i.rd, 0x13);
        }
      }
      throw EncodeError("itype");
    }
    uint32_t operator()(const Rtype& i) const {
      switch (i.op) {
        case RtypeOp::ADD: return enc_r(0, i.rs2, i.rs1, 0, i.rd, 0x33);
        case RtypeOp::SUB: return enc_r(0x20, i.rs2, i.rs1, 0, i.rd, 0x33);
        case RtypeOp::SLL: return enc_r(0, i.rs2, i.rs1, 1, i.rd, 0x33);
        case RtypeOp::SLT: return enc_r(0, i.rs2, i.rs1, 2, i.rd, 0x33);
        case RtypeOp::SLTU: return enc_r(0, i.rs2, i.rs1, 3, i.rd, 0x33);
        case RtypeOp::XOR: return enc_r(0, i.rs2, i.rs1, 4, i.rd, 0x33);
        case RtypeOp::SRL: return enc_r(0, i.rs2, i.rs1, 5, i.rd, 0x33);
        case RtypeOp::SRA: return enc_r(0x20, i.rs2, i.rs1, 5, i.rd, 0x33);
        case RtypeOp::OR: return enc_r(0, i.rs2, i.rs1, 6, i.rd, 0x33);
        case RtypeOp::AND: return enc_r(0, i.rs2, i.rs1, 7, i.rd, 0x33);
      }
      throw EncodeError("rtype");
    }
    uint32_t operator()(const Fence& i) const {
      return (static_cast<uint32_t>(i.pred.value()) << 24) |
             (static_cast<uint32_t>(i.succ.value()) << 20) | 0x0F;
    }
    uint32_t operator()(const FenceI&) const { return 0x0000100F; }
    uint32_t operator()(const Addiw& i) const {
      enc_check(xlen == 64, "addiw: RV64 only");
      return enc_i(static_cast<uint32_t>(i.imm.value()), i.rs1, 0, i.rd, 0x1B);
    }
    uint32_t operator()(const Shiftiw& i) const {
      enc_check(xlen == 64, "shiftw: RV64 only");
      enc_check(i.shamt < 32, "shiftw: shamt out of range");
      switch (i.op) {
        case ShiftiwOp::SLLIW: return enc_r(0, i.shamt, i.rs1, 1, i.rd, 0x1B);
        case ShiftiwOp::SRLIW: return enc_r(0, i.shamt, i.rs1, 5, i.rd, 0x1B);
        case ShiftiwOp::SRAIW: return enc_r(0x20, i.shamt, i.rs1, 5, i.rd, 0x1B);
      }
      throw EncodeError("shiftiw");
    }
    uint32_t operator()(const Rtypew& i) const {
      enc_check(xlen == 64, "rtypew: RV64 only");
      switch (i.op) {
        case RtypewOp::ADDW: return enc_r(0, i.rs2, i.rs1, 0, i.rd, 0x3B);
        case RtypewOp::SUBW: return enc_r(0x20, i.rs2, i.rs1, 0, i.rd, 0x3B);
        case RtypewOp::SLLW: return enc_r(0, i.rs2, i.rs1, 1, i.rd, 0x3B);
        case RtypewOp::SRLW: return enc_r(0, i.rs2, i.rs1, 5, i.rd, 0x3B);
        case RtypewOp::SRAW: return enc_r(0x20, i.rs2, i.rs1, 5, i.rd, 0x3B);
      }
      throw EncodeError("rtypew");
    }
    uint32_t operator()(const Mtype& i) const {
      static constexpr uint32_t f3s[8] = {0, 1, 2, 3, 4, 5, 6, 7};
      return enc_r(1, i.rs2, i.rs1, f3s[static_cast<unsigned>(i.op)], i.rd, 0x33);
    }
    uint32_t operator()(const Mtypew& i) const {
      enc_check(xlen == 64, "mtypew: RV64 only");
      static constexpr uint32_t f3s[5] = {0, 4, 5, 6, 7};
      return enc_r(1, i.rs2, i.rs1, f3s[static_cast<unsigned>(i.op)], i.rd, 0x3B);
    }
    uint32_t operator()(const Atype& i) const {
      uint32_t f3 = i.width == Width::Word ? 2 : 3;
      enc_check(i.width == Width::Word || (i.width == Width::Double && xlen == 64), "amo: bad width");
      static constexpr uint32_t f5s[11] = {0x02, 0x03, 0x01, 0x00, 0x04, 0x0C, 0x08,
                                           0x10, 0x14, 0x18, 0x1C};
      enc_check(!(i.op == AmoOp::LR && i.rs2 != 0), "lr: rs2 must be 0");
      uint32_t f7 = (f5s[static_cast<unsigned>(i.op)] << 2) | (uint32_t(i.aq) << 1) | uint32_t(i.rl);
      return enc_r(f7, i.rs2, i.rs1, f3, i.rd, 0x2F);
    }
    uint32_t operator()(const Csr& i) const {
      static constexpr uint32_t f3s[3] = {1, 2, 3};
      return enc_i(i.csr, i.rs1, f3s[static_cast<unsigned>(i.op)], i.rd, 0x73);
    }
    uint32_t operator()(const Csri& i) const {
      enc_check(i.uimm < 32, "csri: uimm out of range");
      static constexpr uint32_t f3s[3] = {5, 6, 7};
      return enc_i(i.csr, i.uimm, f3s[static_cast<unsigned>(i.op)], i.rd, 0x73);
    }
    uint32_t operator()(const Fload& i) const {
      return enc_i(static_cast<uint32_t>(i.imm.value()), i.rs1, 2, i.fd, 0x07);
    }
    uint32_t operator()(const Fstore& i) const {
      return enc_s(static_cast<uint32_t>(i.imm.value()), i.fs2, i.rs1, 2, 0x27);
    }
    uint32_t operator()(const Ffma& i) const {
      static constexpr uint32_t opcodes[4] = {0x43, 0x47, 0x4B, 0x4F};
      enc_check(i.rm < 8, "ffma: rm out of range");
      return (uint32_t(i.fs3) << 27) | (uint32_t(i.fs2) << 20) | (uint32_t(i.fs1) << 15) |
             (uint32_t(i.rm) << 12) | (uint32_t(i.fd) << 7) |
             opcodes[static_cast<unsigned>(i.op)];
    }
    uint32_t operator()(const Farith& i) const {
      enc_check(i.rm < 8, "farith: rm out of range");
      switch (i.op) {
        case FarithOp::FADD_S: return enc_r(0x00, i.fs2, i.fs1, i.rm, i.fd, 0x53);
        case FarithOp::FSUB_S: return enc_r(0x04, i.fs2, i.fs1, i.rm, i.fd, 0x53);
        case FarithOp::FMUL_S: return enc_r(0x08, i.fs2, i.fs1, i.rm, i.fd, 0x53);
        case FarithOp::FDIV_S: return enc_r(0x0C, i.fs2, i.fs1, i.rm, i.fd, 0x53);
        case FarithOp::FSQRT_S:
          enc_check(i.fs2 == 0, "fsqrt: fs2 must be 0");
          return enc_r(0x2C, 0, i.fs1, i.rm, i.fd, 0x53);
      }
      throw EncodeError("farith");
    }
    uint32_t operator()(const Fsgnj& i) const {
      static constexpr uint32_t f3s[3] = {0, 1, 2};
      return enc_r(0x10, i.fs2, i.fs1, f3s[static_cast<unsigned>(i.op)], i.fd, 0x53);
    }
    uint32_t operator()(const Fminmax& i) const {
      return enc_r(0x14, i.fs2, i.fs1, i.is_max ? 1 : 0, i.fd, 0x53);
    }
    uint32_t operator()(const Fcmp& i) const {
      static constexpr uint32_t f3s[3] = {2, 1, 0};
      return enc_r(0x50, i.fs2, i.fs1, f3s[static_cast<unsigned>(i.op)], i.rd, 0x53);
    }
    uint32_t operator()(const FcvtToInt& i) const {
      unsigned k = static_cast<unsigned>(i.kind);
      enc_check(k < 2 || xlen == 64, "fcvt.l: RV64 only");
      enc_check(i.rm < 8, "fcvt: rm out of range");
      return enc_r(0x60, k, i.fs1, i.rm, i.rd, 0x53);
    }
    uint32_t operator()(const FcvtFromInt& i) const {
      unsigned k = static_cast<unsigned>(i.kind);
      enc_check(k < 2 || xlen == 64, "fcvt.l: RV64 only");
      enc_check(i.rm < 8, "fcvt: rm out of range");
      return enc_r(0x68, k, i.rs1, i.rm, i.fd, 0x53);
    }
    uint32_t operator()(const FmvXW& i) const { return enc_r(0x70, 0, i.fs1, 0, i.rd, 0x53); }
    uint32_t operator()(const FmvWX& i) const { return enc_r(0x78, 0, i.rs1, 0, i.fd, 0x53); }
    uint32_t operator()(const Fclass& i) const { return enc_r(0x70, 0, i.fs1, 1, i.rd, 0x53); }
    uint32_t operator()(const Ecall&) const { return 0x00000073; }
    uint32_t operator()(const Ebreak&) const { return 0x00100073; }
    uint32_t operator()(const Mret&) const { return 0x30200073; }
    uint32_t operator()(const Wfi&) const { return 0x10500073; }
    uint32_t operator()(const Illegal&) const { throw EncodeError("cannot encode ILLEGAL"); }
  };
  return std::visit(V{xlen}, instr);
}

}  // namespace rvtrace
