#pragma once

#include "rvtrace/bitvec.hpp"
#include "rvtrace/effects.hpp"
#include "rvtrace/isa.hpp"
#include "rvtrace/softfloat.hpp"

namespace rvtrace {

namespace csr_addr {
constexpr uint16_t fflags = 0x001;
constexpr uint16_t frm = 0x002;
constexpr uint16_t fcsr = 0x003;
}  // namespace csr_addr

// ---------------------------------------------------------------------------
// Pure helpers
// ---------------------------------------------------------------------------

inline BitVec rtype_value(RtypeOp op, const BitVec& a, const BitVec& b) {
  unsigned w = a.width();
  switch (op) {
    case RtypeOp::ADD: return bv_add(a, b);
    case RtypeOp::SUB: return bv_sub(a, b);
    case RtypeOp::SLL: return bv_sll(a, b);
    case RtypeOp::SLT: return zero_extend(w, bv_slt(a, b));
    case RtypeOp::SLTU: return zero_extend(w, bv_ult(a, b));
    case RtypeOp::XOR: return bv_xor(a, b);
    case RtypeOp::SRL: return bv_srl(a, b);
    case RtypeOp::SRA: return bv_sra(a, b);
    case RtypeOp::OR: return bv_or(a, b);
    case RtypeOp::AND: return bv_and(a, b);
  }
  throw std::logic_error("rtype_value");
}

inline BitVec itype_value(ItypeOp op, const BitVec& a, const BitVec& imm12, unsigned xlen) {
  BitVec imm = sign_extend(xlen, imm12);
  switch (op) {
    case ItypeOp::ADDI: return bv_add(a, imm);
    case ItypeOp::SLTI: return zero_extend(xlen, bv_slt(a, imm));
    case ItypeOp::SLTIU: return zero_extend(xlen, bv_ult(a, imm));
    case ItypeOp::XORI: return bv_xor(a, imm);
    case ItypeOp::ORI: return bv_or(a, imm);
    case ItypeOp::ANDI: return bv_and(a, imm);
    case ItypeOp::SLLI: return bv_sll(a, imm12.value());
    case ItypeOp::SRLI: return bv_srl(a, imm12.value());
    case ItypeOp::SRAI: return bv_sra(a, imm12.value());
  }
  throw std::logic_error("itype_value");
}

inline BitVec mtype_value(MtypeOp op, const BitVec& a, const BitVec& b) {
  unsigned w = a.width();
  switch (op) {
    case MtypeOp::MUL: return BitVec(w, a.value() * b.value());
    case MtypeOp::MULH: return bv_mulh_ss(a, b);
    case MtypeOp::MULHSU: return bv_mulh_su(a, b);
    case MtypeOp::MULHU: return bv_mulh_uu(a, b);
    case MtypeOp::DIV: {
      if (b.value() == 0) return BitVec(w, ~uint64_t(0));
      int64_t sa = a.signed_value(), sb = b.signed_value();
      if (sa == (int64_t(-1) << (w - 1)) && sb == -1) return a;  // overflow
      return BitVec::from_signed(w, sa / sb);
    }
    case MtypeOp::DIVU:
      if (b.value() == 0) return BitVec(w, ~uint64_t(0));
      return BitVec(w, a.value() / b.value());
    case MtypeOp::REM: {
      if (b.value() == 0) return a;
      int64_t sa = a.signed_value(), sb = b.signed_value();
      if (sa == (int64_t(-1) << (w - 1)) && sb == -1) return BitVec(w, 0);
      return BitVec::from_signed(w, sa % sb);
    }
    case MtypeOp::REMU:
      if (b.value() == 0) return a;
      return BitVec(w, a.value() % b.value());
  }
  throw std::logic_error("mtype_value");
}

inline BitVec amo_combine(AmoOp op, const BitVec& old, const BitVec& src) {
  switch (op) {
    case AmoOp::AMOSWAP: return src;
    case AmoOp::AMOADD: return bv_add(old, src);
    case AmoOp::AMOXOR: return bv_xor(old, src);
    case AmoOp::AMOAND: return bv_and(old, src);
    case AmoOp::AMOOR: return bv_or(old, src);
    case AmoOp::AMOMIN: return old.signed_value() < src.signed_value() ? old : src;
    case AmoOp::AMOMAX: return old.signed_value() > src.signed_value() ? old : src;
    case AmoOp::AMOMINU: return old.value() < src.value() ? old : src;
    case AmoOp::AMOMAXU: return old.value() > src.value() ? old : src;
    default: throw std::logic_error("amo_combine: not an AMO");
  }
}

// ---------------------------------------------------------------------------
// Computation helpers
// ---------------------------------------------------------------------------

namespace ops {

inline Comp<ExecResult> retire() { return ret(ExecResult::success()); }
inline Comp<ExecResult> fail(TrapCause c, uint64_t tval = 0) {
  return ret(ExecResult::fail(c, tval));
}
inline Comp<ExecResult> fail(const Trap& t) { return ret(ExecResult{t}); }

inline Comp<BitVec> read_reg(unsigned r) { return trigger_word(RegRead{r}); }
inline Comp<Unit> write_reg(unsigned r, BitVec v) { return trigger_unit(RegWrite{r, v}); }
inline Comp<BitVec> read_freg(unsigned r) { return trigger_word(FPRegRead{r}); }
inline Comp<Unit> write_freg(unsigned r, uint32_t bits) {
  return trigger_unit(FPRegWrite{r, BitVec(32, bits)});
}
inline Comp<BitVec> read_pc() { return trigger_word(PCRead{}); }
inline Comp<Unit> write_pc(BitVec v) { return trigger_unit(PCWrite{v}); }

inline Comp<ExecResult> write_reg_retire(unsigned r, BitVec v) {
  return bind<ExecResult>(write_reg(r, v), [](Unit) { return retire(); });
}

// Resolve the effective rounding mode; DYN reads frm.
inline Comp<std::optional<softfloat::RoundingMode>> resolve_rm(uint8_t rm_bits) {
  using softfloat::RoundingMode;
  using Out = std::optional<RoundingMode>;
  if (rm_bits == 7) {
    return bind<Out>(trigger_result_word(CSRRead{csr_addr::frm}), [](const Result<BitVec>& r) {
      if (!r.is_ok()) return ret(Out{});
      return ret(softfloat::decode_rm(static_cast<unsigned>(r.unwrap().value() & 7)));
    });
  }
  return ret(softfloat::decode_rm(rm_bits));
}

// Accumulate exception flags into fflags, touching the CSR only when nonzero.
inline Comp<ExecResult> update_fflags(unsigned flags) {
  if (flags == 0) return retire();
  return bind<ExecResult>(trigger_result_word(CSRRead{csr_addr::fflags}),
                          [flags](const Result<BitVec>& r) {
                            if (!r.is_ok()) return fail(r.trap);
                            BitVec merged = bv_or(r.unwrap(), BitVec(r.unwrap().width(), flags));
                            return bind<ExecResult>(
                                trigger_result_unit(CSRWrite{csr_addr::fflags, merged}),
                                [](const Result<Unit>& wr) {
                                  if (!wr.is_ok()) return fail(wr.trap);
                                  return retire();
                                });
                          });
}

}  // namespace ops

// ---------------------------------------------------------------------------
// Per-class semantics
// ---------------------------------------------------------------------------

inline Comp<ExecResult> exec_rtype(uint8_t rs1, uint8_t rs2, uint8_t rd, RtypeOp op) {
  using namespace ops;
  return bind<ExecResult>(read_reg(rs1), [=](const BitVec& a) {
    return bind<ExecResult>(read_reg(rs2), [=](const BitVec& b) {
      return write_reg_retire(rd, rtype_value(op, a, b));
    });
  });
}

inline Comp<ExecResult> exec_itype(const Itype& i, unsigned xlen) {
  using namespace ops;
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& a) {
    return write_reg_retire(i.rd, itype_value(i.op, a, i.imm, xlen));
  });
}

inline Comp<ExecResult> exec_btype(const Btype& i, unsigned xlen) {
  using namespace ops;
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& a) {
    return bind<ExecResult>(read_reg(i.rs2), [=](const BitVec& b) {
      bool taken;
      switch (i.op) {
        case BtypeOp::BEQ: taken = a == b; break;
        case BtypeOp::BNE: taken = a != b; break;
        case BtypeOp::BLT: taken = a.signed_value() < b.signed_value(); break;
        case BtypeOp::BGE: taken = a.signed_value() >= b.signed_value(); break;
        case BtypeOp::BLTU: taken = a.value() < b.value(); break;
        case BtypeOp::BGEU: taken = a.value() >= b.value(); break;
        default: taken = false;
      }
      if (!taken) return retire();
      BitVec off = sign_extend(xlen, i.imm);
      return bind<ExecResult>(read_pc(), [=](const BitVec& pc) {
        BitVec target = bv_add(pc, off);
        if (target.value() & 3) return fail(TrapCause::InstrAddrMisaligned, target.value());
        return bind<ExecResult>(write_pc(target), [](Unit) { return retire(); });
      });
    });
  });
}

inline Comp<ExecResult> exec_utype(const Utype& i, unsigned xlen) {
  using namespace ops;
  BitVec val32 = bv_concat(i.imm, BitVec(12, 0));  // imm << 12, 32 bits
  BitVec val = sign_extend(xlen, val32);
  if (i.op == UtypeOp::LUI) return write_reg_retire(i.rd, val);
  return bind<ExecResult>(read_pc(), [=](const BitVec& pc) {
    return write_reg_retire(i.rd, bv_add(pc, val));
  });
}

inline Comp<ExecResult> exec_jal(const Jal& i, unsigned xlen) {
  using namespace ops;
  BitVec off = sign_extend(xlen, i.imm);
  return bind<ExecResult>(read_pc(), [=](const BitVec& pc) {
    BitVec target = bv_add(pc, off);
    if (target.value() & 3) return fail(TrapCause::InstrAddrMisaligned, target.value());
    return bind<ExecResult>(write_reg(i.rd, bv_add(pc, BitVec(xlen, 4))), [=](Unit) {
      return bind<ExecResult>(write_pc(target), [](Unit) { return retire(); });
    });
  });
}

inline Comp<ExecResult> exec_jalr(const Jalr& i, unsigned xlen) {
  using namespace ops;
  BitVec off = sign_extend(xlen, i.imm);
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& base) {
    return bind<ExecResult>(read_pc(), [=](const BitVec& pc) {
      BitVec target(xlen, bv_add(base, off).value() & ~uint64_t(1));
      if (target.value() & 3) return fail(TrapCause::InstrAddrMisaligned, target.value());
      return bind<ExecResult>(write_reg(i.rd, bv_add(pc, BitVec(xlen, 4))), [=](Unit) {
        return bind<ExecResult>(write_pc(target), [](Unit) { return retire(); });
      });
    });
  });
}

inline Comp<ExecResult> exec_load(const Load& i, unsigned xlen) {
  using namespace ops;
  BitVec off = sign_extend(xlen, i.imm);
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& base) {
    return bind<ExecResult>(trigger_result_word(VMemRead{base, off, i.width, false}),
                            [=](const Result<BitVec>& mr) {
                              if (!mr.is_ok()) return fail(mr.trap);
                              // responses carry the loaded bytes zero-extended to XLEN
                              BitVec data = mr.unwrap();
                              BitVec result =
                                  i.is_unsigned
                                      ? data
                                      : sign_extend(xlen, bv_extract(0, width_bits(i.width), data));
                              return write_reg_retire(i.rd, result);
                            });
  });
}

inline Comp<ExecResult> exec_store(const Store& i, unsigned xlen) {
  using namespace ops;
  BitVec off = sign_extend(xlen, i.imm);
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& base) {
    return bind<ExecResult>(read_reg(i.rs2), [=](const BitVec& data) {
      return bind<ExecResult>(trigger_result_unit(VMemWrite{base, off, i.width, data, false}),
                              [](const Result<Unit>& wr) {
                                if (!wr.is_ok()) return fail(wr.trap);
                                return retire();
                              });
    });
  });
}

inline Comp<ExecResult> exec_mtype(const Mtype& i) {
  using namespace ops;
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& a) {
    return bind<ExecResult>(read_reg(i.rs2), [=](const BitVec& b) {
      return write_reg_retire(i.rd, mtype_value(i.op, a, b));
    });
  });
}

inline Comp<ExecResult> exec_word_op(uint8_t rs1, uint8_t rd,
                                     std::function<BitVec(const BitVec&)> f) {
  using namespace ops;
  return bind<ExecResult>(read_reg(rs1), [=](const BitVec& a) {
    return write_reg_retire(rd, f(a));
  });
}

inline Comp<ExecResult> exec_rtypew(const Rtypew& i) {
  using namespace ops;
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& a) {
    return bind<ExecResult>(read_reg(i.rs2), [=](const BitVec& b) {
      BitVec a32 = bv_extract(0, 32, a), b32 = bv_extract(0, 32, b);
      BitVec r32;
      switch (i.op) {
        case RtypewOp::ADDW: r32 = bv_add(a32, b32); break;
        case RtypewOp::SUBW: r32 = bv_sub(a32, b32); break;
        case RtypewOp::SLLW: r32 = bv_sll(a32, b32.value()); break;
        case RtypewOp::SRLW: r32 = bv_srl(a32, b32.value()); break;
        case RtypewOp::SRAW: r32 = bv_sra(a32, b32.value()); break;
      }
      return write_reg_retire(i.rd, sign_extend(64, r32));
    });
  });
}

inline Comp<ExecResult> exec_mtypew(const Mtypew& i) {
  using namespace ops;
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& a) {
    return bind<ExecResult>(read_reg(i.rs2), [=](const BitVec& b) {
      BitVec a32 = bv_extract(0, 32, a), b32 = bv_extract(0, 32, b);
      MtypeOp op;
      switch (i.op) {
        case MtypewOp::MULW: op = MtypeOp::MUL; break;
        case MtypewOp::DIVW: op = MtypeOp::DIV; break;
        case MtypewOp::DIVUW: op = MtypeOp::DIVU; break;
        case MtypewOp::REMW: op = MtypeOp::REM; break;
        case MtypewOp::REMUW: op = MtypeOp::REMU; break;
        default: op = MtypeOp::MUL;
      }
      return write_reg_retire(i.rd, sign_extend(64, mtype_value(op, a32, b32)));
    });
  });
}

inline Comp<ExecResult> exec_atype(const Atype& i, unsigned xlen) {
  using namespace ops;
  unsigned wbits = width_bits(i.width);
  if (i.op == AmoOp::LR) {
    return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& addr) {
      if (addr.value() % width_bytes(i.width))
        return fail(TrapCause::LoadAddrMisaligned, addr.value());
      return bind<ExecResult>(
          trigger_result_word(VMemRead{addr, BitVec(xlen, 0), i.width, true}),
          [=](const Result<BitVec>& mr) {
            if (!mr.is_ok()) return fail(mr.trap);
            return write_reg_retire(i.rd, sign_extend(xlen, bv_extract(0, wbits, mr.unwrap())));
          });
    });
  }
  if (i.op == AmoOp::SC) {
    return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& addr) {
      return bind<ExecResult>(read_reg(i.rs2), [=](const BitVec& data) {
        if (addr.value() % width_bytes(i.width))
          return fail(TrapCause::StoreAddrMisaligned, addr.value());
        return bind<ExecResult>(
            trigger_result_unit(VMemWrite{addr, BitVec(xlen, 0), i.width, data, true}),
            [=](const Result<Unit>& wr) {
              if (wr.is_ok()) return write_reg_retire(i.rd, BitVec(xlen, 0));
              if (wr.trap.cause == TrapCause::ScFailure)
                return write_reg_retire(i.rd, BitVec(xlen, 1));
              return fail(wr.trap);
            });
      });
    });
  }
  // Read-modify-write AMOs.
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& addr) {
    return bind<ExecResult>(read_reg(i.rs2), [=](const BitVec& src) {
      if (addr.value() % width_bytes(i.width))
        return fail(TrapCause::StoreAddrMisaligned, addr.value());
      return bind<ExecResult>(
          trigger_result_word(VMemRead{addr, BitVec(xlen, 0), i.width, false}),
          [=](const Result<BitVec>& mr) {
            if (!mr.is_ok()) return fail(mr.trap);
            BitVec old = bv_extract(0, wbits, mr.unwrap());
            BitVec combined = amo_combine(i.op, old, bv_extract(0, wbits, src));
            return bind<ExecResult>(
                trigger_result_unit(VMemWrite{addr, BitVec(xlen, 0), i.width,
                                              zero_extend(xlen, combined), false}),
                [=](const Result<Unit>& wr) {
                  if (!wr.is_ok()) return fail(wr.trap);
                  return write_reg_retire(i.rd, sign_extend(xlen, old));
                });
          });
    });
  });
}

// Common tail for CSR read/modify/write; `src` is the write operand, already
// resolved (register value or zero-extended uimm).
inline Comp<ExecResult> exec_csr_common(uint16_t csr, CsrOp op, bool skip_write, uint8_t rd,
                                        const BitVec& src, unsigned xlen) {
  using namespace ops;
  return bind<ExecResult>(trigger_result_word(CSRRead{csr}), [=](const Result<BitVec>& rr) {
    if (!rr.is_ok()) return fail(rr.trap);
    BitVec old = rr.unwrap();
    if (skip_write) return write_reg_retire(rd, old);
    BitVec next = old;
    switch (op) {
      case CsrOp::CSRRW: next = src; break;
      case CsrOp::CSRRS: next = bv_or(old, src); break;
      case CsrOp::CSRRC: next = bv_and(old, BitVec(xlen, ~src.value())); break;
    }
    return bind<ExecResult>(trigger_result_unit(CSRWrite{csr, next}),
                            [=](const Result<Unit>& wr) {
                              if (!wr.is_ok()) return fail(wr.trap);
                              return write_reg_retire(rd, old);
                            });
  });
}

inline Comp<ExecResult> exec_csr(const Csr& i, unsigned xlen) {
  using namespace ops;
  // CSRRS/CSRRC with rs1 = x0 performs no write at all.
  bool skip_write = i.op != CsrOp::CSRRW && i.rs1 == 0;
  if (skip_write)
    return exec_csr_common(i.csr, i.op, true, i.rd, BitVec(xlen, 0), xlen);
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& src) {
    return exec_csr_common(i.csr, i.op, false, i.rd, src, xlen);
  });
}

inline Comp<ExecResult> exec_csri(const Csri& i, unsigned xlen) {
  bool skip_write = i.op != CsrOp::CSRRW && i.uimm == 0;
  return exec_csr_common(i.csr, i.op, skip_write, i.rd, BitVec(xlen, i.uimm), xlen);
}

// ---- F extension ----

inline Comp<ExecResult> exec_fload(const Fload& i, unsigned xlen) {
  using namespace ops;
  BitVec off = sign_extend(xlen, i.imm);
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& base) {
    return bind<ExecResult>(trigger_result_word(VMemRead{base, off, Width::Word, false}),
                            [=](const Result<BitVec>& mr) {
                              if (!mr.is_ok()) return fail(mr.trap);
                              uint32_t bits = static_cast<uint32_t>(mr.unwrap().value());
                              return bind<ExecResult>(write_freg(i.fd, bits),
                                                      [](Unit) { return retire(); });
                            });
  });
}

inline Comp<ExecResult> exec_fstore(const Fstore& i, unsigned xlen) {
  using namespace ops;
  BitVec off = sign_extend(xlen, i.imm);
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& base) {
    return bind<ExecResult>(read_freg(i.fs2), [=](const BitVec& data) {
      return bind<ExecResult>(
          trigger_result_unit(VMemWrite{base, off, Width::Word, zero_extend(xlen, data), false}),
          [](const Result<Unit>& wr) {
            if (!wr.is_ok()) return fail(wr.trap);
            return retire();
          });
    });
  });
}

inline Comp<ExecResult> exec_ffma(const Ffma& i) {
  using namespace ops;
  using softfloat::FResult;
  return bind<ExecResult>(resolve_rm(i.rm), [=](const std::optional<softfloat::RoundingMode>& rm) {
    if (!rm) return fail(TrapCause::IllegalInstruction);
    return bind<ExecResult>(read_freg(i.fs1), [=](const BitVec& a) {
      return bind<ExecResult>(read_freg(i.fs2), [=](const BitVec& b) {
        return bind<ExecResult>(read_freg(i.fs3), [=](const BitVec& c) {
          uint32_t x = static_cast<uint32_t>(a.value());
          uint32_t y = static_cast<uint32_t>(b.value());
          uint32_t z = static_cast<uint32_t>(c.value());
          FResult r{0, 0};
          switch (i.op) {
            case FfmaOp::FMADD_S: r = softfloat::f32_fmadd(x, y, z, *rm); break;
            case FfmaOp::FMSUB_S: r = softfloat::f32_fmsub(x, y, z, *rm); break;
            case FfmaOp::FNMADD_S: r = softfloat::f32_fnmadd(x, y, z, *rm); break;
            case FfmaOp::FNMSUB_S: r = softfloat::f32_fnmsub(x, y, z, *rm); break;
          }
          return bind<ExecResult>(write_freg(i.fd, r.bits),
                                  [=](Unit) { return update_fflags(r.flags); });
        });
      });
    });
  });
}

inline Comp<ExecResult> exec_farith(const Farith& i) {
  using namespace ops;
  using softfloat::FResult;
  return bind<ExecResult>(resolve_rm(i.rm), [=](const std::optional<softfloat::RoundingMode>& rm) {
    if (!rm) return fail(TrapCause::IllegalInstruction);
    return bind<ExecResult>(read_freg(i.fs1), [=](const BitVec& a) {
      uint32_t x = static_cast<uint32_t>(a.value());
      if (i.op == FarithOp::FSQRT_S) {
        FResult r = softfloat::f32_sqrt(x, *rm);
        return bind<ExecResult>(write_freg(i.fd, r.bits),
                                [=](Unit) { return update_fflags(r.flags); });
      }
      return bind<ExecResult>(read_freg(i.fs2), [=](const BitVec& b) {
        uint32_t y = static_cast<uint32_t>(b.value());
        FResult r{0, 0};
        switch (i.op) {
          case FarithOp::FADD_S: r = softfloat::f32_add(x, y, *rm); break;
          case FarithOp::FSUB_S: r = softfloat::f32_sub(x, y, *rm); break;
          case FarithOp::FMUL_S: r = softfloat::f32_mul(x, y, *rm); break;
          case FarithOp::FDIV_S: r = softfloat::f32_div(x, y, *rm); break;
          default: break;
        }
        return bind<ExecResult>(write_freg(i.fd, r.bits),
                                [=](Unit) { return update_fflags(r.flags); });
      });
    });
  });
}

inline Comp<ExecResult> exec_fsgnj(const Fsgnj& i) {
  using namespace ops;
  return bind<ExecResult>(read_freg(i.fs1), [=](const BitVec& a) {
    return bind<ExecResult>(read_freg(i.fs2), [=](const BitVec& b) {
      uint32_t x = static_cast<uint32_t>(a.value()), y = static_cast<uint32_t>(b.value());
      uint32_t r;
      switch (i.op) {
        case FsgnjOp::FSGNJ: r = softfloat::f32_sgnj(x, y); break;
        case FsgnjOp::FSGNJN: r = softfloat::f32_sgnjn(x, y); break;
        case FsgnjOp::FSGNJX: r = softfloat::f32_sgnjx(x, y); break;
        default: r = x;
      }
      return bind<ExecResult>(write_freg(i.fd, r), [](Unit) { return retire(); });
    });
  });
}

inline Comp<ExecResult> exec_fminmax(const Fminmax& i) {
  using namespace ops;
  return bind<ExecResult>(read_freg(i.fs1), [=](const BitVec& a) {
    return bind<ExecResult>(read_freg(i.fs2), [=](const BitVec& b) {
      uint32_t x = static_cast<uint32_t>(a.value()), y = static_cast<uint32_t>(b.value());
      softfloat::FResult r = i.is_max ? softfloat::f32_max(x, y) : softfloat::f32_min(x, y);
      return bind<ExecResult>(write_freg(i.fd, r.bits),
                              [=](Unit) { return update_fflags(r.flags); });
    });
  });
}

inline Comp<ExecResult> exec_fcmp(const Fcmp& i, unsigned xlen) {
  using namespace ops;
  return bind<ExecResult>(read_freg(i.fs1), [=](const BitVec& a) {
    return bind<ExecResult>(read_freg(i.fs2), [=](const BitVec& b) {
      uint32_t x = static_cast<uint32_t>(a.value()), y = static_cast<uint32_t>(b.value());
      softfloat::IResult r{0, 0};
      switch (i.op) {
        case FcmpOp::FEQ: r = softfloat::f32_feq(x, y); break;
        case FcmpOp::FLT: r = softfloat::f32_flt(x, y); break;
        case FcmpOp::FLE: r = softfloat::f32_fle(x, y); break;
      }
      return bind<ExecResult>(write_reg(i.rd, BitVec(xlen, r.value)),
                              [=](Unit) { return update_fflags(r.flags); });
    });
  });
}

inline Comp<ExecResult> exec_fcvt_to_int(const FcvtToInt& i, unsigned xlen) {
  using namespace ops;
  return bind<ExecResult>(resolve_rm(i.rm), [=](const std::optional<softfloat::RoundingMode>& rm) {
    if (!rm) return fail(TrapCause::IllegalInstruction);
    return bind<ExecResult>(read_freg(i.fs1), [=](const BitVec& a) {
      softfloat::IResult r = softfloat::f32_to_int(static_cast<uint32_t>(a.value()), i.kind, *rm);
      BitVec result = softfloat::int_kind_64(i.kind)
                          ? BitVec(xlen, r.value)
                          : sign_extend(xlen, BitVec(32, r.value));  // W results sign-extended
      return bind<ExecResult>(write_reg(i.rd, result),
                              [=](Unit) { return update_fflags(r.flags); });
    });
  });
}

inline Comp<ExecResult> exec_fcvt_from_int(const FcvtFromInt& i, unsigned xlen) {
  using namespace ops;
  return bind<ExecResult>(resolve_rm(i.rm), [=](const std::optional<softfloat::RoundingMode>& rm) {
    if (!rm) return fail(TrapCause::IllegalInstruction);
    return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& a) {
      softfloat::FResult r = softfloat::int_to_f32(a.value(), i.kind, *rm);
      return bind<ExecResult>(write_freg(i.fd, r.bits),
                              [=](Unit) { return update_fflags(r.flags); });
    });
  });
}

inline Comp<ExecResult> exec_fmv_x_w(const FmvXW& i, unsigned xlen) {
  using namespace ops;
  return bind<ExecResult>(read_freg(i.fs1), [=](const BitVec& a) {
    return write_reg_retire(i.rd, sign_extend(xlen, a));
  });
}

inline Comp<ExecResult> exec_fmv_w_x(const FmvWX& i) {
  using namespace ops;
  return bind<ExecResult>(read_reg(i.rs1), [=](const BitVec& a) {
    return bind<ExecResult>(write_freg(i.fd, static_cast<uint32_t>(a.value() & 0xFFFFFFFF)),
                            [](Unit) { return retire(); });
  });
}

inline Comp<ExecResult> exec_fclass(const Fclass& i, unsigned xlen) {
  using namespace ops;
  return bind<ExecResult>(read_freg(i.fs1), [=](const BitVec& a) {
    return write_reg_retire(i.rd,
                            BitVec(xlen, softfloat::f32_classify(static_cast<uint32_t>(a.value()))));
  });
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

// Ecall traps are reported with the U-mode cause; trap entry substitutes the
// cause for the actual current privilege. MRET and WFI are handled by the
// step loop (they change privilege state outside the event vocabulary).
inline Comp<ExecResult> exec_instr(const Instr& instr, unsigned xlen) {
  using namespace ops;
  struct V {
    unsigned xlen;
    Comp<ExecResult> operator()(const Itype& i) const { return exec_itype(i, xlen); }
    Comp<ExecResult> operator()(const Rtype& i) const { return exec_rtype(i.rs1, i.rs2, i.rd, i.op); }
    Comp<ExecResult> operator()(const Btype& i) const { return exec_btype(i, xlen); }
    Comp<ExecResult> operator()(const Utype& i) const { return exec_utype(i, xlen); }
    Comp<ExecResult> operator()(const Jal& i) const { return exec_jal(i, xlen); }
    Comp<ExecResult> operator()(const Jalr& i) const { return exec_jalr(i, xlen); }
    Comp<ExecResult> operator()(const Load& i) const { return exec_load(i, xlen); }
    Comp<ExecResult> operator()(const Store& i) const { return exec_store(i, xlen); }
    Comp<ExecResult> operator()(const Fence&) const { return ops::retire(); }
    Comp<ExecResult> operator()(const FenceI&) const { return ops::retire(); }
    Comp<ExecResult> operator()(const Addiw& i) const {
      BitVec imm = i.imm;
      return exec_word_op(i.rs1, i.rd, [imm](const BitVec& a) {
        return sign_extend(64, bv_add(bv_extract(0, 32, a), sign_extend(32, imm)));
      });
    }
    Comp<ExecResult> operator()(const Shiftiw& i) const {
      uint8_t shamt = i.shamt;
      ShiftiwOp op = i.op;
      return exec_word_op(i.rs1, i.rd, [shamt, op](const BitVec& a) {
        BitVec a32 = bv_extract(0, 32, a);
        BitVec r32;
        switch (op) {
          case ShiftiwOp::SLLIW: r32 = bv_sll(a32, shamt); break;
          case ShiftiwOp::SRLIW: r32 = bv_srl(a32, shamt); break;
          case ShiftiwOp::SRAIW: r32 = bv_sra(a32, shamt); break;
        }
        return sign_extend(64, r32);
      });
    }
    Comp<ExecResult> operator()(const Rtypew& i) const { return exec_rtypew(i); }
    Comp<ExecResult> operator()(const Mtype& i) const { return exec_mtype(i); }
    Comp<ExecResult> operator()(const Mtypew& i) const { return exec_mtypew(i); }
    Comp<ExecResult> operator()(const Atype& i) const { return exec_atype(i, xlen); }
    Comp<ExecResult> operator()(const Csr& i) const { return exec_csr(i, xlen); }
    Comp<ExecResult> operator()(const Csri& i) const { return exec_csri(i, xlen); }
    Comp<ExecResult> operator()(const Fload& i) const { return exec_fload(i, xlen); }
    Comp<ExecResult> operator()(const Fstore& i) const { return exec_fstore(i, xlen); }
    Comp<ExecResult> operator()(const Ffma& i) const { return exec_ffma(i); }
    Comp<ExecResult> operator()(const Farith& i) const { return exec_farith(i); }
    Comp<ExecResult> operator()(const Fsgnj& i) const { return exec_fsgnj(i); }
    Comp<ExecResult> operator()(const Fminmax& i) const { return exec_fminmax(i); }
    Comp<ExecResult> operator()(const Fcmp& i) const { return exec_fcmp(i, xlen); }
    Comp<ExecResult> operator()(const FcvtToInt& i) const { return exec_fcvt_to_int(i, xlen); }
    Comp<ExecResult> operator()(const FcvtFromInt& i) const { return exec_fcvt_from_int(i, xlen); }
    Comp<ExecResult> operator()(const FmvXW& i) const { return exec_fmv_x_w(i, xlen); }
    Comp<ExecResult> operator()(const FmvWX& i) const { return exec_fmv_w_x(i); }
    Comp<ExecResult> operator()(const Fclass& i) const { return exec_fclass(i, xlen); }
    Comp<ExecResult> operator()(const Ecall&) const {
      return ops::fail(TrapCause::EcallFromU);
    }
    Comp<ExecResult> operator()(const Ebreak&) const { return ops::fail(TrapCause::Breakpoint); }
    Comp<ExecResult> operator()(const Mret&) const { return ops::retire(); }
    Comp<ExecResult> operator()(const Wfi&) const { return ops::retire(); }
    Comp<ExecResult> operator()(const Illegal& i) const {
      return ops::fail(TrapCause::IllegalInstruction, i.raw);
    }
  };
  return std::visit(V{xlen}, instr);
}

}  // namespace rvtrace
