#pragma once

#include <optional>
#include <random>

#include "rvtrace/equiv.hpp"
#include "rvtrace/exec.hpp"
#include "rvtrace/microir.hpp"

namespace rvtrace {

// A rule-style combinational 32-bit ALU: a guarded rule table keyed on the
// funct7/funct3 fields of the R-type encoding. Undefined encodings yield no
// result.

struct AluRule {
  uint8_t funct7;
  uint8_t funct3;
  uint32_t (*eval)(uint32_t, uint32_t);
};

inline const std::array<AluRule, 10>& alu_rules() {
  static const std::array<AluRule, 10> rules = {{
      {0x00, 0, [](uint32_t a, uint32_t b) { return a + b; }},
      {0x20, 0, [](uint32_t a, uint32_t b) { return a - b; }},
      {0x00, 1, [](uint32_t a, uint32_t b) { return a << (b & 31); }},
      {0x00, 2, [](uint32_t a, uint32_t b) { return uint32_t(int32_t(a) < int32_t(b) ? 1 : 0); }},
      {0x00, 3, [](uint32_t a, uint32_t b) { return uint32_t(a < b ? 1 : 0); }},
      {0x00, 4, [](uint32_t a, uint32_t b) { return a ^ b; }},
      {0x00, 5, [](uint32_t a, uint32_t b) { return a >> (b & 31); }},
      {0x20, 5, [](uint32_t a, uint32_t b) { return uint32_t(int32_t(a) >> (b & 31)); }},
      {0x00, 6, [](uint32_t a, uint32_t b) { return a | b; }},
      {0x00, 7, [](uint32_t a, uint32_t b) { return a & b; }},
  }};
  return rules;
}

inline std::optional<uint32_t> run_alu32(uint32_t encoded, uint32_t a, uint32_t b) {
  if ((encoded & 0x7F) != 0x33) return std::nullopt;  // not an R-type opcode
  uint8_t funct3 = (encoded >> 12) & 7;
  uint8_t funct7 = (encoded >> 25) & 0x7F;
  for (const AluRule& r : alu_rules())
    if (r.funct7 == funct7 && r.funct3 == funct3) return r.eval(a, b);
  return std::nullopt;
}

struct AluCheckConfig {
  unsigned samples = 10000;  // per op
  uint64_t seed = 1;
};

// Refinement check: for each R-type op, the value the ISA semantics writes to
// rd equals the ALU's combinational result on the same encoding and operands.
inline Verdict check_alu_refinement(const AluCheckConfig& cfg) {
  static const RtypeOp kOps[] = {RtypeOp::ADD, RtypeOp::SUB,  RtypeOp::SLL, RtypeOp::SLT,
                                 RtypeOp::SLTU, RtypeOp::XOR, RtypeOp::SRL, RtypeOp::SRA,
                                 RtypeOp::OR,   RtypeOp::AND};
  std::mt19937_64 rng(cfg.seed);
  for (RtypeOp op : kOps) {
    for (unsigned n = 0; n < cfg.samples; n++) {
      uint8_t rs1 = 1 + rng() % 31, rs2 = 1 + rng() % 31, rd = 1 + rng() % 31;
      RegPcState st;
      st.xlen = 32;
      for (unsigned r = 1; r < 32; r++) st.regs[r] = rng() & 0xFFFFFFFF;
      uint32_t a = uint32_t(st.regs[rs1]), b = uint32_t(st.regs[rs2]);

      Rtype instr{rs1, rs2, rd, op};
      auto final_state = run_to_ret(
          interp_state<ExecResult, RegPcState>(regpc_handler(),
                                               exec_instr(Instr{instr}, 32), st));
      uint32_t isa_v = uint32_t(final_state.first.regs[rd]);

      std::optional<uint32_t> alu_v = run_alu32(encode(Instr{instr}, 32), a, b);
      if (!alu_v) {
        return {VerdictKind::Mismatch,
                "ALU has no rule for a legal encoding (op index " +
                    std::to_string(int(op)) + ")"};
      }
      if (*alu_v != isa_v) {
        char buf[160];
        snprintf(buf, sizeof(buf),
                 "op %d: a=0x%08x b=0x%08x isa=0x%08x alu=0x%08x (sample %u)", int(op), a, b,
                 isa_v, *alu_v, n);
        return {VerdictKind::Mismatch, buf};
      }
    }
  }
  return {VerdictKind::Equivalent, ""};
}

}  // namespace rvtrace
