#pragma once

#include <random>

#include "rvtrace/asm.hpp"
#include "rvtrace/equiv.hpp"
#include "rvtrace/machine.hpp"

namespace rvtrace {

struct ReorderConfig {
  unsigned samples = 1000;
  uint64_t seed = 1;
  unsigned xlen = 64;
  uint64_t start_pc = 0x80000000;
};

// The macro-fusion case study sequences, parameterized over the symbolic
// immediates imm_hi, imm_lo, pc_off, call_off.
inline const char* baseline_sequence_asm() {
  return "lui a0, imm_hi\n"
         "sub t0, t1, t2\n"
         "auipc ra, pc_off\n"
         "addi a0, a0, imm_lo\n"
         "jalr ra, call_off(ra)\n";
}

// lui/addi made adjacent, auipc left in place: semantics-preserving.
inline const char* partial_fused_sequence_asm() {
  return "lui a0, imm_hi\n"
         "addi a0, a0, imm_lo\n"
         "auipc ra, pc_off\n"
         "sub t0, t1, t2\n"
         "jalr ra, call_off(ra)\n";
}

// auipc also moved next to jalr: changes the pc it captures, so the jump
// target differs.
inline const char* full_fused_sequence_asm() {
  return "lui a0, imm_hi\n"
         "addi a0, a0, imm_lo\n"
         "sub t0, t1, t2\n"
         "auipc ra, pc_off\n"
         "jalr ra, call_off(ra)\n";
}

namespace detail {

// Execute a straight-line sequence laid out at start_pc on the given machine.
// Stops after the last instruction or at the first control transfer out of
// the sequence; returns false on trap or fuel exhaustion.
inline bool run_sequence(MachineState& s, const std::vector<Instr>& seq, uint64_t start_pc) {
  s.pc = start_pc;
  uint64_t end_pc = start_pc + 4 * seq.size();
  for (unsigned fuel = 0; fuel < 4 * seq.size() + 16; fuel++) {
    if (s.pc < start_pc || s.pc >= end_pc) return true;  // left the sequence
    const Instr& instr = seq[(s.pc - start_pc) / 4];
    uint64_t epc = s.pc;
    bool pc_written = false;
    Comp<ExecResult> c = exec_instr(instr, s.xlen);
    ExecResult res = ExecResult::success();
    for (;;) {
      Step<ExecResult> st = c.force();
      if (auto* r = std::get_if<RetStep<ExecResult>>(&st)) {
        res = r->value;
        break;
      }
      if (auto* t = std::get_if<TauStep<ExecResult>>(&st)) {
        c = t->next;
        continue;
      }
      auto& v = std::get<VisStep<ExecResult>>(st);
      if (std::holds_alternative<PCWrite>(v.event)) pc_written = true;
      c = v.resume(handle_event(s, v.event));
    }
    if (!res.retired()) return false;
    if (!pc_written) s.pc = (epc + 4) & s.xmask();
  }
  return false;
}

inline bool memories_equal(const MachineState& a, const MachineState& b,
                           const std::vector<uint64_t>& probe_addrs) {
  for (uint64_t addr : probe_addrs) {
    auto ra = a.mem.read(addr, Width::Byte);
    auto rb = b.mem.read(addr, Width::Byte);
    if (ra.is_ok() != rb.is_ok()) return false;
    if (ra.is_ok() && ra.unwrap().value() != rb.unwrap().value()) return false;
  }
  return true;
}

}  // namespace detail

// Translation validation for instruction reorderings: sample symbolic
// immediates and a machine state, run both sequences from equal states, and
// require agreement on the registers the sequences write (a0, t0, ra) plus
// pc and memory.
inline Verdict validate_reorder(const AsmProgram& a, const AsmProgram& b,
                                const ReorderConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  struct Watched {
    unsigned reg;
    const char* name;
  };
  static const Watched watched[] = {{10, "a0"}, {5, "t0"}, {1, "ra"}};

  for (unsigned n = 0; n < cfg.samples; n++) {
    SymEnv env;
    std::vector<std::string> syms = a.symbols;
    for (const auto& s : b.symbols)
      if (std::find(syms.begin(), syms.end(), s) == syms.end()) syms.push_back(s);
    for (const auto& s : syms) {
      if (s == "imm_hi" || s == "pc_off")
        env[s] = int64_t(rng() & 0xFFFFF);
      else if (s == "call_off")
        env[s] = (int64_t(rng() & 0xFFF) - 0x800) & ~int64_t(3);  // keep jump targets aligned
      else if (s == "imm_lo")
        env[s] = int64_t(rng() & 0xFFF) - 0x800;
      else
        env[s] = int64_t(rng() & 0x7FF);  // unknown symbols: small positive
    }
    std::vector<Instr> seq_a, seq_b;
    try {
      seq_a = a.instantiate(env);
      seq_b = b.instantiate(env);
    } catch (const AsmError& e) {
      return {VerdictKind::Undecided, e.what()};
    }

    // state_eq: identical registers and memory on both sides.
    MachineState sa(cfg.xlen);
    for (unsigned r = 1; r < 32; r++) sa.xregs[r] = rng() & sa.xmask();
    std::vector<uint64_t> probe_addrs;
    for (int k = 0; k < 4; k++) {
      uint64_t addr = (rng() % 0x10000) & ~uint64_t(7);
      for (unsigned off = 0; off < 8; off++) probe_addrs.push_back(addr + off);
      sa.mem.write(addr, Width::Double, rng());
    }
    MachineState sb = sa;

    bool ok_a = detail::run_sequence(sa, seq_a, cfg.start_pc);
    bool ok_b = detail::run_sequence(sb, seq_b, cfg.start_pc);
    if (!ok_a || !ok_b)
      return {VerdictKind::Undecided,
              "sample " + std::to_string(n) + ": sequence trapped or did not terminate"};

    for (const auto& w : watched) {
      if (sa.xregs[w.reg] != sb.xregs[w.reg]) {
        char buf[160];
        snprintf(buf, sizeof(buf), "sample %u: %s differs (0x%llx vs 0x%llx)", n, w.name,
                 (unsigned long long)sa.xregs[w.reg], (unsigned long long)sb.xregs[w.reg]);
        return {VerdictKind::Mismatch, buf};
      }
    }
    if (sa.pc != sb.pc) {
      char buf[160];
      snprintf(buf, sizeof(buf), "sample %u: pc differs (0x%llx vs 0x%llx)", n,
               (unsigned long long)sa.pc, (unsigned long long)sb.pc);
      return {VerdictKind::Mismatch, buf};
    }
    if (!detail::memories_equal(sa, sb, probe_addrs))
      return {VerdictKind::Mismatch, "sample " + std::to_string(n) + ": memory differs"};
  }
  return {VerdictKind::Equivalent, ""};
}

inline Verdict validate_reorder_files(const std::string& a_text, const std::string& b_text,
                                      const ReorderConfig& cfg) {
  return validate_reorder(parse_asm(a_text), parse_asm(b_text), cfg);
}

}  // namespace rvtrace
