#pragma once

#include <map>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "rvtrace/equiv.hpp"
#include "rvtrace/exec.hpp"

namespace rvtrace {

// Straight-line micro-IR over named locals. Locals are interpreted away;
// only MemLoad/MemStore remain observable.

struct IRConst {
  std::string dst;
  uint64_t value;
};
struct IRBinOp {
  std::string dst;
  char op;  // '+', '-', '*'
  std::string a, b;
};
struct IRGetElemPtr {
  std::string dst;
  std::string base, idx;
  uint64_t scale;
};
struct IRLoad {
  std::string dst;
  std::string addr;
};
struct IRStore {
  std::string addr, val;
};

using IROp = std::variant<IRConst, IRBinOp, IRGetElemPtr, IRLoad, IRStore>;
using IRProgram = std::vector<IROp>;
using IREnv = std::map<std::string, uint64_t>;

namespace detail {

inline uint64_t ir_lookup(const IREnv& env, const std::string& n) {
  auto it = env.find(n);
  if (it == env.end()) throw std::logic_error("micro-IR: unbound local " + n);
  return it->second;
}

inline Comp<IREnv> interp_ir_from(IRProgram prog, size_t i, IREnv env) {
  if (i == prog.size()) return ret(env);
  const IROp& op = prog[i];
  if (const auto* c = std::get_if<IRConst>(&op)) {
    env[c->dst] = c->value;
    return tau(interp_ir_from(prog, i + 1, std::move(env)));
  }
  if (const auto* b = std::get_if<IRBinOp>(&op)) {
    uint64_t x = ir_lookup(env, b->a), y = ir_lookup(env, b->b);
    uint64_t v = b->op == '+' ? x + y : b->op == '-' ? x - y : x * y;
    env[b->dst] = v;
    return tau(interp_ir_from(prog, i + 1, std::move(env)));
  }
  if (const auto* g = std::get_if<IRGetElemPtr>(&op)) {
    env[g->dst] = ir_lookup(env, g->base) + ir_lookup(env, g->idx) * g->scale;
    return tau(interp_ir_from(prog, i + 1, std::move(env)));
  }
  if (const auto* l = std::get_if<IRLoad>(&op)) {
    uint64_t addr = ir_lookup(env, l->addr);
    std::string dst = l->dst;
    return bind<IREnv>(trigger_word(MemLoad{addr}), [prog, i, env, dst](const BitVec& v) mutable {
      env[dst] = v.value();
      return interp_ir_from(prog, i + 1, std::move(env));
    });
  }
  const auto& s = std::get<IRStore>(op);
  uint64_t addr = ir_lookup(env, s.addr);
  uint64_t val = ir_lookup(env, s.val);
  return bind<IREnv>(trigger_unit(MemStore{addr, val}),
                     [prog, i, env](Unit) { return interp_ir_from(prog, i + 1, env); });
}

}  // namespace detail

// Interpret locals away, yielding a computation over memory events only.
inline Comp<IREnv> interp_ir(const IRProgram& prog, IREnv init) {
  return detail::interp_ir_from(prog, 0, std::move(init));
}

// The built-in array-load program:  p = base + 4*idx;  v1 = load p
inline IRProgram ir_array_load() {
  return {IRGetElemPtr{"p", "base", "idx", 4}, IRLoad{"v1", "p"}};
}

// ---------------------------------------------------------------------------
// Cross-level check: micro-IR array load vs slli/add/lw
// ---------------------------------------------------------------------------

// Interpret register/pc events of an exec computation internally, leaving
// memory events observable.
struct RegPcState {
  std::array<uint64_t, 32> regs{};
  uint64_t pc = 0;
  unsigned xlen = 32;

  uint64_t mask() const { return xlen == 32 ? 0xFFFFFFFF : ~uint64_t(0); }
  bool operator==(const RegPcState&) const = default;
};

inline PartialHandler<RegPcState> regpc_handler() {
  return [](const Event& e, RegPcState& s) -> std::optional<Response> {
    if (const auto* r = std::get_if<RegRead>(&e))
      return Response{BitVec(s.xlen, r->r == 0 ? 0 : s.regs[r->r])};
    if (const auto* w = std::get_if<RegWrite>(&e)) {
      if (w->r != 0) s.regs[w->r] = w->d.value() & s.mask();
      return Response{Unit{}};
    }
    if (std::holds_alternative<PCRead>(e)) return Response{BitVec(s.xlen, s.pc)};
    if (const auto* w = std::get_if<PCWrite>(&e)) {
      s.pc = w->new_pc.value() & s.mask();
      return Response{Unit{}};
    }
    return std::nullopt;
  };
}

// Sequence a straight-line instruction list, threading pc += 4 between
// instructions; traps abort with the failing result.
inline Comp<ExecResult> exec_sequence(std::vector<Instr> prog, size_t i, unsigned xlen) {
  if (i == prog.size()) return ret(ExecResult::success());
  return bind<ExecResult>(exec_instr(prog[i], xlen), [prog, i, xlen](const ExecResult& r) {
    if (!r.retired()) return ret(r);
    return exec_sequence(prog, i + 1, xlen);
  });
}

struct CrosslevelConfig {
  unsigned samples = 1000;
  uint64_t seed = 1;
  bool mutant_lh = false;  // negative control: lw replaced by lh
};

// The RISC-V side of Fig-3-style array load: slli t0,a1,2; add t0,a0,t0; lw a2,0(t0)
inline std::vector<Instr> riscv_array_load(bool mutant_lh) {
  std::vector<Instr> prog;
  prog.push_back(Itype{BitVec(12, 2), 11, 5, ItypeOp::SLLI});      // slli t0, a1, 2
  prog.push_back(Rtype{10, 5, 5, RtypeOp::ADD});                   // add t0, a0, t0
  prog.push_back(Load{BitVec(12, 0), 5, 12, false,
                      mutant_lh ? Width::Half : Width::Word});     // lw a2, 0(t0)
  return prog;
}

inline Verdict check_crosslevel(const CrosslevelConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  const unsigned xlen = 32;
  for (unsigned n = 0; n < cfg.samples; n++) {
    // init_rel: micro-IR base/idx equal a0/a1; no_overflow: base + 4*idx + 4
    // stays within the 32-bit address space (violating draws are resampled).
    uint64_t base, idx;
    do {
      base = rng() & 0xFFFFFFFC;
      idx = rng() & 0xFFFF;
    } while (base + 4 * idx + 4 > 0xFFFFFFFF);
    uint32_t stored = uint32_t(rng());

    IREnv init{{"base", base}, {"idx", idx}};
    Comp<IREnv> ir = interp_ir(ir_array_load(), init);

    RegPcState st;
    st.xlen = xlen;
    for (unsigned r = 1; r < 32; r++) st.regs[r] = rng() & 0xFFFFFFFF;
    st.regs[10] = base;
    st.regs[11] = idx;
    st.pc = 0x1000;
    Comp<std::pair<RegPcState, ExecResult>> isa =
        interp_state<ExecResult, RegPcState>(regpc_handler(),
                                             exec_sequence(riscv_array_load(cfg.mutant_lh), 0, xlen),
                                             st);

    // Shared memory model: one cell at the computed address.
    uint64_t the_addr = base + 4 * idx;
    ResponseOracle env1 = [&](const Event& e) -> Response {
      const auto* l = std::get_if<MemLoad>(&e);
      if (!l) throw std::logic_error("crosslevel: unexpected micro-IR event");
      return BitVec(32, l->addr == the_addr ? stored : uint32_t(0xDEAD));
    };
    ResponseOracle env2 = [&](const Event& e) -> Response {
      const auto* v = std::get_if<VMemRead>(&e);
      if (!v) throw std::logic_error("crosslevel: unexpected ISA event");
      uint64_t a = (v->vaddr.value() + v->offset.value()) & 0xFFFFFFFF;
      return Result<BitVec>::success(
          BitVec(xlen, a == the_addr ? stored : uint32_t(0xDEAD)));
    };

    RuttConfig<IREnv, std::pair<RegPcState, ExecResult>> rcfg;
    rcfg.event_relation = [](const Event& e1, const Event& e2) {
      const auto* l = std::get_if<MemLoad>(&e1);
      const auto* v = std::get_if<VMemRead>(&e2);
      if (!l || !v) return false;
      return l->addr == ((v->vaddr.value() + v->offset.value()) & 0xFFFFFFFF) &&
             v->width == Width::Word && !v->res;
    };
    rcfg.response_relation = [](const Event&, const Response& r1, const Event&,
                                const Response& r2) {
      const auto* a = std::get_if<BitVec>(&r1);
      const auto* b = std::get_if<Result<BitVec>>(&r2);
      if (!a || !b || !b->is_ok()) return false;
      return (a->value() & 0xFFFFFFFF) == (b->unwrap().value() & 0xFFFFFFFF);
    };
    rcfg.result_relation = [](const IREnv& env, const std::pair<RegPcState, ExecResult>& out) {
      // final_rel: v1 == a2
      auto it = env.find("v1");
      return it != env.end() && out.second.retired() &&
             (it->second & 0xFFFFFFFF) == out.first.regs[12];
    };
    Verdict v = check_rutt(ir, isa, env1, env2, rcfg);
    if (!v.equivalent()) {
      v.evidence = "sample " + std::to_string(n) + " (base=" + std::to_string(base) +
                   ", idx=" + std::to_string(idx) + "): " + v.evidence;
      return v;
    }
  }
  return {VerdictKind::Equivalent, ""};
}

}  // namespace rvtrace
