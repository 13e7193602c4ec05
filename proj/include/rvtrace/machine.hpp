#pragma once

#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rvtrace/exec.hpp"
#include "rvtrace/isa.hpp"
#include "rvtrace/vmem.hpp"

namespace rvtrace {

// ---------------------------------------------------------------------------
// Sparse physical memory (4 KiB pages, little-endian)
// ---------------------------------------------------------------------------

class SparseMemory {
public:
  static constexpr uint64_t kPaddrMask = (uint64_t(1) << 56) - 1;
  static constexpr uint64_t kPageSize = 4096;

  bool mapped(uint64_t addr) const { return pages_.count((addr & kPaddrMask) >> 12) != 0; }

  // Reads fail on unmapped pages; writes allocate.
  Result<BitVec> read(uint64_t addr, Width w) const {
    addr &= kPaddrMask;
    uint64_t v = 0;
    for (unsigned i = 0; i < width_bytes(w); i++) {
      uint64_t a = (addr + i) & kPaddrMask;
      auto it = pages_.find(a >> 12);
      if (it == pages_.end())
        return Result<BitVec>::failure(TrapCause::LoadAccessFault, a);
      v |= uint64_t(it->second[a & (kPageSize - 1)]) << (8 * i);
    }
    return Result<BitVec>::success(BitVec(width_bits(w), v));
  }

  Result<Unit> write(uint64_t addr, Width w, uint64_t data) {
    addr &= kPaddrMask;
    for (unsigned i = 0; i < width_bytes(w); i++) {
      uint64_t a = (addr + i) & kPaddrMask;
      page(a >> 12)[a & (kPageSize - 1)] = uint8_t(data >> (8 * i));
    }
    return Result<Unit>::success(Unit{});
  }

  void write_bytes(uint64_t addr, const uint8_t* data, size_t n) {
    for (size_t i = 0; i < n; i++) {
      uint64_t a = (addr + i) & kPaddrMask;
      page(a >> 12)[a & (kPageSize - 1)] = data[i];
    }
  }

private:
  std::vector<uint8_t>& page(uint64_t pn) {
    auto& p = pages_[pn];
    if (p.empty()) p.resize(kPageSize, 0);
    return p;
  }
  std::unordered_map<uint64_t, std::vector<uint8_t>> pages_;
};

// ---------------------------------------------------------------------------
// CSR file
// ---------------------------------------------------------------------------

namespace csr_addr {
constexpr uint16_t stvec = 0x105;
constexpr uint16_t sscratch = 0x140;
constexpr uint16_t sepc = 0x141;
constexpr uint16_t scause = 0x142;
constexpr uint16_t stval = 0x143;
constexpr uint16_t satp = 0x180;
constexpr uint16_t mstatus = 0x300;
constexpr uint16_t misa = 0x301;
constexpr uint16_t medeleg = 0x302;
constexpr uint16_t mideleg = 0x303;
constexpr uint16_t mie = 0x304;
constexpr uint16_t mtvec = 0x305;
constexpr uint16_t mscratch = 0x340;
constexpr uint16_t mepc = 0x341;
constexpr uint16_t mcause = 0x342;
constexpr uint16_t mtval = 0x343;
constexpr uint16_t mip = 0x344;
constexpr uint16_t mhartid = 0xF14;
}  // namespace csr_addr

namespace mstatus_bits {
constexpr uint64_t SIE = 1u << 1;
constexpr uint64_t MIE = 1u << 3;
constexpr uint64_t SPIE = 1u << 5;
constexpr uint64_t MPIE = 1u << 7;
constexpr uint64_t SPP = 1u << 8;
constexpr uint64_t MPP_SHIFT = 11;
constexpr uint64_t MPP = 3u << 11;
constexpr uint64_t FS = 3u << 13;
constexpr uint64_t SUM = 1u << 18;
constexpr uint64_t MXR = 1u << 19;
constexpr uint64_t kWriteMask = SIE | MIE | SPIE | MPIE | SPP | MPP | FS | SUM | MXR;
}  // namespace mstatus_bits

class CSRFile {
public:
  explicit CSRFile(unsigned xlen = 64) : xlen_(xlen) {}

  bool implemented(uint16_t a) const {
    using namespace csr_addr;
    switch (a) {
      case fflags: case frm: case fcsr:
      case stvec: case sscratch: case sepc: case scause: case stval: case satp:
      case mstatus: case misa: case medeleg: case mideleg: case mie: case mtvec:
      case mscratch: case mepc: case mcause: case mtval: case mip: case mhartid:
        return true;
      default:
        return false;
    }
  }

  Result<BitVec> read(uint16_t a, PrivLevel priv) const {
    if (!implemented(a) || !priv_ok(a, priv))
      return Result<BitVec>::failure(TrapCause::IllegalInstruction);
    return Result<BitVec>::success(BitVec(xlen_, peek(a)));
  }

  Result<Unit> write(uint16_t a, const BitVec& v, PrivLevel priv) {
    if (!implemented(a) || !priv_ok(a, priv) || read_only(a))
      return Result<Unit>::failure(TrapCause::IllegalInstruction);
    poke(a, v.value());
    return Result<Unit>::success(Unit{});
  }

  // Internal access, no privilege checks; used by trap entry and tests.
  uint64_t peek(uint16_t a) const {
    using namespace csr_addr;
    switch (a) {
      case fflags: return fcsr_ & 0x1F;
      case frm: return (fcsr_ >> 5) & 7;
      case fcsr: return fcsr_;
      case misa: return misa_value();
      case mhartid: return 0;
      case mstatus: {
        uint64_t v = get(mstatus);
        if ((v & mstatus_bits::FS) == mstatus_bits::FS) v |= uint64_t(1) << (xlen_ - 1);  // SD
        return v;
      }
      default: return get(a);
    }
  }

  void poke(uint16_t a, uint64_t v) {
    using namespace csr_addr;
    switch (a) {
      case fflags: fcsr_ = (fcsr_ & ~uint64_t(0x1F)) | (v & 0x1F); return;
      case frm: fcsr_ = (fcsr_ & ~uint64_t(0xE0)) | ((v & 7) << 5); return;
      case fcsr: fcsr_ = v & 0xFF; return;
      case misa: return;  // fixed
      case mstatus: {
        uint64_t nv = v & mstatus_bits::kWriteMask;
        if (((nv & mstatus_bits::MPP) >> mstatus_bits::MPP_SHIFT) == 2)
          nv &= ~mstatus_bits::MPP;  // reserved MPP value -> U
        regs_[a] = nv;
        return;
      }
      case mtvec:
      case stvec:
        regs_[a] = v & ~uint64_t(3);  // direct mode only
        return;
      case mepc:
      case sepc:
        regs_[a] = v & ~uint64_t(3);  // IALIGN=32
        return;
      case medeleg:
        regs_[a] = v & (0xFFFF & ~(uint64_t(1) << 11));  // M-ecall not delegatable
        return;
      case mideleg:
        regs_[a] = v & 0x222;
        return;
      case mie:
      case mip:
        regs_[a] = v & 0xAAA;
        return;
      case satp: {
        if (xlen_ == 32) {
          regs_[a] = v & 0xFFFFFFFF;
        } else {
          uint64_t mode = v >> 60;
          if (mode == 0 || mode == 8 || mode == 9 || mode == 10)
            regs_[a] = v & ((uint64_t(15) << 60) | ((uint64_t(1) << 44) - 1));
          // other modes: write ignored (WARL)
        }
        return;
      }
      default:
        regs_[a] = xlen_ == 32 ? (v & 0xFFFFFFFF) : v;
    }
  }

  unsigned xlen() const { return xlen_; }

private:
  static bool read_only(uint16_t a) { return (a >> 10) == 3; }
  static bool priv_ok(uint16_t a, PrivLevel priv) {
    return static_cast<unsigned>(priv) >= ((a >> 8) & 3);
  }
  uint64_t get(uint16_t a) const {
    auto it = regs_.find(a);
    return it == regs_.end() ? 0 : it->second;
  }
  uint64_t misa_value() const {
    uint64_t ext = (1 << 0) | (1 << 5) | (1 << 8) | (1 << 12) | (1 << 18) | (1 << 20);  // AFIMSU
    return ext | (xlen_ == 32 ? uint64_t(1) << 30 : uint64_t(2) << 62);
  }

  unsigned xlen_;
  std::map<uint16_t, uint64_t> regs_;
  uint64_t fcsr_ = 0;
};

// ---------------------------------------------------------------------------
// Machine state and combined handler
// ---------------------------------------------------------------------------

struct Reservation {
  uint64_t addr = 0;
  Width width = Width::Word;
};

struct MachineState {
  explicit MachineState(unsigned xl = 64) : xlen(xl), csrs(xl) {}

  unsigned xlen;
  std::array<uint64_t, 32> xregs{};
  std::array<uint32_t, 32> fregs{};
  uint64_t pc = 0;
  CSRFile csrs;
  PrivLevel priv = PrivLevel::M;
  std::optional<Reservation> reservation;
  SparseMemory mem;

  bool trap_misaligned = false;
  std::optional<uint64_t> tohost_addr;
  std::optional<uint64_t> htif_value;  // set by a store to tohost

  uint64_t xmask() const { return xlen == 32 ? 0xFFFFFFFF : ~uint64_t(0); }
  uint64_t get_gp(unsigned r) const { return r == 0 ? 0 : xregs[r]; }
  void set_gp(unsigned r, uint64_t v) {
    if (r != 0) xregs[r] = v & xmask();
  }

  VmemCtx vmem_ctx() const {
    uint64_t ms = csrs.peek(csr_addr::mstatus);
    return VmemCtx{xlen, BitVec(xlen, csrs.peek(csr_addr::satp)), priv,
                   (ms & mstatus_bits::SUM) != 0, (ms & mstatus_bits::MXR) != 0};
  }
};

// Event sink for tracing; called for every handled event.
using EventSink = std::function<void(const Event&, const Response&)>;

namespace detail {

inline Result<BitVec> phys_read(MachineState& s, uint64_t paddr, Width w) {
  return s.mem.read(paddr, w);
}

inline Result<Unit> phys_write(MachineState& s, uint64_t paddr, Width w, uint64_t data) {
  // Any store overlapping the reservation invalidates it.
  if (s.reservation) {
    uint64_t ra = s.reservation->addr, rn = width_bytes(s.reservation->width);
    if (paddr < ra + rn && ra < paddr + width_bytes(w)) s.reservation.reset();
  }
  Result<Unit> r = s.mem.write(paddr, w, data);
  if (r.is_ok() && s.tohost_addr) {
    uint64_t th = *s.tohost_addr;
    if (paddr <= th && th < paddr + width_bytes(w)) {
      auto v = s.mem.read(th, s.xlen == 32 ? Width::Word : Width::Double);
      if (v.is_ok() && v.unwrap().value() != 0) s.htif_value = v.unwrap().value();
    }
  }
  return r;
}

// Drive a vmem computation, answering its PMem events against sparse memory.
template <class R>
R run_vmem(MachineState& s, Comp<R> c) {
  for (;;) {
    Step<R> st = c.force();
    if (auto* r = std::get_if<RetStep<R>>(&st)) return r->value;
    if (auto* t = std::get_if<TauStep<R>>(&st)) {
      c = t->next;
      continue;
    }
    auto& v = std::get<VisStep<R>>(st);
    if (const auto* pr = std::get_if<PMemRead>(&v.event)) {
      c = v.resume(Response{phys_read(s, pr->paddr.value(), pr->width)});
    } else if (const auto* pw = std::get_if<PMemWrite>(&v.event)) {
      c = v.resume(Response{phys_write(s, pw->paddr.value(), pw->width, pw->data.value())});
    } else {
      throw std::logic_error("run_vmem: unexpected event");
    }
  }
}

}  // namespace detail

// The combined handler: resolves every event family against MachineState.
inline Response handle_event(MachineState& s, const Event& e) {
  struct V {
    MachineState& s;

    Response operator()(const RegRead& x) { return BitVec(s.xlen, s.get_gp(x.r)); }
    Response operator()(const RegWrite& x) {
      s.set_gp(x.r, x.d.value());
      return Unit{};
    }
    Response operator()(const FPRegRead& x) { return BitVec(32, s.fregs[x.r]); }
    Response operator()(const FPRegWrite& x) {
      s.fregs[x.r] = static_cast<uint32_t>(x.d.value());
      return Unit{};
    }
    Response operator()(const PCRead&) { return BitVec(s.xlen, s.pc); }
    Response operator()(const PCWrite& x) {
      s.pc = x.new_pc.value() & s.xmask();
      return Unit{};
    }
    Response operator()(const CSRRead& x) { return s.csrs.read(x.addr, s.priv); }
    Response operator()(const CSRWrite& x) { return s.csrs.write(x.addr, x.val, s.priv); }

    Response operator()(const VMemRead& x) {
      uint64_t addr = (x.vaddr.value() + x.offset.value()) & s.xmask();
      if (s.trap_misaligned && addr % width_bytes(x.width))
        return Result<BitVec>::failure(TrapCause::LoadAddrMisaligned, addr);
      Result<BitVec> r = detail::run_vmem(s, vmem_read_comp(s.vmem_ctx(), addr, x.width));
      if (x.res && r.is_ok()) s.reservation = Reservation{addr, x.width};
      return r;
    }
    Response operator()(const VMemWrite& x) {
      uint64_t addr = (x.vaddr.value() + x.offset.value()) & s.xmask();
      if (s.trap_misaligned && addr % width_bytes(x.width))
        return Result<Unit>::failure(TrapCause::StoreAddrMisaligned, addr);
      if (x.res) {
        bool hit = s.reservation && s.reservation->addr == addr && s.reservation->width == x.width;
        s.reservation.reset();
        if (!hit) return Result<Unit>::failure(TrapCause::ScFailure, addr);
      }
      return detail::run_vmem(s, vmem_write_comp(s.vmem_ctx(), addr, x.width, x.data));
    }
    Response operator()(const VMemInstrFetch& x) {
      Result<BitVec> r = detail::run_vmem(s, vmem_fetch_comp(s.vmem_ctx(), x.addr.value()));
      if (!r.is_ok() && r.trap.cause == TrapCause::LoadAccessFault)
        return Result<BitVec>::failure(TrapCause::InstrAccessFault, r.trap.tval);
      return r;
    }

    Response operator()(const PMemRead& x) {
      return detail::phys_read(s, x.paddr.value(), x.width);
    }
    Response operator()(const PMemWrite& x) {
      return detail::phys_write(s, x.paddr.value(), x.width, x.data.value());
    }
    Response operator()(const MemLoad&) { throw std::logic_error("machine: MemLoad event"); }
    Response operator()(const MemStore&) { throw std::logic_error("machine: MemStore event"); }
  };
  return std::visit(V{s}, e);
}

// ---------------------------------------------------------------------------
// Trap entry / MRET / step loop
// ---------------------------------------------------------------------------

inline void trap_entry(MachineState& s, TrapCause cause, uint64_t tval, uint64_t epc) {
  using namespace csr_addr;
  unsigned code = static_cast<unsigned>(cause);
  s.reservation.reset();
  bool delegated = s.priv != PrivLevel::M && code < 64 &&
                   ((s.csrs.peek(medeleg) >> code) & 1) != 0;
  uint64_t ms = s.csrs.peek(mstatus);
  if (delegated) {
    s.csrs.poke(sepc, epc);
    s.csrs.poke(scause, code);
    s.csrs.poke(stval, tval);
    ms &= ~(mstatus_bits::SPIE | mstatus_bits::SIE | mstatus_bits::SPP);
    if (s.csrs.peek(mstatus) & mstatus_bits::SIE) ms |= mstatus_bits::SPIE;
    if (s.priv == PrivLevel::S) ms |= mstatus_bits::SPP;
    s.csrs.poke(mstatus, ms);
    s.priv = PrivLevel::S;
    s.pc = s.csrs.peek(stvec) & ~uint64_t(3);
  } else {
    s.csrs.poke(mepc, epc);
    s.csrs.poke(mcause, code);
    s.csrs.poke(mtval, tval);
    uint64_t nm = ms & ~(mstatus_bits::MPIE | mstatus_bits::MIE | mstatus_bits::MPP);
    if (ms & mstatus_bits::MIE) nm |= mstatus_bits::MPIE;
    nm |= uint64_t(static_cast<unsigned>(s.priv)) << mstatus_bits::MPP_SHIFT;
    s.csrs.poke(mstatus, nm);
    s.priv = PrivLevel::M;
    s.pc = s.csrs.peek(mtvec) & ~uint64_t(3);
  }
}

inline void do_mret(MachineState& s) {
  using namespace csr_addr;
  uint64_t ms = s.csrs.peek(mstatus);
  unsigned mpp = (ms & mstatus_bits::MPP) >> mstatus_bits::MPP_SHIFT;
  uint64_t nm = ms & ~(mstatus_bits::MIE | mstatus_bits::MPP);
  if (ms & mstatus_bits::MPIE) nm |= mstatus_bits::MIE;
  nm |= mstatus_bits::MPIE;
  s.csrs.poke(mstatus, nm);
  s.priv = static_cast<PrivLevel>(mpp);
  s.pc = s.csrs.peek(mepc);
}

enum class StepKind : uint8_t { Retired, Trapped, Wfi };

struct StepOutcome {
  StepKind kind = StepKind::Retired;
  TrapCause cause = TrapCause::IllegalInstruction;  // meaningful when Trapped
};

inline TrapCause ecall_cause(PrivLevel p) {
  switch (p) {
    case PrivLevel::U: return TrapCause::EcallFromU;
    case PrivLevel::S: return TrapCause::EcallFromS;
    case PrivLevel::M: return TrapCause::EcallFromM;
  }
  return TrapCause::EcallFromU;
}

// One fetch-decode-execute step. Every event goes through handle_event; the
// sink (when set) observes the full event stream.
inline StepOutcome step(MachineState& s, const EventSink& sink = nullptr) {
  auto dispatch = [&](const Event& e) -> Response {
    Response r = handle_event(s, e);
    if (sink) sink(e, r);
    return r;
  };

  uint64_t epc = std::get<BitVec>(dispatch(PCRead{})).value();
  Response fr = dispatch(VMemInstrFetch{BitVec(s.xlen, epc)});
  const auto& fetched = std::get<Result<BitVec>>(fr);
  if (!fetched.is_ok()) {
    trap_entry(s, fetched.trap.cause, fetched.trap.tval, epc);
    return {StepKind::Trapped, fetched.trap.cause};
  }
  uint32_t raw = static_cast<uint32_t>(fetched.unwrap().value());
  Instr instr = decode(raw, s.xlen);

  if (std::holds_alternative<Mret>(instr)) {
    if (s.priv != PrivLevel::M) {
      trap_entry(s, TrapCause::IllegalInstruction, raw, epc);
      return {StepKind::Trapped, TrapCause::IllegalInstruction};
    }
    do_mret(s);
    return {StepKind::Retired};
  }
  if (std::holds_alternative<Wfi>(instr)) {
    s.pc = (epc + 4) & s.xmask();
    return {StepKind::Wfi};
  }

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
    c = v.resume(dispatch(v.event));
  }

  if (res.retired()) {
    if (!pc_written) s.pc = (epc + 4) & s.xmask();
    return {StepKind::Retired};
  }
  Trap t = *res.trap;
  if (t.cause == TrapCause::EcallFromU) t.cause = ecall_cause(s.priv);
  if (t.cause == TrapCause::Breakpoint) t.tval = epc;
  trap_entry(s, t.cause, t.tval, epc);
  return {StepKind::Trapped, t.cause};
}

enum class RunKind : uint8_t { HtifExit, OutOfFuel, Wfi };

struct RunOutcome {
  RunKind kind = RunKind::OutOfFuel;
  uint64_t htif = 0;   // raw tohost value when HtifExit
  uint64_t steps = 0;
};

// riscv-tests HTIF convention: tohost=1 means pass; 2k+1 means case k failed.
inline RunOutcome run(MachineState& s, uint64_t fuel, const EventSink& sink = nullptr) {
  RunOutcome out;
  for (uint64_t i = 0; i < fuel; i++) {
    StepOutcome so = step(s, sink);
    out.steps = i + 1;
    if (s.htif_value) return {RunKind::HtifExit, *s.htif_value, out.steps};
    if (so.kind == StepKind::Wfi) return {RunKind::Wfi, 0, out.steps};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Net-effect summaries (single-move advancement for the checkers)
// ---------------------------------------------------------------------------

struct MemAccess {
  bool is_store = false;
  uint64_t addr = 0;
  Width width = Width::Word;
  uint64_t data = 0;  // store data
};

struct NetEffect {
  std::vector<std::pair<unsigned, uint64_t>> reg_writes;
  uint64_t new_pc = 0;
  std::optional<MemAccess> mem;
  std::optional<Trap> trap;
};

// Closed-form per-instruction state update for the base-I subset used by the
// equivalence checkers; agrees with step() (property-tested). Memory reads
// resolve against physical memory directly (bare translation assumed).
inline NetEffect step_lemma_table(const Instr& instr, const MachineState& s) {
  NetEffect eff;
  unsigned xlen = s.xlen;
  uint64_t pc = s.pc;
  eff.new_pc = (pc + 4) & s.xmask();
  auto reg = [&](unsigned r) { return BitVec(xlen, s.get_gp(r)); };

  if (const auto* i = std::get_if<Itype>(&instr)) {
    eff.reg_writes.push_back({i->rd, itype_value(i->op, reg(i->rs1), i->imm, xlen).value()});
  } else if (const auto* i = std::get_if<Rtype>(&instr)) {
    eff.reg_writes.push_back({i->rd, rtype_value(i->op, reg(i->rs1), reg(i->rs2)).value()});
  } else if (const auto* i = std::get_if<Utype>(&instr)) {
    BitVec v = sign_extend(xlen, bv_concat(i->imm, BitVec(12, 0)));
    uint64_t val = i->op == UtypeOp::LUI ? v.value() : bv_add(BitVec(xlen, pc), v).value();
    eff.reg_writes.push_back({i->rd, val});
  } else if (const auto* i = std::get_if<Jal>(&instr)) {
    uint64_t target = bv_add(BitVec(xlen, pc), sign_extend(xlen, i->imm)).value();
    if (target & 3) {
      eff.trap = Trap{TrapCause::InstrAddrMisaligned, target};
    } else {
      eff.reg_writes.push_back({i->rd, (pc + 4) & s.xmask()});
      eff.new_pc = target;
    }
  } else if (const auto* i = std::get_if<Jalr>(&instr)) {
    uint64_t target =
        (bv_add(reg(i->rs1), sign_extend(xlen, i->imm)).value() & ~uint64_t(1)) & s.xmask();
    if (target & 3) {
      eff.trap = Trap{TrapCause::InstrAddrMisaligned, target};
    } else {
      eff.reg_writes.push_back({i->rd, (pc + 4) & s.xmask()});
      eff.new_pc = target;
    }
  } else if (const auto* i = std::get_if<Btype>(&instr)) {
    BitVec a = reg(i->rs1), b = reg(i->rs2);
    bool taken = false;
    switch (i->op) {
      case BtypeOp::BEQ: taken = a == b; break;
      case BtypeOp::BNE: taken = a != b; break;
      case BtypeOp::BLT: taken = a.signed_value() < b.signed_value(); break;
      case BtypeOp::BGE: taken = a.signed_value() >= b.signed_value(); break;
      case BtypeOp::BLTU: taken = a.value() < b.value(); break;
      case BtypeOp::BGEU: taken = a.value() >= b.value(); break;
    }
    if (taken) {
      uint64_t target = bv_add(BitVec(xlen, pc), sign_extend(xlen, i->imm)).value();
      if (target & 3)
        eff.trap = Trap{TrapCause::InstrAddrMisaligned, target};
      else
        eff.new_pc = target;
    }
  } else if (const auto* i = std::get_if<Load>(&instr)) {
    uint64_t addr = bv_add(reg(i->rs1), sign_extend(xlen, i->imm)).value();
    eff.mem = MemAccess{false, addr, i->width, 0};
    Result<BitVec> r = s.mem.read(addr, i->width);
    if (!r.is_ok()) {
      eff.trap = r.trap;
      eff.mem.reset();
    } else {
      BitVec data = r.unwrap();
      uint64_t v = i->is_unsigned ? zero_extend(xlen, data).value()
                                  : sign_extend(xlen, data).value();
      eff.reg_writes.push_back({i->rd, v});
    }
  } else if (const auto* i = std::get_if<Store>(&instr)) {
    uint64_t addr = bv_add(reg(i->rs1), sign_extend(xlen, i->imm)).value();
    eff.mem = MemAccess{true, addr, i->width, s.get_gp(i->rs2)};
  } else if (std::holds_alternative<Fence>(instr) || std::holds_alternative<FenceI>(instr)) {
    // no effect beyond pc
  } else {
    throw std::logic_error("step_lemma_table: instruction outside the summarised subset");
  }
  if (eff.trap) {
    eff.reg_writes.clear();
    eff.mem.reset();
  }
  return eff;
}

// Apply a NetEffect to a state (trap entry mirrors step()).
inline void apply_net_effect(MachineState& s, const NetEffect& eff) {
  if (eff.trap) {
    trap_entry(s, eff.trap->cause, eff.trap->tval, s.pc);
    return;
  }
  if (eff.mem && eff.mem->is_store)
    s.mem.write(eff.mem->addr, eff.mem->width, eff.mem->data);
  for (auto& [r, v] : eff.reg_writes) s.set_gp(r, v);
  s.pc = eff.new_pc;
}

}  // namespace rvtrace
