#pragma once

#include "rvtrace/bitvec.hpp"
#include "rvtrace/effects.hpp"

namespace rvtrace {

enum class PrivLevel : uint8_t { U = 0, S = 1, M = 3 };

enum class TranslationMode : uint8_t { Bare, Sv32, Sv39, Sv48, Sv57 };

inline unsigned walk_levels(TranslationMode m) {
  switch (m) {
    case TranslationMode::Sv32: return 2;
    case TranslationMode::Sv39: return 3;
    case TranslationMode::Sv48: return 4;
    case TranslationMode::Sv57: return 5;
    default: return 0;
  }
}
inline unsigned pte_bytes(TranslationMode m) { return m == TranslationMode::Sv32 ? 4 : 8; }
inline unsigned vpn_field_bits(TranslationMode m) { return m == TranslationMode::Sv32 ? 10 : 9; }
inline unsigned va_bits(TranslationMode m) {
  switch (m) {
    case TranslationMode::Sv32: return 32;
    case TranslationMode::Sv39: return 39;
    case TranslationMode::Sv48: return 48;
    case TranslationMode::Sv57: return 57;
    default: return 0;
  }
}
inline const char* translation_mode_name(TranslationMode m) {
  switch (m) {
    case TranslationMode::Bare: return "Bare";
    case TranslationMode::Sv32: return "Sv32";
    case TranslationMode::Sv39: return "Sv39";
    case TranslationMode::Sv48: return "Sv48";
    case TranslationMode::Sv57: return "Sv57";
  }
  return "?";
}

struct SatpInfo {
  TranslationMode mode = TranslationMode::Bare;
  uint64_t root_ppn = 0;
};

inline SatpInfo decode_satp(const BitVec& satp, unsigned xlen) {
  if (xlen == 32) {
    bool on = (satp.value() >> 31) & 1;
    return {on ? TranslationMode::Sv32 : TranslationMode::Bare, satp.value() & 0x3FFFFF};
  }
  uint64_t mode = satp.value() >> 60;
  uint64_t ppn = satp.value() & ((uint64_t(1) << 44) - 1);
  switch (mode) {
    case 8: return {TranslationMode::Sv39, ppn};
    case 9: return {TranslationMode::Sv48, ppn};
    case 10: return {TranslationMode::Sv57, ppn};
    default: return {TranslationMode::Bare, ppn};
  }
}

enum class AccessType : uint8_t { Read, Write, Fetch };

inline TrapCause page_fault_cause(AccessType a) {
  switch (a) {
    case AccessType::Fetch: return TrapCause::InstrPageFault;
    case AccessType::Read: return TrapCause::LoadPageFault;
    case AccessType::Write: return TrapCause::StorePageFault;
  }
  return TrapCause::LoadPageFault;
}

struct Pte {
  uint64_t raw = 0;
  bool v = false, r = false, w = false, x = false, u = false, g = false, a = false, d = false;
  uint64_t ppn_all = 0;  // concatenated PPN fields

  static Pte decode(uint64_t raw, TranslationMode m) {
    Pte p;
    p.raw = raw;
    p.v = raw & 1;
    p.r = raw >> 1 & 1;
    p.w = raw >> 2 & 1;
    p.x = raw >> 3 & 1;
    p.u = raw >> 4 & 1;
    p.g = raw >> 5 & 1;
    p.a = raw >> 6 & 1;
    p.d = raw >> 7 & 1;
    if (m == TranslationMode::Sv32)
      p.ppn_all = (raw >> 10) & 0x3FFFFF;  // 22 bits
    else
      p.ppn_all = (raw >> 10) & ((uint64_t(1) << 44) - 1);  // 44 bits
    return p;
  }

  bool leaf() const { return r || x; }
  bool malformed() const { return !v || (w && !r); }
  // PPN field i (counting from the low end), each vpn_field_bits wide.
  uint64_t ppn_field(unsigned i, TranslationMode m) const {
    unsigned b = vpn_field_bits(m);
    return (ppn_all >> (b * i)) & ((uint64_t(1) << b) - 1);
  }
};

struct WalkCtx {
  TranslationMode mode = TranslationMode::Bare;
  uint64_t root_ppn = 0;
  AccessType acc = AccessType::Read;
  PrivLevel priv = PrivLevel::U;
  bool sum = false;
  bool mxr = false;
};

// Leaf permission check shared by the walker and the reference oracle in tests.
inline bool pte_permits(const Pte& p, AccessType acc, PrivLevel priv, bool sum, bool mxr) {
  switch (acc) {
    case AccessType::Fetch:
      if (!p.x) return false;
      break;
    case AccessType::Read:
      if (!p.r && !(mxr && p.x)) return false;
      break;
    case AccessType::Write:
      if (!p.w) return false;
      break;
  }
  if (priv == PrivLevel::U && !p.u) return false;
  // S-mode touches U pages only with SUM, and never executes from them.
  if (priv == PrivLevel::S && p.u && (acc == AccessType::Fetch || !sum)) return false;
  if (!p.a || (acc == AccessType::Write && !p.d)) return false;  // trap-on-clear A/D policy
  return true;
}

namespace detail {

inline Comp<Result<uint64_t>> walk_level(WalkCtx ctx, uint64_t vaddr, uint64_t base_ppn,
                                         unsigned level) {
  unsigned vb = vpn_field_bits(ctx.mode);
  Width pw = pte_bytes(ctx.mode) == 4 ? Width::Word : Width::Double;
  // Captured by value: the continuation runs after this frame is gone.
  auto fault = [ctx, vaddr]() -> Comp<Result<uint64_t>> {
    return ret(Result<uint64_t>::failure(page_fault_cause(ctx.acc), vaddr));
  };
  uint64_t vpn = (vaddr >> (12 + vb * level)) & ((uint64_t(1) << vb) - 1);
  uint64_t pte_addr = base_ppn * 4096 + vpn * pte_bytes(ctx.mode);
  return bind<Result<uint64_t>>(
      trigger_result_word(PMemRead{BitVec(64, pte_addr), pw}),
      [=](const Result<BitVec>& rr) -> Comp<Result<uint64_t>> {
        if (!rr.is_ok()) return fault();
        Pte pte = Pte::decode(rr.unwrap().value(), ctx.mode);
        if (pte.malformed()) return fault();
        if (!pte.leaf()) {
          if (level == 0) return fault();
          return walk_level(ctx, vaddr, pte.ppn_all, level - 1);
        }
        if (!pte_permits(pte, ctx.acc, ctx.priv, ctx.sum, ctx.mxr)) return fault();
        for (unsigned i = 0; i < level; i++)
          if (pte.ppn_field(i, ctx.mode) != 0) return fault();  // misaligned superpage
        uint64_t off_bits = 12 + vb * level;
        uint64_t pa = (pte.ppn_all << 12) | (vaddr & ((uint64_t(1) << off_bits) - 1));
        return ret(Result<uint64_t>::success(pa));
      });
}

}  // namespace detail

// Page-table walk as a computation over physical-memory events. Emits one
// PMemRead per visited level (at most `levels`).
inline Comp<Result<uint64_t>> walk_comp(const WalkCtx& ctx, uint64_t vaddr) {
  unsigned vbits = va_bits(ctx.mode);
  if (ctx.mode != TranslationMode::Sv32 && vbits < 64) {
    // vaddr must be canonical: bits above va_bits replicate bit va_bits-1.
    uint64_t hi = static_cast<uint64_t>(static_cast<int64_t>(vaddr << (64 - vbits)) >> (64 - vbits));
    if (hi != vaddr) return ret(Result<uint64_t>::failure(page_fault_cause(ctx.acc), vaddr));
  }
  uint64_t va = ctx.mode == TranslationMode::Sv32 ? (vaddr & 0xFFFFFFFF) : vaddr;
  return detail::walk_level(ctx, va, ctx.root_ppn, walk_levels(ctx.mode) - 1);
}

// Pure walk over a physical-memory oracle; drives walk_comp.
using PhysReadFn = std::function<Result<BitVec>(uint64_t paddr, Width w)>;

inline Result<uint64_t> pt_walk(const WalkCtx& ctx, uint64_t vaddr, const PhysReadFn& mem) {
  Comp<Result<uint64_t>> c = walk_comp(ctx, vaddr);
  for (unsigned fuel = 0; fuel < 1000; fuel++) {
    Step<Result<uint64_t>> s = c.force();
    if (auto* r = std::get_if<RetStep<Result<uint64_t>>>(&s)) return r->value;
    if (auto* t = std::get_if<TauStep<Result<uint64_t>>>(&s)) {
      c = t->next;
      continue;
    }
    auto& v = std::get<VisStep<Result<uint64_t>>>(s);
    const auto* pr = std::get_if<PMemRead>(&v.event);
    if (!pr) throw std::logic_error("pt_walk: unexpected event kind");
    c = v.resume(Response{mem(pr->paddr.value(), pr->width)});
  }
  throw std::logic_error("pt_walk: walk did not terminate");
}

// ---------------------------------------------------------------------------
// VMem -> PMem handler
// ---------------------------------------------------------------------------

struct VmemCtx {
  unsigned xlen = 64;
  BitVec satp{64, 0};
  PrivLevel priv = PrivLevel::M;
  bool sum = false;
  bool mxr = false;
};

// Translation is active only below M-mode with a non-Bare satp.
inline Comp<Result<uint64_t>> translate_comp(const VmemCtx& ctx, uint64_t vaddr, AccessType acc) {
  SatpInfo satp = decode_satp(ctx.satp, ctx.xlen);
  if (ctx.priv == PrivLevel::M || satp.mode == TranslationMode::Bare)
    return ret(Result<uint64_t>::success(vaddr));
  WalkCtx w{satp.mode, satp.root_ppn, acc, ctx.priv, ctx.sum, ctx.mxr};
  return walk_comp(w, vaddr);
}

namespace detail {

// Assemble a possibly page-crossing read from per-byte physical accesses.
inline Comp<Result<BitVec>> pmem_read_bytes(unsigned xlen, uint64_t pa0, uint64_t pa1,
                                            uint64_t split, unsigned nbytes, unsigned idx,
                                            uint64_t acc) {
  if (idx == nbytes) return ret(Result<BitVec>::success(BitVec(xlen, acc)));
  uint64_t pa = idx < split ? pa0 + idx : pa1 + (idx - split);
  return bind<Result<BitVec>>(trigger_result_word(PMemRead{BitVec(64, pa), Width::Byte}),
                              [=](const Result<BitVec>& r) -> Comp<Result<BitVec>> {
                                if (!r.is_ok()) return ret(Result<BitVec>::failure(r.trap));
                                uint64_t acc2 = acc | ((r.unwrap().value() & 0xFF) << (8 * idx));
                                return pmem_read_bytes(xlen, pa0, pa1, split, nbytes, idx + 1, acc2);
                              });
}

inline Comp<Result<Unit>> pmem_write_bytes(uint64_t pa0, uint64_t pa1, uint64_t split,
                                           unsigned nbytes, unsigned idx, uint64_t data) {
  if (idx == nbytes) return ret(Result<Unit>::success(Unit{}));
  uint64_t pa = idx < split ? pa0 + idx : pa1 + (idx - split);
  BitVec byte(8, (data >> (8 * idx)) & 0xFF);
  return bind<Result<Unit>>(
      trigger_result_unit(PMemWrite{BitVec(64, pa), Width::Byte, zero_extend(8, byte)}),
      [=](const Result<Unit>& r) -> Comp<Result<Unit>> {
        if (!r.is_ok()) return ret(Result<Unit>::failure(r.trap));
        return pmem_write_bytes(pa0, pa1, split, nbytes, idx + 1, data);
      });
}

}  // namespace detail

// VMemRead: translate, then physical access; data zero-extended to XLEN.
// An access crossing a page boundary translates both pages and is performed
// bytewise; otherwise a single physical access of the full width is emitted.
inline Comp<Result<BitVec>> vmem_read_comp(const VmemCtx& ctx, uint64_t vaddr, Width w) {
  unsigned xlen = ctx.xlen;
  unsigned nbytes = width_bytes(w);
  uint64_t mask = xlen == 32 ? 0xFFFFFFFF : ~uint64_t(0);
  uint64_t addr = vaddr & mask;
  uint64_t last = (addr + nbytes - 1) & mask;
  bool crosses = (addr >> 12) != (last >> 12);
  return bind<Result<BitVec>>(
      translate_comp(ctx, addr, AccessType::Read),
      [=](const Result<uint64_t>& t0) -> Comp<Result<BitVec>> {
        if (!t0.is_ok()) return ret(Result<BitVec>::failure(t0.trap));
        uint64_t pa0 = t0.unwrap();
        if (!crosses) {
          return bind<Result<BitVec>>(trigger_result_word(PMemRead{BitVec(64, pa0), w}),
                                      [=](const Result<BitVec>& r) -> Comp<Result<BitVec>> {
                                        if (!r.is_ok()) return ret(Result<BitVec>::failure(r.trap));
                                        return ret(Result<BitVec>::success(
                                            zero_extend(xlen, bv_extract(0, width_bits(w), r.unwrap()))));
                                      });
        }
        uint64_t page2 = (addr & ~uint64_t(0xFFF)) + 0x1000;
        uint64_t split = page2 - addr;
        return bind<Result<BitVec>>(
            translate_comp(ctx, page2 & mask, AccessType::Read),
            [=](const Result<uint64_t>& t1) -> Comp<Result<BitVec>> {
              if (!t1.is_ok()) return ret(Result<BitVec>::failure(t1.trap));
              return detail::pmem_read_bytes(xlen, pa0, t1.unwrap(), split, nbytes, 0, 0);
            });
      });
}

inline Comp<Result<Unit>> vmem_write_comp(const VmemCtx& ctx, uint64_t vaddr, Width w,
                                          const BitVec& data) {
  unsigned nbytes = width_bytes(w);
  uint64_t mask = ctx.xlen == 32 ? 0xFFFFFFFF : ~uint64_t(0);
  uint64_t addr = vaddr & mask;
  uint64_t last = (addr + nbytes - 1) & mask;
  bool crosses = (addr >> 12) != (last >> 12);
  uint64_t raw = data.value();
  return bind<Result<Unit>>(
      translate_comp(ctx, addr, AccessType::Write),
      [=](const Result<uint64_t>& t0) -> Comp<Result<Unit>> {
        if (!t0.is_ok()) return ret(Result<Unit>::failure(t0.trap));
        uint64_t pa0 = t0.unwrap();
        if (!crosses) {
          BitVec chunk = zero_extend(64, BitVec(width_bits(w), raw));
          return bind<Result<Unit>>(
              trigger_result_unit(PMemWrite{BitVec(64, pa0), w, chunk}),
              [](const Result<Unit>& r) { return ret(r); });
        }
        uint64_t page2 = (addr & ~uint64_t(0xFFF)) + 0x1000;
        uint64_t split = page2 - addr;
        return bind<Result<Unit>>(
            translate_comp(ctx, page2 & mask, AccessType::Write),
            [=](const Result<uint64_t>& t1) -> Comp<Result<Unit>> {
              if (!t1.is_ok()) return ret(Result<Unit>::failure(t1.trap));
              return detail::pmem_write_bytes(pa0, t1.unwrap(), split, nbytes, 0, raw);
            });
      });
}

// Instruction fetch: execute-permission walk, then a 32-bit read. The fetch
// address is 4-aligned (branch targets trap otherwise), so it never crosses
// a page boundary.
inline Comp<Result<BitVec>> vmem_fetch_comp(const VmemCtx& ctx, uint64_t vaddr) {
  unsigned xlen = ctx.xlen;
  uint64_t mask = xlen == 32 ? 0xFFFFFFFF : ~uint64_t(0);
  return bind<Result<BitVec>>(
      translate_comp(ctx, vaddr & mask, AccessType::Fetch),
      [=](const Result<uint64_t>& t0) -> Comp<Result<BitVec>> {
        if (!t0.is_ok()) return ret(Result<BitVec>::failure(t0.trap));
        return bind<Result<BitVec>>(
            trigger_result_word(PMemRead{BitVec(64, t0.unwrap()), Width::Word}),
            [=](const Result<BitVec>& r) -> Comp<Result<BitVec>> {
              if (!r.is_ok()) return ret(Result<BitVec>::failure(r.trap));
              return ret(Result<BitVec>::success(zero_extend(xlen, bv_extract(0, 32, r.unwrap()))));
            });
      });
}

}  // namespace rvtrace
