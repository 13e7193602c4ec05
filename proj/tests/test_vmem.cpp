#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <vector>

#include "rvtrace/vmem.hpp"

// The walker is validated against an independent iterative reference written
// directly from the translation algorithm, over randomized page tables that
// mix pointers, leaves at every level, and every fault class.

using namespace rvtrace;

namespace {

std::mt19937_64 rng(0x57a9e5);

// Physical memory for page tables: pte_addr -> raw PTE. Reads elsewhere fail.
using PteMem = std::map<uint64_t, uint64_t>;

constexpr uint64_t kArenaBase = 100;  // ppns 100..107 hold page-table pages
constexpr unsigned kArenaPages = 8;

struct RefOutcome {
  bool ok = false;
  uint64_t pa = 0;
  unsigned reads = 0;   // PTE fetches performed
  int leaf_level = -1;  // level at which a leaf decided the outcome
};

// Independent reference: iterative, plain bit arithmetic, no Pte/WalkCtx use.
RefOutcome ref_walk(TranslationMode mode, uint64_t root_ppn, AccessType acc, PrivLevel priv,
                    bool sum, bool mxr, uint64_t vaddr, const PteMem& mem) {
  RefOutcome out;
  unsigned levels = walk_levels(mode);
  unsigned vb = vpn_field_bits(mode);
  unsigned psize = pte_bytes(mode);

  if (mode != TranslationMode::Sv32) {
    unsigned vbits = va_bits(mode);
    int64_t svaddr = int64_t(vaddr << (64 - vbits)) >> (64 - vbits);
    if (uint64_t(svaddr) != vaddr) return out;  // non-canonical: 0 reads
  } else {
    vaddr &= 0xFFFFFFFF;
  }

  uint64_t base = root_ppn * 4096;
  for (int i = int(levels) - 1; i >= 0; i--) {
    uint64_t vpn = (vaddr >> (12 + vb * unsigned(i))) & ((uint64_t(1) << vb) - 1);
    auto it = mem.find(base + vpn * psize);
    out.reads++;
    if (it == mem.end()) return out;  // inaccessible PTE
    uint64_t pte = it->second;
    bool v = pte & 1, r = pte >> 1 & 1, w = pte >> 2 & 1, x = pte >> 3 & 1;
    bool u = pte >> 4 & 1, a = pte >> 6 & 1, d = pte >> 7 & 1;
    uint64_t ppn = (pte >> 10) & ((uint64_t(1) << (mode == TranslationMode::Sv32 ? 22 : 44)) - 1);
    if (!v || (w && !r)) return out;
    if (!r && !x) {  // pointer
      if (i == 0) return out;
      base = ppn * 4096;
      continue;
    }
    out.leaf_level = i;
    bool perm = true;
    if (acc == AccessType::Fetch) perm = x;
    if (acc == AccessType::Read) perm = r || (mxr && x);
    if (acc == AccessType::Write) perm = w;
    if (priv == PrivLevel::U && !u) perm = false;
    if (priv == PrivLevel::S && u && (acc == AccessType::Fetch || !sum)) perm = false;
    if (!a || (acc == AccessType::Write && !d)) perm = false;
    if (!perm) return out;
    if (unsigned(i) > 0 && (ppn & ((uint64_t(1) << (vb * unsigned(i))) - 1)) != 0) return out;
    uint64_t off = vaddr & ((uint64_t(1) << (12 + vb * unsigned(i))) - 1);
    out.ok = true;
    out.pa = (ppn << 12) | off;
    return out;
  }
  return out;
}

uint64_t random_pte(TranslationMode mode) {
  auto arena_ppn = [&] { return kArenaBase + rng() % kArenaPages; };
  uint64_t ppn_mask = mode == TranslationMode::Sv32 ? 0x3FFFFF : ((uint64_t(1) << 44) - 1);
  switch (rng() % 10) {
    case 0: case 1: case 2:  // invalid
      return rng() & ~uint64_t(1);
    case 3: case 4: {  // pointer into the arena
      return (arena_ppn() << 10) | 1;
    }
    case 5: {  // completely random (malformed combinations included)
      return rng();
    }
    default: {  // leaf with random flags; half aligned for superpage use
      uint64_t flags = 1 | (rng() & 0xFE);
      if (!(flags & 2) && !(flags & 8)) flags |= (rng() & 1) ? 2 : 8;  // force r or x
      uint64_t ppn = rng() & ppn_mask;
      if (rng() & 1) {
        // clear 0..levels low PPN fields so leaves at every level can align
        unsigned fields = rng() % (walk_levels(mode) + 1);
        ppn &= ~((uint64_t(1) << (vpn_field_bits(mode) * fields)) - 1);
      }
      return (ppn << 10) | flags;
    }
  }
}

PteMem random_tables(TranslationMode mode) {
  PteMem mem;
  unsigned psize = pte_bytes(mode);
  unsigned entries = 4096 / psize;
  for (unsigned p = 0; p < kArenaPages; p++)
    for (unsigned e = 0; e < entries; e++)
      mem[(kArenaBase + p) * 4096 + e * psize] = random_pte(mode);
  return mem;
}

uint64_t random_vaddr(TranslationMode mode) {
  unsigned vbits = va_bits(mode);
  uint64_t v = rng();
  if (mode == TranslationMode::Sv32) return v & 0xFFFFFFFF;
  if (rng() % 8 == 0) return v;  // frequently non-canonical
  return uint64_t(int64_t(v << (64 - vbits)) >> (64 - vbits));
}

PhysReadFn pte_reader(const PteMem& mem) {
  return [&mem](uint64_t paddr, Width) -> Result<BitVec> {
    auto it = mem.find(paddr);
    if (it == mem.end()) return Result<BitVec>::failure(TrapCause::LoadAccessFault, paddr);
    return Result<BitVec>::success(BitVec(64, it->second));
  };
}

}  // namespace

TEST_CASE("walker agrees with the iterative reference on random tables") {
  const TranslationMode modes[] = {TranslationMode::Sv32, TranslationMode::Sv39,
                                   TranslationMode::Sv48, TranslationMode::Sv57};
  std::map<std::pair<int, int>, int> leaf_tally;  // (mode, level) -> successes
  int faults = 0;

  for (TranslationMode mode : modes) {
    for (int table = 0; table < 10; table++) {
      PteMem mem = random_tables(mode);
      for (int i = 0; i < 1500; i++) {
        WalkCtx ctx;
        ctx.mode = mode;
        ctx.root_ppn = kArenaBase;
        ctx.acc = AccessType(rng() % 3);
        ctx.priv = (rng() & 1) ? PrivLevel::U : PrivLevel::S;
        ctx.sum = rng() & 1;
        ctx.mxr = rng() & 1;
        uint64_t vaddr = random_vaddr(mode);

        RefOutcome want =
            ref_walk(mode, ctx.root_ppn, ctx.acc, ctx.priv, ctx.sum, ctx.mxr, vaddr, mem);
        Result<uint64_t> got = pt_walk(ctx, vaddr, pte_reader(mem));

        INFO(translation_mode_name(mode) << " vaddr=0x" << std::hex << vaddr);
        REQUIRE(got.is_ok() == want.ok);
        if (want.ok) {
          REQUIRE(got.unwrap() == want.pa);
          leaf_tally[{int(mode), want.leaf_level}]++;
        } else {
          REQUIRE(got.trap.cause == page_fault_cause(ctx.acc));
          faults++;
        }

        // event shape: exactly the reference's PTE fetch count, all PMemReads
        auto [trace, out] = record_trace(
            walk_comp(ctx, vaddr),
            [&](const Event& e) -> Response {
              const auto* pr = std::get_if<PMemRead>(&e);
              REQUIRE(pr != nullptr);
              return pte_reader(mem)(pr->paddr.value(), pr->width);
            },
            1000);
        REQUIRE(out.returned.has_value());
        REQUIRE(trace.size() == want.reads);
        REQUIRE(trace.size() <= walk_levels(mode));
      }
    }
  }

  // the randomized tables must have exercised leaves at every legal level
  for (TranslationMode mode : modes)
    for (unsigned lvl = 0; lvl < walk_levels(mode); lvl++) {
      INFO(translation_mode_name(mode) << " level " << lvl);
      REQUIRE(leaf_tally[{int(mode), int(lvl)}] > 0);
    }
  REQUIRE(faults > 1000);
}

TEST_CASE("satp decoding") {
  REQUIRE(decode_satp(BitVec(32, 0x00000123), 32).mode == TranslationMode::Bare);
  REQUIRE(decode_satp(BitVec(32, 0x80000123), 32).mode == TranslationMode::Sv32);
  REQUIRE(decode_satp(BitVec(32, 0x80000123), 32).root_ppn == 0x123);
  REQUIRE(decode_satp(BitVec(64, 0x123), 64).mode == TranslationMode::Bare);
  REQUIRE(decode_satp(BitVec(64, (uint64_t(8) << 60) | 0x123), 64).mode == TranslationMode::Sv39);
  REQUIRE(decode_satp(BitVec(64, (uint64_t(9) << 60) | 0x123), 64).mode == TranslationMode::Sv48);
  REQUIRE(decode_satp(BitVec(64, (uint64_t(10) << 60) | 0x123), 64).mode == TranslationMode::Sv57);
  REQUIRE(decode_satp(BitVec(64, uint64_t(10) << 60), 64).root_ppn == 0);
}

namespace {

// Byte-granular physical memory for handler-level tests.
struct Phys {
  std::map<uint64_t, uint8_t> bytes;
  PteMem ptes;

  Response serve(const Event& e) {
    if (const auto* r = std::get_if<PMemRead>(&e)) {
      uint64_t pa = r->paddr.value();
      auto it = ptes.find(pa);
      if (it != ptes.end() && r->width != Width::Byte)
        return Result<BitVec>::success(BitVec(64, it->second));
      uint64_t v = 0;
      for (unsigned i = 0; i < width_bytes(r->width); i++) {
        auto b = bytes.find(pa + i);
        v |= uint64_t(b == bytes.end() ? 0 : b->second) << (8 * i);
      }
      return Result<BitVec>::success(BitVec(64, v));
    }
    const auto& w = std::get<PMemWrite>(e);
    for (unsigned i = 0; i < width_bytes(w.width); i++)
      bytes[w.paddr.value() + i] = uint8_t(w.data.value() >> (8 * i));
    return Result<Unit>::success(Unit{});
  }
};

template <class R>
std::pair<std::vector<Event>, R> drive(Comp<R> c, Phys& phys) {
  auto [trace, out] = record_trace(
      c, [&](const Event& e) -> Response { return phys.serve(e); }, 10000);
  REQUIRE(out.returned.has_value());
  std::vector<Event> evs;
  for (auto& p : trace) evs.push_back(p.first);
  return {evs, *out.returned};
}

// identity-style Sv39 table: one page directory chain mapping vpage 0 and 1
// of a chosen region to two discontiguous physical pages.
Phys sv39_two_pages(uint64_t& va_base, uint64_t pa_page0, uint64_t pa_page1, uint64_t flags0 = 0xCF,
                    uint64_t flags1 = 0xCF) {
  // root ppn 1, level-1 table ppn 2, level-0 table ppn 3
  Phys p;
  va_base = 0;  // vpn fields all 0 -> first entries
  p.ptes[1 * 4096 + 0] = (uint64_t(2) << 10) | 1;      // root[0] -> table2
  p.ptes[2 * 4096 + 0] = (uint64_t(3) << 10) | 1;      // t2[0] -> table3
  p.ptes[3 * 4096 + 0] = ((pa_page0 >> 12) << 10) | flags0;
  p.ptes[3 * 4096 + 8] = ((pa_page1 >> 12) << 10) | flags1;
  return p;
}

}  // namespace

TEST_CASE("M-mode and Bare are identity translations") {
  VmemCtx ctx;
  ctx.xlen = 64;
  ctx.priv = PrivLevel::M;
  ctx.satp = BitVec(64, (uint64_t(8) << 60) | 1);  // paging on, but M ignores it
  Phys phys;
  phys.bytes[0x8000] = 0xAA;
  phys.bytes[0x8001] = 0xBB;
  auto [evs, r] = drive(vmem_read_comp(ctx, 0x8000, Width::Half), phys);
  REQUIRE(r.is_ok());
  REQUIRE(r.unwrap().value() == 0xBBAA);
  REQUIRE(evs.size() == 1);  // no walk, one data read
  REQUIRE(std::get<PMemRead>(evs[0]).paddr.value() == 0x8000);

  ctx.priv = PrivLevel::S;
  ctx.satp = BitVec(64, 0);  // Bare
  auto [evs2, r2] = drive(vmem_read_comp(ctx, 0x8000, Width::Half), phys);
  REQUIRE(r2.is_ok());
  REQUIRE(r2.unwrap().value() == 0xBBAA);
  REQUIRE(evs2.size() == 1);
}

TEST_CASE("translated read emits the walk then one data access") {
  uint64_t va;
  Phys phys = sv39_two_pages(va, 0x10000, 0x20000);
  phys.bytes[0x10004] = 0x42;
  VmemCtx ctx;
  ctx.xlen = 64;
  ctx.priv = PrivLevel::S;
  ctx.satp = BitVec(64, (uint64_t(8) << 60) | 1);

  auto [evs, r] = drive(vmem_read_comp(ctx, va + 4, Width::Word), phys);
  REQUIRE(r.is_ok());
  REQUIRE(r.unwrap().value() == 0x42);
  REQUIRE(evs.size() == 4);  // 3 walk levels + 1 data read
  REQUIRE(std::get<PMemRead>(evs[3]).paddr.value() == 0x10004);
  REQUIRE(std::get<PMemRead>(evs[3]).width == Width::Word);
}

TEST_CASE("invalid mapping faults without touching data") {
  uint64_t va;
  Phys phys = sv39_two_pages(va, 0x10000, 0x20000, /*flags0=*/0xCE);  // V=0
  VmemCtx ctx;
  ctx.xlen = 64;
  ctx.priv = PrivLevel::S;
  ctx.satp = BitVec(64, (uint64_t(8) << 60) | 1);

  auto [evs, r] = drive(vmem_read_comp(ctx, va + 4, Width::Word), phys);
  REQUIRE(!r.is_ok());
  REQUIRE(r.trap.cause == TrapCause::LoadPageFault);
  REQUIRE(r.trap.tval == va + 4);
  REQUIRE(evs.size() == 3);  // walk only, no data access
  for (auto& e : evs) REQUIRE(std::holds_alternative<PMemRead>(e));
}

TEST_CASE("page-crossing access translates both pages and goes bytewise") {
  uint64_t va;
  Phys phys = sv39_two_pages(va, 0x10000, 0x20000);
  VmemCtx ctx;
  ctx.xlen = 64;
  ctx.priv = PrivLevel::S;
  ctx.satp = BitVec(64, (uint64_t(8) << 60) | 1);

  // write a word at page0+0xFFE: two bytes in each page
  auto [wevs, wr] = drive(vmem_write_comp(ctx, va + 0xFFE, Width::Word, BitVec(64, 0xDDCCBBAA)),
                          phys);
  REQUIRE(wr.is_ok());
  // 3 + 3 walk reads, then 4 byte writes
  REQUIRE(wevs.size() == 10);
  REQUIRE(phys.bytes[0x10FFE] == 0xAA);
  REQUIRE(phys.bytes[0x10FFF] == 0xBB);
  REQUIRE(phys.bytes[0x20000] == 0xCC);
  REQUIRE(phys.bytes[0x20001] == 0xDD);

  auto [revs, rr] = drive(vmem_read_comp(ctx, va + 0xFFE, Width::Word), phys);
  REQUIRE(rr.is_ok());
  REQUIRE(rr.unwrap().value() == 0xDDCCBBAA);
  REQUIRE(revs.size() == 10);

  // if the second page faults, the whole access faults
  uint64_t va2;
  Phys phys2 = sv39_two_pages(va2, 0x10000, 0x20000, 0xCF, /*flags1=*/0xCD);  // page1 W=0
  auto [wevs2, wr2] =
      drive(vmem_write_comp(ctx, va2 + 0xFFE, Width::Word, BitVec(64, 1)), phys2);
  REQUIRE(!wr2.is_ok());
  REQUIRE(wr2.trap.cause == TrapCause::StorePageFault);
}

TEST_CASE("superpage translation keeps low virtual bits") {
  // Sv39 1 GiB superpage: root[1] is an aligned leaf
  Phys phys;
  phys.ptes[1 * 4096 + 8] = ((uint64_t(0x40000) /*1GiB-aligned ppn*/) << 10) | 0xCF;
  VmemCtx ctx;
  ctx.xlen = 64;
  ctx.priv = PrivLevel::S;
  ctx.satp = BitVec(64, (uint64_t(8) << 60) | 1);

  uint64_t va = (uint64_t(1) << 30) | 0x12345;  // vpn2=1
  auto [evs, r] = drive(vmem_read_comp(ctx, va, Width::Byte), phys);
  REQUIRE(r.is_ok());
  REQUIRE(evs.size() == 2);  // one walk level + data
  REQUIRE(std::get<PMemRead>(evs[1]).paddr.value() == (uint64_t(0x40000) << 12 | 0x12345));

  // misaligned superpage faults
  Phys phys2;
  phys2.ptes[1 * 4096 + 8] = ((uint64_t(0x40001)) << 10) | 0xCF;
  auto [evs2, r2] = drive(vmem_read_comp(ctx, va, Width::Byte), phys2);
  REQUIRE(!r2.is_ok());
  REQUIRE(r2.trap.cause == TrapCause::LoadPageFault);
}

TEST_CASE("fetch requires execute permission and remaps MXR reads") {
  uint64_t va;
  Phys phys = sv39_two_pages(va, 0x10000, 0x20000, /*flags0=*/0xD9);  // V,X,U,A (no R/W)
  phys.bytes[0x10000] = 0x13;  // a nop-looking word
  VmemCtx ctx;
  ctx.xlen = 64;
  ctx.priv = PrivLevel::U;
  ctx.satp = BitVec(64, (uint64_t(8) << 60) | 1);

  auto [evs, r] = drive(vmem_fetch_comp(ctx, va), phys);
  REQUIRE(r.is_ok());
  REQUIRE(r.unwrap().value() == 0x13);

  // a plain read of the execute-only page faults without MXR, succeeds with it
  auto [evs2, r2] = drive(vmem_read_comp(ctx, va, Width::Byte), phys);
  REQUIRE(!r2.is_ok());
  REQUIRE(r2.trap.cause == TrapCause::LoadPageFault);
  ctx.mxr = true;
  auto [evs3, r3] = drive(vmem_read_comp(ctx, va, Width::Byte), phys);
  REQUIRE(r3.is_ok());

  // and a store to a read-only page faults
  uint64_t va4;
  Phys phys4 = sv39_two_pages(va4, 0x10000, 0x20000, /*flags0=*/0xDB);  // no W
  ctx.mxr = false;
  auto [evs4, r4] = drive(vmem_write_comp(ctx, va4, Width::Byte, BitVec(64, 1)), phys4);
  REQUIRE(!r4.is_ok());
  REQUIRE(r4.trap.cause == TrapCause::StorePageFault);
}

TEST_CASE("SUM gates S-mode access to user pages") {
  uint64_t va;
  Phys phys = sv39_two_pages(va, 0x10000, 0x20000, /*flags0=*/0xDF);  // U set
  VmemCtx ctx;
  ctx.xlen = 64;
  ctx.priv = PrivLevel::S;
  ctx.satp = BitVec(64, (uint64_t(8) << 60) | 1);

  ctx.sum = false;
  auto [e1, r1] = drive(vmem_read_comp(ctx, va, Width::Byte), phys);
  REQUIRE(!r1.is_ok());
  ctx.sum = true;
  auto [e2, r2] = drive(vmem_read_comp(ctx, va, Width::Byte), phys);
  REQUIRE(r2.is_ok());
  // S never fetches from U pages, SUM or not
  auto [e3, r3] = drive(vmem_fetch_comp(ctx, va), phys);
  REQUIRE(!r3.is_ok());
  REQUIRE(r3.trap.cause == TrapCause::InstrPageFault);
}

TEST_CASE("clear A or D bits trap under the trap-on-clear policy") {
  VmemCtx ctx;
  ctx.xlen = 64;
  ctx.priv = PrivLevel::S;
  ctx.sum = true;
  ctx.satp = BitVec(64, (uint64_t(8) << 60) | 1);

  uint64_t va;
  Phys noA = sv39_two_pages(va, 0x10000, 0x20000, /*flags0=*/0x8F);  // A=0
  auto [e1, r1] = drive(vmem_read_comp(ctx, va, Width::Byte), noA);
  REQUIRE(!r1.is_ok());

  Phys noD = sv39_two_pages(va, 0x10000, 0x20000, /*flags0=*/0x4F);  // A=1,D=0
  auto [e2, r2] = drive(vmem_read_comp(ctx, va, Width::Byte), noD);
  REQUIRE(r2.is_ok());  // reads fine
  auto [e3, r3] = drive(vmem_write_comp(ctx, va, Width::Byte, BitVec(64, 1)), noD);
  REQUIRE(!r3.is_ok());  // writes trap
  REQUIRE(r3.trap.cause == TrapCause::StorePageFault);
}
