#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rvtrace/bitvec.hpp"

namespace rvtrace {

// ---------------------------------------------------------------------------
// Traps and results
// ---------------------------------------------------------------------------

enum class TrapCause : uint8_t {
  InstrAddrMisaligned = 0,
  InstrAccessFault = 1,
  IllegalInstruction = 2,
  Breakpoint = 3,
  LoadAddrMisaligned = 4,
  LoadAccessFault = 5,
  StoreAddrMisaligned = 6,
  StoreAccessFault = 7,
  EcallFromU = 8,
  EcallFromS = 9,
  EcallFromM = 11,
  InstrPageFault = 12,
  LoadPageFault = 13,
  StorePageFault = 15,
  // Not an architectural trap: signals a failed store-conditional between the
  // memory handler and exec_ATYPE. Never reaches trap entry.
  ScFailure = 63,
};

inline const char* trap_cause_name(TrapCause c) {
  switch (c) {
    case TrapCause::InstrAddrMisaligned: return "instr-addr-misaligned";
    case TrapCause::InstrAccessFault: return "instr-access-fault";
    case TrapCause::IllegalInstruction: return "illegal-instruction";
    case TrapCause::Breakpoint: return "breakpoint";
    case TrapCause::LoadAddrMisaligned: return "load-addr-misaligned";
    case TrapCause::LoadAccessFault: return "load-access-fault";
    case TrapCause::StoreAddrMisaligned: return "store-addr-misaligned";
    case TrapCause::StoreAccessFault: return "store-access-fault";
    case TrapCause::EcallFromU: return "ecall-u";
    case TrapCause::EcallFromS: return "ecall-s";
    case TrapCause::EcallFromM: return "ecall-m";
    case TrapCause::InstrPageFault: return "instr-page-fault";
    case TrapCause::LoadPageFault: return "load-page-fault";
    case TrapCause::StorePageFault: return "store-page-fault";
    case TrapCause::ScFailure: return "sc-failure";
  }
  return "?";
}

struct Trap {
  TrapCause cause = TrapCause::IllegalInstruction;
  uint64_t tval = 0;
  bool operator==(const Trap&) const = default;
};

template <class T>
struct Result {
  std::optional<T> ok;
  Trap trap;  // meaningful only when !ok

  static Result success(T v) { return Result{std::move(v), {}}; }
  static Result failure(Trap t) { return Result{std::nullopt, t}; }
  static Result failure(TrapCause c, uint64_t tval = 0) { return Result{std::nullopt, Trap{c, tval}}; }
  bool is_ok() const { return ok.has_value(); }
  const T& unwrap() const {
    if (!ok) throw std::logic_error("Result::unwrap on Err");
    return *ok;
  }
  bool operator==(const Result&) const = default;
};

struct Unit {
  bool operator==(const Unit&) const { return true; }
};

// ---------------------------------------------------------------------------
// Event vocabulary
// ---------------------------------------------------------------------------

enum class Width : uint8_t { Byte = 1, Half = 2, Word = 4, Double = 8 };

inline unsigned width_bytes(Width w) { return static_cast<unsigned>(w); }
inline unsigned width_bits(Width w) { return 8 * width_bytes(w); }

inline const char* width_name(Width w) {
  switch (w) {
    case Width::Byte: return "byte";
    case Width::Half: return "half";
    case Width::Word: return "word";
    case Width::Double: return "double";
  }
  return "?";
}

// Processor events (registers, PC, CSRs).
struct RegRead { unsigned r; bool operator==(const RegRead&) const = default; };
struct RegWrite { unsigned r; BitVec d; bool operator==(const RegWrite&) const = default; };
struct FPRegRead { unsigned r; bool operator==(const FPRegRead&) const = default; };
struct FPRegWrite { unsigned r; BitVec d; bool operator==(const FPRegWrite&) const = default; };
struct PCRead { bool operator==(const PCRead&) const = default; };
struct PCWrite { BitVec new_pc; bool operator==(const PCWrite&) const = default; };
struct CSRRead { uint16_t addr; bool operator==(const CSRRead&) const = default; };
struct CSRWrite { uint16_t addr; BitVec val; bool operator==(const CSRWrite&) const = default; };

// Virtual-memory events.
struct VMemRead {
  BitVec vaddr, offset;
  Width width;
  bool res;
  bool operator==(const VMemRead&) const = default;
};
struct VMemWrite {
  BitVec vaddr, offset;
  Width width;
  BitVec data;
  bool res;
  bool operator==(const VMemWrite&) const = default;
};
struct VMemInstrFetch { BitVec addr; bool operator==(const VMemInstrFetch&) const = default; };

// Physical-memory events.
struct PMemRead { BitVec paddr; Width width; bool operator==(const PMemRead&) const = default; };
struct PMemWrite {
  BitVec paddr;
  Width width;
  BitVec data;
  bool operator==(const PMemWrite&) const = default;
};

// Micro-IR memory events (cross-level checking).
struct MemLoad { uint64_t addr; bool operator==(const MemLoad&) const = default; };
struct MemStore { uint64_t addr; uint64_t value; bool operator==(const MemStore&) const = default; };

using Event = std::variant<RegRead, RegWrite, FPRegRead, FPRegWrite, PCRead, PCWrite, CSRRead,
                           CSRWrite, VMemRead, VMemWrite, VMemInstrFetch, PMemRead, PMemWrite,
                           MemLoad, MemStore>;

// Responses are dynamically tagged; resuming with the wrong tag is a hard error.
using Response = std::variant<Unit, BitVec, Result<BitVec>, Result<Unit>>;

enum class ResponseTag : uint8_t { Unit = 0, Word = 1, ResultWord = 2, ResultUnit = 3 };

inline ResponseTag response_tag(const Response& r) {
  return static_cast<ResponseTag>(r.index());
}

// The response tag each event constructor expects.
inline ResponseTag expected_response_tag(const Event& e) {
  struct V {
    ResponseTag operator()(const RegRead&) const { return ResponseTag::Word; }
    ResponseTag operator()(const RegWrite&) const { return ResponseTag::Unit; }
    ResponseTag operator()(const FPRegRead&) const { return ResponseTag::Word; }
    ResponseTag operator()(const FPRegWrite&) const { return ResponseTag::Unit; }
    ResponseTag operator()(const PCRead&) const { return ResponseTag::Word; }
    ResponseTag operator()(const PCWrite&) const { return ResponseTag::Unit; }
    ResponseTag operator()(const CSRRead&) const { return ResponseTag::ResultWord; }
    ResponseTag operator()(const CSRWrite&) const { return ResponseTag::ResultUnit; }
    ResponseTag operator()(const VMemRead&) const { return ResponseTag::ResultWord; }
    ResponseTag operator()(const VMemWrite&) const { return ResponseTag::ResultUnit; }
    ResponseTag operator()(const VMemInstrFetch&) const { return ResponseTag::ResultWord; }
    ResponseTag operator()(const PMemRead&) const { return ResponseTag::ResultWord; }
    ResponseTag operator()(const PMemWrite&) const { return ResponseTag::ResultUnit; }
    ResponseTag operator()(const MemLoad&) const { return ResponseTag::Word; }
    ResponseTag operator()(const MemStore&) const { return ResponseTag::Unit; }
  };
  return std::visit(V{}, e);
}

inline const char* event_name(const Event& e) {
  struct V {
    const char* operator()(const RegRead&) const { return "RegRead"; }
    const char* operator()(const RegWrite&) const { return "RegWrite"; }
    const char* operator()(const FPRegRead&) const { return "FPRegRead"; }
    const char* operator()(const FPRegWrite&) const { return "FPRegWrite"; }
    const char* operator()(const PCRead&) const { return "PCRead"; }
    const char* operator()(const PCWrite&) const { return "PCWrite"; }
    const char* operator()(const CSRRead&) const { return "CSRRead"; }
    const char* operator()(const CSRWrite&) const { return "CSRWrite"; }
    const char* operator()(const VMemRead&) const { return "VMemRead"; }
    const char* operator()(const VMemWrite&) const { return "VMemWrite"; }
    const char* operator()(const VMemInstrFetch&) const { return "VMemInstrFetch"; }
    const char* operator()(const PMemRead&) const { return "PMemRead"; }
    const char* operator()(const PMemWrite&) const { return "PMemWrite"; }
    const char* operator()(const MemLoad&) const { return "MemLoad"; }
    const char* operator()(const MemStore&) const { return "MemStore"; }
  };
  return std::visit(V{}, e);
}

// ---------------------------------------------------------------------------
// Resumable computations (Ret / Tau / Vis)
// ---------------------------------------------------------------------------

template <class R>
class Comp;

template <class R>
struct RetStep {
  R value;
};

template <class R>
struct TauStep {
  Comp<R> next;
};

template <class R>
struct VisStep {
  Event event;
  std::function<Comp<R>(const Response&)> resume;
};

template <class R>
using Step = std::variant<RetStep<R>, TauStep<R>, VisStep<R>>;

// A suspendable effectful program: forcing it yields one Ret/Tau/Vis step.
// Thunks are shared and immutable, so Comp values are cheap to copy and a
// computation can be forced any number of times.
template <class R>
class Comp {
public:
  using Thunk = std::function<Step<R>()>;

  Comp() = default;
  explicit Comp(Thunk t) : thunk_(std::make_shared<Thunk>(std::move(t))) {}

  Step<R> force() const {
    if (!thunk_) throw std::logic_error("Comp: forcing an empty computation");
    return (*thunk_)();
  }

  bool valid() const { return thunk_ != nullptr; }

private:
  std::shared_ptr<Thunk> thunk_;
};

template <class R>
Comp<R> ret(R value) {
  return Comp<R>([value]() -> Step<R> { return RetStep<R>{value}; });
}

template <class R>
Comp<R> tau(Comp<R> next) {
  return Comp<R>([next]() -> Step<R> { return TauStep<R>{next}; });
}

inline Comp<Response> trigger(Event e) {
  ResponseTag want = expected_response_tag(e);
  return Comp<Response>([e, want]() -> Step<Response> {
    return VisStep<Response>{e, [e, want](const Response& resp) -> Comp<Response> {
                               if (response_tag(resp) != want)
                                 throw std::logic_error(std::string("trigger: response tag mismatch for ") +
                                                        event_name(e));
                               return ret<Response>(resp);
                             }};
  });
}

// bind(t, k): thread Ret values through k; transparent to Tau and Vis. A Ret
// on the left produces one Tau before k's first step (tau placement is an
// internal convention, unobservable to the equivalence checkers).
template <class R, class S>
Comp<S> bind_impl(Comp<R> t, std::function<Comp<S>(const R&)> k) {
  return Comp<S>([t, k]() -> Step<S> {
    Step<R> s = t.force();
    if (auto* r = std::get_if<RetStep<R>>(&s)) {
      return TauStep<S>{k(r->value)};
    }
    if (auto* ta = std::get_if<TauStep<R>>(&s)) {
      return TauStep<S>{bind_impl<R, S>(ta->next, k)};
    }
    auto& v = std::get<VisStep<R>>(s);
    auto resume = v.resume;
    return VisStep<S>{v.event, [resume, k](const Response& resp) -> Comp<S> {
                        return bind_impl<R, S>(resume(resp), k);
                      }};
  });
}

template <class S, class R, class K>
Comp<S> bind(Comp<R> t, K k) {
  return bind_impl<R, S>(std::move(t), std::function<Comp<S>(const R&)>(std::move(k)));
}

// ---------------------------------------------------------------------------
// Stateful interpretation
// ---------------------------------------------------------------------------

// A handler resolves an event against a threaded state; nullopt leaves the
// event as a residual Vis in the output computation.
template <class S>
using PartialHandler = std::function<std::optional<Response>(const Event&, S&)>;

template <class R, class S>
Comp<std::pair<S, R>> interp_state(PartialHandler<S> h, Comp<R> t, S s) {
  using Out = std::pair<S, R>;
  return Comp<Out>([h, t, s]() -> Step<Out> {
    Step<R> st = t.force();
    if (auto* r = std::get_if<RetStep<R>>(&st)) {
      return RetStep<Out>{Out{s, r->value}};
    }
    if (auto* ta = std::get_if<TauStep<R>>(&st)) {
      return TauStep<Out>{interp_state<R, S>(h, ta->next, s)};
    }
    auto& v = std::get<VisStep<R>>(st);
    S s2 = s;
    std::optional<Response> resp = h(v.event, s2);
    if (resp) {
      if (response_tag(*resp) != expected_response_tag(v.event))
        throw std::logic_error(std::string("interp_state: handler returned wrong response tag for ") +
                               event_name(v.event));
      Comp<R> next = v.resume(*resp);
      return TauStep<Out>{interp_state<R, S>(h, next, s2)};
    }
    auto resume = v.resume;
    return VisStep<Out>{v.event, [h, resume, s](const Response& r2) -> Comp<Out> {
                          return interp_state<R, S>(h, resume(r2), s);
                        }};
  });
}

// ---------------------------------------------------------------------------
// Finite observation
// ---------------------------------------------------------------------------

using ResponseOracle = std::function<Response(const Event&)>;

template <class R>
struct TraceOutcome {
  std::optional<R> returned;  // nullopt: out of fuel
  bool out_of_fuel() const { return !returned.has_value(); }
};

using TraceEntry = std::pair<Event, Response>;
using Trace = std::vector<TraceEntry>;

template <class R>
std::pair<Trace, TraceOutcome<R>> record_trace(Comp<R> t, const ResponseOracle& env, uint64_t fuel) {
  if (fuel == 0) throw std::logic_error("record_trace: fuel must be positive");
  Trace trace;
  Comp<R> cur = t;
  for (uint64_t i = 0; i < fuel; ++i) {
    Step<R> s = cur.force();
    if (auto* r = std::get_if<RetStep<R>>(&s)) {
      return {trace, TraceOutcome<R>{r->value}};
    }
    if (auto* ta = std::get_if<TauStep<R>>(&s)) {
      cur = ta->next;
      continue;
    }
    auto& v = std::get<VisStep<R>>(s);
    Response resp = env(v.event);
    if (response_tag(resp) != expected_response_tag(v.event))
      throw std::logic_error(std::string("record_trace: oracle response tag mismatch for ") +
                             event_name(v.event));
    trace.emplace_back(v.event, resp);
    cur = v.resume(resp);
  }
  return {trace, TraceOutcome<R>{std::nullopt}};
}

// Force a fully-interpreted computation (no residual events) to its value.
template <class R>
R run_to_ret(Comp<R> t, uint64_t fuel = uint64_t(1) << 20) {
  Comp<R> cur = t;
  for (uint64_t i = 0; i < fuel; ++i) {
    Step<R> s = cur.force();
    if (auto* r = std::get_if<RetStep<R>>(&s)) return r->value;
    if (auto* ta = std::get_if<TauStep<R>>(&s)) {
      cur = ta->next;
      continue;
    }
    throw std::logic_error(std::string("run_to_ret: residual event ") +
                           event_name(std::get<VisStep<R>>(s).event));
  }
  throw std::logic_error("run_to_ret: out of fuel");
}

// Drive a computation against a mutating handler that resolves every event.
template <class R, class S>
std::optional<R> run_comp(Comp<R> t, S& state, const std::function<Response(const Event&, S&)>& handle,
                          uint64_t fuel = UINT64_MAX) {
  Comp<R> cur = t;
  for (uint64_t i = 0; i < fuel; ++i) {
    Step<R> s = cur.force();
    if (auto* r = std::get_if<RetStep<R>>(&s)) return r->value;
    if (auto* ta = std::get_if<TauStep<R>>(&s)) {
      cur = ta->next;
      continue;
    }
    auto& v = std::get<VisStep<R>>(s);
    Response resp = handle(v.event, state);
    if (response_tag(resp) != expected_response_tag(v.event))
      throw std::logic_error(std::string("run_comp: handler response tag mismatch for ") +
                             event_name(v.event));
    cur = v.resume(resp);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Typed trigger helpers used by the instruction semantics
// ---------------------------------------------------------------------------

inline Comp<BitVec> trigger_word(Event e) {
  return bind<BitVec>(trigger(std::move(e)),
                      [](const Response& r) { return ret(std::get<BitVec>(r)); });
}

inline Comp<Unit> trigger_unit(Event e) {
  return bind<Unit>(trigger(std::move(e)), [](const Response&) { return ret(Unit{}); });
}

inline Comp<Result<BitVec>> trigger_result_word(Event e) {
  return bind<Result<BitVec>>(trigger(std::move(e)),
                              [](const Response& r) { return ret(std::get<Result<BitVec>>(r)); });
}

inline Comp<Result<Unit>> trigger_result_unit(Event e) {
  return bind<Result<Unit>>(trigger(std::move(e)),
                            [](const Response& r) { return ret(std::get<Result<Unit>>(r)); });
}

// ---------------------------------------------------------------------------
// Execution results
// ---------------------------------------------------------------------------

struct ExecResult {
  std::optional<Trap> trap;  // nullopt: Retire_Success

  static ExecResult success() { return ExecResult{std::nullopt}; }
  static ExecResult fail(TrapCause c, uint64_t tval = 0) { return ExecResult{Trap{c, tval}}; }
  bool retired() const { return !trap.has_value(); }
  bool operator==(const ExecResult&) const = default;
};

}  // namespace rvtrace
