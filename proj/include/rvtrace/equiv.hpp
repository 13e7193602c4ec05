#pragma once

#include <functional>
#include <string>

#include "rvtrace/effects.hpp"
#include "rvtrace/trace_json.hpp"

namespace rvtrace {

enum class VerdictKind : uint8_t { Equivalent, Mismatch, Undecided, OracleViolation };

inline const char* verdict_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Equivalent: return "equivalent";
    case VerdictKind::Mismatch: return "mismatch";
    case VerdictKind::Undecided: return "undecided";
    case VerdictKind::OracleViolation: return "oracle-violation";
  }
  return "?";
}

struct Verdict {
  VerdictKind kind = VerdictKind::Undecided;
  std::string evidence;  // human-readable counterexample, empty when equivalent

  bool equivalent() const { return kind == VerdictKind::Equivalent; }
};

using ResponseOracle = std::function<Response(const Event&)>;

template <class R1, class R2>
struct EuttConfig {
  std::function<bool(const R1&, const R2&)> result_relation;
  unsigned tau_fuel = 64;     // max consecutive taus skipped per side
  unsigned step_fuel = 4096;  // total matched-step bound
};

namespace detail {

// Advance to the next non-tau step, skipping at most tau_fuel taus.
// Returns false if the tau budget ran out.
template <class R>
bool skip_taus(Comp<R>& c, Step<R>& out, unsigned tau_fuel) {
  for (unsigned i = 0; i <= tau_fuel; i++) {
    out = c.force();
    if (!std::holds_alternative<TauStep<R>>(out)) return true;
    c = std::get<TauStep<R>>(out).next;
  }
  return false;
}

inline std::string show_event(const Event& e) { return event_to_json(e).dump(); }
inline std::string show_response(const Response& r) { return response_to_json(r).dump(); }

}  // namespace detail

// Bounded co-execution check for tau-insensitive equivalence: identical events
// at every matched step, a shared response oracle, result_relation at dual Ret.
// A checker, not a proof: Equivalent means no counterexample within the fuel.
template <class R1, class R2>
Verdict check_eutt(Comp<R1> t1, Comp<R2> t2, const ResponseOracle& env,
                   const EuttConfig<R1, R2>& cfg) {
  for (unsigned step = 0; step < cfg.step_fuel; step++) {
    Step<R1> s1;
    Step<R2> s2;
    if (!detail::skip_taus(t1, s1, cfg.tau_fuel) || !detail::skip_taus(t2, s2, cfg.tau_fuel))
      return {VerdictKind::Undecided, "tau budget exhausted"};

    const auto* r1 = std::get_if<RetStep<R1>>(&s1);
    const auto* r2 = std::get_if<RetStep<R2>>(&s2);
    if (r1 && r2) {
      if (cfg.result_relation(r1->value, r2->value)) return {VerdictKind::Equivalent, ""};
      return {VerdictKind::Mismatch, "result relation fails at dual Ret"};
    }
    if (r1 || r2) {
      const Event& e = r1 ? std::get<VisStep<R2>>(s2).event : std::get<VisStep<R1>>(s1).event;
      return {VerdictKind::Mismatch, std::string("one side returned while the other emits ") +
                                         detail::show_event(e)};
    }
    auto& v1 = std::get<VisStep<R1>>(s1);
    auto& v2 = std::get<VisStep<R2>>(s2);
    if (!(v1.event == v2.event))
      return {VerdictKind::Mismatch, "event mismatch: " + detail::show_event(v1.event) + " vs " +
                                         detail::show_event(v2.event)};
    Response resp = env(v1.event);
    t1 = v1.resume(resp);
    t2 = v2.resume(resp);
  }
  return {VerdictKind::Undecided, "step budget exhausted"};
}

template <class R1, class R2>
struct RuttConfig {
  std::function<bool(const Event&, const Event&)> event_relation;  // REv
  std::function<bool(const Event&, const Response&, const Event&, const Response&)>
      response_relation;  // RAns
  std::function<bool(const R1&, const R2&)> result_relation;  // RR
  unsigned tau_fuel = 64;
  unsigned step_fuel = 4096;
};

// Heterogeneous relational variant: events matched via REv, the two sides'
// oracle responses validated jointly via RAns, results via RR.
template <class R1, class R2>
Verdict check_rutt(Comp<R1> t1, Comp<R2> t2, const ResponseOracle& env1,
                   const ResponseOracle& env2, const RuttConfig<R1, R2>& cfg) {
  for (unsigned step = 0; step < cfg.step_fuel; step++) {
    Step<R1> s1;
    Step<R2> s2;
    if (!detail::skip_taus(t1, s1, cfg.tau_fuel) || !detail::skip_taus(t2, s2, cfg.tau_fuel))
      return {VerdictKind::Undecided, "tau budget exhausted"};

    const auto* r1 = std::get_if<RetStep<R1>>(&s1);
    const auto* r2 = std::get_if<RetStep<R2>>(&s2);
    if (r1 && r2) {
      if (cfg.result_relation(r1->value, r2->value)) return {VerdictKind::Equivalent, ""};
      return {VerdictKind::Mismatch, "result relation fails at dual Ret"};
    }
    if (r1 || r2) {
      const Event& e = r1 ? std::get<VisStep<R2>>(s2).event : std::get<VisStep<R1>>(s1).event;
      return {VerdictKind::Mismatch, std::string("one side returned while the other emits ") +
                                         detail::show_event(e)};
    }
    auto& v1 = std::get<VisStep<R1>>(s1);
    auto& v2 = std::get<VisStep<R2>>(s2);
    if (!cfg.event_relation(v1.event, v2.event))
      return {VerdictKind::Mismatch, "unrelated events: " + detail::show_event(v1.event) +
                                         " vs " + detail::show_event(v2.event)};
    Response resp1 = env1(v1.event);
    Response resp2 = env2(v2.event);
    if (!cfg.response_relation(v1.event, resp1, v2.event, resp2))
      return {VerdictKind::OracleViolation,
              "responses violate the answer relation: " + detail::show_response(resp1) + " vs " +
                  detail::show_response(resp2)};
    t1 = v1.resume(resp1);
    t2 = v2.resume(resp2);
  }
  return {VerdictKind::Undecided, "step budget exhausted"};
}

}  // namespace rvtrace
