#pragma once

#include <ostream>

#include <json.hpp>

#include "rvtrace/effects.hpp"

namespace rvtrace {

// JSONL trace schema: one object per line,
//   {"seq": n, "event": {...}, "response": {...}}
// with bitvectors as {"width": w, "hex": "0x..."}.

inline nlohmann::json bitvec_to_json(const BitVec& v) {
  return {{"width", v.width()}, {"hex", v.hex()}};
}

inline nlohmann::json trap_to_json(const Trap& t) {
  return {{"cause", trap_cause_name(t.cause)}, {"tval", t.tval}};
}

inline nlohmann::json event_to_json(const Event& e) {
  nlohmann::json j;
  j["kind"] = event_name(e);
  struct V {
    nlohmann::json& j;
    void operator()(const RegRead& x) { j["r"] = x.r; }
    void operator()(const RegWrite& x) { j["r"] = x.r; j["d"] = bitvec_to_json(x.d); }
    void operator()(const FPRegRead& x) { j["r"] = x.r; }
    void operator()(const FPRegWrite& x) { j["r"] = x.r; j["d"] = bitvec_to_json(x.d); }
    void operator()(const PCRead&) {}
    void operator()(const PCWrite& x) { j["new_pc"] = bitvec_to_json(x.new_pc); }
    void operator()(const CSRRead& x) { j["addr"] = x.addr; }
    void operator()(const CSRWrite& x) { j["addr"] = x.addr; j["val"] = bitvec_to_json(x.val); }
    void operator()(const VMemRead& x) {
      j["vaddr"] = bitvec_to_json(x.vaddr);
      j["offset"] = bitvec_to_json(x.offset);
      j["width"] = width_name(x.width);
      j["res"] = x.res;
    }
    void operator()(const VMemWrite& x) {
      j["vaddr"] = bitvec_to_json(x.vaddr);
      j["offset"] = bitvec_to_json(x.offset);
      j["width"] = width_name(x.width);
      j["data"] = bitvec_to_json(x.data);
      j["res"] = x.res;
    }
    void operator()(const VMemInstrFetch& x) { j["addr"] = bitvec_to_json(x.addr); }
    void operator()(const PMemRead& x) {
      j["paddr"] = bitvec_to_json(x.paddr);
      j["width"] = width_name(x.width);
    }
    void operator()(const PMemWrite& x) {
      j["paddr"] = bitvec_to_json(x.paddr);
      j["width"] = width_name(x.width);
      j["data"] = bitvec_to_json(x.data);
    }
    void operator()(const MemLoad& x) { j["addr"] = x.addr; }
    void operator()(const MemStore& x) { j["addr"] = x.addr; j["value"] = x.value; }
  };
  std::visit(V{j}, e);
  return j;
}

inline nlohmann::json response_to_json(const Response& r) {
  nlohmann::json j;
  struct V {
    nlohmann::json& j;
    void operator()(const Unit&) { j["kind"] = "unit"; }
    void operator()(const BitVec& v) {
      j["kind"] = "word";
      j["value"] = bitvec_to_json(v);
    }
    void operator()(const Result<BitVec>& v) {
      j["kind"] = "result-word";
      if (v.is_ok())
        j["ok"] = bitvec_to_json(v.unwrap());
      else
        j["err"] = trap_to_json(v.trap);
    }
    void operator()(const Result<Unit>& v) {
      j["kind"] = "result-unit";
      if (v.is_ok())
        j["ok"] = nullptr;
      else
        j["err"] = trap_to_json(v.trap);
    }
  };
  std::visit(V{j}, r);
  return j;
}

class TraceWriter {
public:
  explicit TraceWriter(std::ostream& out) : out_(out) {}

  void emit(const Event& e, const Response& r) {
    nlohmann::json j;
    j["seq"] = seq_++;
    j["event"] = event_to_json(e);
    j["response"] = response_to_json(r);
    out_ << j.dump() << '\n';
  }

  uint64_t count() const { return seq_; }

private:
  std::ostream& out_;
  uint64_t seq_ = 0;
};

}  // namespace rvtrace
