#pragma once

#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rvtrace/isa.hpp"

namespace rvtrace {

struct AsmError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const char* reg_name(unsigned r) {
  static const char* names[32] = {"zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2",
                                  "s0",   "s1", "a0", "a1", "a2", "a3", "a4", "a5",
                                  "a6",   "a7", "s2", "s3", "s4", "s5", "s6", "s7",
                                  "s8",   "s9", "s10", "s11", "t3", "t4", "t5", "t6"};
  return names[r & 31];
}

inline const char* freg_name(unsigned r) {
  static const char* names[32] = {"ft0", "ft1", "ft2",  "ft3",  "ft4", "ft5", "ft6",  "ft7",
                                  "fs0", "fs1", "fa0",  "fa1",  "fa2", "fa3", "fa4",  "fa5",
                                  "fa6", "fa7", "fs2",  "fs3",  "fs4", "fs5", "fs6",  "fs7",
                                  "fs8", "fs9", "fs10", "fs11", "ft8", "ft9", "ft10", "ft11"};
  return names[r & 31];
}

inline std::optional<unsigned> parse_reg(const std::string& s) {
  if (s.size() >= 2 && (s[0] == 'x') && isdigit(s[1])) {
    int n = atoi(s.c_str() + 1);
    if (n >= 0 && n < 32) return unsigned(n);
    return std::nullopt;
  }
  for (unsigned r = 0; r < 32; r++)
    if (s == reg_name(r)) return r;
  if (s == "fp") return 8u;
  return std::nullopt;
}

// Symbolic parameter environment for parameterized sequences.
using SymEnv = std::map<std::string, int64_t>;

namespace detail {

struct Operand {
  bool is_sym = false;
  int64_t lit = 0;
  std::string sym;

  int64_t resolve(const SymEnv& env) const {
    if (!is_sym) return lit;
    auto it = env.find(sym);
    if (it == env.end()) throw AsmError("unbound symbolic immediate: " + sym);
    return it->second;
  }
};

inline Operand parse_imm_operand(const std::string& tok) {
  if (tok.empty()) throw AsmError("empty immediate");
  if (isalpha(uint8_t(tok[0])) || tok[0] == '_') return Operand{true, 0, tok};
  size_t pos = 0;
  int64_t v = std::stoll(tok, &pos, 0);
  if (pos != tok.size()) throw AsmError("bad immediate: " + tok);
  return Operand{false, v, ""};
}

inline std::vector<std::string> split_operands(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (!isspace(uint8_t(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// "imm(rs1)" -> (imm operand, reg)
inline std::pair<Operand, unsigned> parse_mem_operand(const std::string& tok) {
  auto open = tok.find('(');
  auto close = tok.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw AsmError("bad memory operand: " + tok);
  std::string immpart = tok.substr(0, open);
  std::string regpart = tok.substr(open + 1, close - open - 1);
  auto reg = parse_reg(regpart);
  if (!reg) throw AsmError("bad register in memory operand: " + tok);
  Operand imm = immpart.empty() ? Operand{false, 0, ""} : parse_imm_operand(immpart);
  return {imm, *reg};
}

}  // namespace detail

// One parsed instruction, instantiable under a symbolic environment.
using InstrTemplate = std::function<Instr(const SymEnv&)>;

struct AsmProgram {
  std::vector<InstrTemplate> instrs;
  std::vector<std::string> symbols;  // symbolic immediates, in order of first use

  std::vector<Instr> instantiate(const SymEnv& env) const {
    std::vector<Instr> out;
    out.reserve(instrs.size());
    for (const auto& t : instrs) out.push_back(t(env));
    return out;
  }
};

namespace detail {

inline BitVec imm_field(int64_t v, unsigned width, const std::string& what) {
  int64_t lo = -(int64_t(1) << (width - 1));
  int64_t hi = (int64_t(1) << width) - 1;  // accept both signed and unsigned spellings
  if (v < lo || v > hi) throw AsmError(what + " immediate out of range: " + std::to_string(v));
  return BitVec(width, uint64_t(v));
}

}  // namespace detail

inline AsmProgram parse_asm(const std::string& text) {
  using namespace detail;
  AsmProgram prog;
  auto note_sym = [&](const Operand& op) {
    if (op.is_sym &&
        std::find(prog.symbols.begin(), prog.symbols.end(), op.sym) == prog.symbols.end())
      prog.symbols.push_back(op.sym);
  };

  std::istringstream in(text);
  std::string line;
  unsigned lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string mnemonic;
    if (!(ls >> mnemonic)) continue;
    std::string rest;
    std::getline(ls, rest);
    std::vector<std::string> ops = split_operands(rest);
    auto at = [&](size_t i) -> const std::string& {
      if (i >= ops.size())
        throw AsmError("line " + std::to_string(lineno) + ": missing operand for " + mnemonic);
      return ops[i];
    };
    auto reg_at = [&](size_t i) {
      auto r = parse_reg(at(i));
      if (!r) throw AsmError("line " + std::to_string(lineno) + ": bad register " + at(i));
      return *r;
    };

    try {
      if (mnemonic == "nop") {
        prog.instrs.push_back([](const SymEnv&) -> Instr {
          return Itype{BitVec(12, 0), 0, 0, ItypeOp::ADDI};
        });
      } else if (mnemonic == "lui" || mnemonic == "auipc") {
        unsigned rd = reg_at(0);
        Operand imm = parse_imm_operand(at(1));
        note_sym(imm);
        UtypeOp op = mnemonic == "lui" ? UtypeOp::LUI : UtypeOp::AUIPC;
        prog.instrs.push_back([rd, imm, op](const SymEnv& env) -> Instr {
          return Utype{imm_field(imm.resolve(env), 20, "u-type"), uint8_t(rd), op};
        });
      } else if (mnemonic == "addi" || mnemonic == "slti" || mnemonic == "sltiu" ||
                 mnemonic == "xori" || mnemonic == "ori" || mnemonic == "andi") {
        static const std::map<std::string, ItypeOp> ops_map = {
            {"addi", ItypeOp::ADDI}, {"slti", ItypeOp::SLTI}, {"sltiu", ItypeOp::SLTIU},
            {"xori", ItypeOp::XORI}, {"ori", ItypeOp::ORI},   {"andi", ItypeOp::ANDI}};
        unsigned rd = reg_at(0), rs1 = reg_at(1);
        Operand imm = parse_imm_operand(at(2));
        note_sym(imm);
        ItypeOp op = ops_map.at(mnemonic);
        prog.instrs.push_back([rd, rs1, imm, op](const SymEnv& env) -> Instr {
          return Itype{imm_field(imm.resolve(env), 12, "i-type"), uint8_t(rs1), uint8_t(rd), op};
        });
      } else if (mnemonic == "slli" || mnemonic == "srli" || mnemonic == "srai") {
        static const std::map<std::string, ItypeOp> ops_map = {
            {"slli", ItypeOp::SLLI}, {"srli", ItypeOp::SRLI}, {"srai", ItypeOp::SRAI}};
        unsigned rd = reg_at(0), rs1 = reg_at(1);
        Operand sh = parse_imm_operand(at(2));
        note_sym(sh);
        ItypeOp op = ops_map.at(mnemonic);
        prog.instrs.push_back([rd, rs1, sh, op](const SymEnv& env) -> Instr {
          int64_t v = sh.resolve(env);
          if (v < 0 || v > 63) throw AsmError("shift amount out of range");
          return Itype{BitVec(12, uint64_t(v)), uint8_t(rs1), uint8_t(rd), op};
        });
      } else if (mnemonic == "add" || mnemonic == "sub" || mnemonic == "sll" ||
                 mnemonic == "slt" || mnemonic == "sltu" || mnemonic == "xor" ||
                 mnemonic == "srl" || mnemonic == "sra" || mnemonic == "or" ||
                 mnemonic == "and") {
        static const std::map<std::string, RtypeOp> ops_map = {
            {"add", RtypeOp::ADD}, {"sub", RtypeOp::SUB}, {"sll", RtypeOp::SLL},
            {"slt", RtypeOp::SLT}, {"sltu", RtypeOp::SLTU}, {"xor", RtypeOp::XOR},
            {"srl", RtypeOp::SRL}, {"sra", RtypeOp::SRA}, {"or", RtypeOp::OR},
            {"and", RtypeOp::AND}};
        unsigned rd = reg_at(0), rs1 = reg_at(1), rs2 = reg_at(2);
        RtypeOp op = ops_map.at(mnemonic);
        prog.instrs.push_back([rd, rs1, rs2, op](const SymEnv&) -> Instr {
          return Rtype{uint8_t(rs1), uint8_t(rs2), uint8_t(rd), op};
        });
      } else if (mnemonic == "lb" || mnemonic == "lh" || mnemonic == "lw" || mnemonic == "ld" ||
                 mnemonic == "lbu" || mnemonic == "lhu" || mnemonic == "lwu") {
        unsigned rd = reg_at(0);
        auto mem = parse_mem_operand(at(1));
        Operand imm = mem.first;
        unsigned rs1 = mem.second;
        note_sym(imm);
        bool uns = mnemonic.back() == 'u';
        Width w = mnemonic[1] == 'b' ? Width::Byte
                  : mnemonic[1] == 'h' ? Width::Half
                  : mnemonic[1] == 'w' ? Width::Word
                                       : Width::Double;
        prog.instrs.push_back([rd, rs1, imm, uns, w](const SymEnv& env) -> Instr {
          return Load{imm_field(imm.resolve(env), 12, "load"), uint8_t(rs1), uint8_t(rd), uns, w};
        });
      } else if (mnemonic == "sb" || mnemonic == "sh" || mnemonic == "sw" || mnemonic == "sd") {
        unsigned rs2 = reg_at(0);
        auto mem = parse_mem_operand(at(1));
        Operand imm = mem.first;
        unsigned rs1 = mem.second;
        note_sym(imm);
        Width w = mnemonic[1] == 'b' ? Width::Byte
                  : mnemonic[1] == 'h' ? Width::Half
                  : mnemonic[1] == 'w' ? Width::Word
                                       : Width::Double;
        prog.instrs.push_back([rs2, rs1, imm, w](const SymEnv& env) -> Instr {
          return Store{imm_field(imm.resolve(env), 12, "store"), uint8_t(rs1), uint8_t(rs2), w};
        });
      } else if (mnemonic == "jal") {
        unsigned rd = reg_at(0);
        Operand imm = parse_imm_operand(at(1));
        note_sym(imm);
        prog.instrs.push_back([rd, imm](const SymEnv& env) -> Instr {
          int64_t v = imm.resolve(env);
          if (v & 1) throw AsmError("jal offset must be even");
          return Jal{imm_field(v, 21, "jal"), uint8_t(rd)};
        });
      } else if (mnemonic == "jalr") {
        unsigned rd = reg_at(0);
        auto mem = parse_mem_operand(at(1));
        Operand imm = mem.first;
        unsigned rs1 = mem.second;
        note_sym(imm);
        prog.instrs.push_back([rd, rs1, imm](const SymEnv& env) -> Instr {
          return Jalr{imm_field(imm.resolve(env), 12, "jalr"), uint8_t(rs1), uint8_t(rd)};
        });
      } else {
        throw AsmError("unsupported mnemonic: " + mnemonic);
      }
    } catch (const AsmError& e) {
      throw AsmError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return prog;
}

// ---------------------------------------------------------------------------
// Disassembly
// ---------------------------------------------------------------------------

inline std::string disassemble(const Instr& instr) {
  std::ostringstream o;
  struct V {
    std::ostream& o;
    static int64_t sv(const BitVec& b) { return b.signed_value(); }

    void operator()(const Itype& i) {
      static const char* n[] = {"addi", "slti", "sltiu", "xori", "ori",
                                "andi", "slli", "srli", "srai"};
      const char* m = n[int(i.op)];
      if (i.op == ItypeOp::SLLI || i.op == ItypeOp::SRLI || i.op == ItypeOp::SRAI)
        o << m << " " << reg_name(i.rd) << ", " << reg_name(i.rs1) << ", " << i.imm.value();
      else
        o << m << " " << reg_name(i.rd) << ", " << reg_name(i.rs1) << ", " << sv(i.imm);
    }
    void operator()(const Rtype& i) {
      static const char* n[] = {"add", "sub", "sll", "slt", "sltu",
                                "xor", "srl", "sra", "or",  "and"};
      o << n[int(i.op)] << " " << reg_name(i.rd) << ", " << reg_name(i.rs1) << ", "
        << reg_name(i.rs2);
    }
    void operator()(const Btype& i) {
      static const char* n[] = {"beq", "bne", "blt", "bge", "bltu", "bgeu"};
      o << n[int(i.op)] << " " << reg_name(i.rs1) << ", " << reg_name(i.rs2) << ", " << sv(i.imm);
    }
    void operator()(const Utype& i) {
      o << (i.op == UtypeOp::LUI ? "lui" : "auipc") << " " << reg_name(i.rd) << ", 0x" << std::hex
        << i.imm.value() << std::dec;
    }
    void operator()(const Jal& i) { o << "jal " << reg_name(i.rd) << ", " << sv(i.imm); }
    void operator()(const Jalr& i) {
      o << "jalr " << reg_name(i.rd) << ", " << sv(i.imm) << "(" << reg_name(i.rs1) << ")";
    }
    void operator()(const Load& i) {
      static const char* n[] = {"?", "lb", "lh", "?", "lw", "?", "?", "?", "ld"};
      o << n[int(i.width)] << (i.is_unsigned ? "u" : "") << " " << reg_name(i.rd) << ", "
        << sv(i.imm) << "(" << reg_name(i.rs1) << ")";
    }
    void operator()(const Store& i) {
      static const char* n[] = {"?", "sb", "sh", "?", "sw", "?", "?", "?", "sd"};
      o << n[int(i.width)] << " " << reg_name(i.rs2) << ", " << sv(i.imm) << "("
        << reg_name(i.rs1) << ")";
    }
    void operator()(const Fence&) { o << "fence"; }
    void operator()(const FenceI&) { o << "fence.i"; }
    void operator()(const Addiw& i) {
      o << "addiw " << reg_name(i.rd) << ", " << reg_name(i.rs1) << ", " << sv(i.imm);
    }
    void operator()(const Shiftiw& i) {
      static const char* n[] = {"slliw", "srliw", "sraiw"};
      o << n[int(i.op)] << " " << reg_name(i.rd) << ", " << reg_name(i.rs1) << ", "
        << unsigned(i.shamt);
    }
    void operator()(const Rtypew& i) {
      static const char* n[] = {"addw", "subw", "sllw", "srlw", "sraw"};
      o << n[int(i.op)] << " " << reg_name(i.rd) << ", " << reg_name(i.rs1) << ", "
        << reg_name(i.rs2);
    }
    void operator()(const Mtype& i) {
      static const char* n[] = {"mul", "mulh", "mulhsu", "mulhu", "div", "divu", "rem", "remu"};
      o << n[int(i.op)] << " " << reg_name(i.rd) << ", " << reg_name(i.rs1) << ", "
        << reg_name(i.rs2);
    }
    void operator()(const Mtypew& i) {
      static const char* n[] = {"mulw", "divw", "divuw", "remw", "remuw"};
      o << n[int(i.op)] << " " << reg_name(i.rd) << ", " << reg_name(i.rs1) << ", "
        << reg_name(i.rs2);
    }
    void operator()(const Atype& i) {
      static const char* n[] = {"lr",     "sc",     "amoswap", "amoadd", "amoxor", "amoand",
                                "amoor",  "amomin", "amomax",  "amominu", "amomaxu"};
      o << n[int(i.op)] << (i.width == Width::Word ? ".w" : ".d");
      if (i.aq) o << ".aq";
      if (i.rl) o << ".rl";
      o << " " << reg_name(i.rd) << ", ";
      if (i.op != AmoOp::LR) o << reg_name(i.rs2) << ", ";
      o << "(" << reg_name(i.rs1) << ")";
    }
    void operator()(const Csr& i) {
      static const char* n[] = {"csrrw", "csrrs", "csrrc"};
      o << n[int(i.op)] << " " << reg_name(i.rd) << ", 0x" << std::hex << i.csr << std::dec << ", "
        << reg_name(i.rs1);
    }
    void operator()(const Csri& i) {
      static const char* n[] = {"csrrwi", "csrrsi", "csrrci"};
      o << n[int(i.op)] << " " << reg_name(i.rd) << ", 0x" << std::hex << i.csr << std::dec << ", "
        << unsigned(i.uimm);
    }
    void operator()(const Fload& i) {
      o << "flw " << freg_name(i.fd) << ", " << sv(i.imm) << "(" << reg_name(i.rs1) << ")";
    }
    void operator()(const Fstore& i) {
      o << "fsw " << freg_name(i.fs2) << ", " << sv(i.imm) << "(" << reg_name(i.rs1) << ")";
    }
    void operator()(const Ffma& i) {
      static const char* n[] = {"fmadd.s", "fmsub.s", "fnmsub.s", "fnmadd.s"};
      o << n[int(i.op)] << " " << freg_name(i.fd) << ", " << freg_name(i.fs1) << ", "
        << freg_name(i.fs2) << ", " << freg_name(i.fs3);
    }
    void operator()(const Farith& i) {
      static const char* n[] = {"fadd.s", "fsub.s", "fmul.s", "fdiv.s", "fsqrt.s"};
      o << n[int(i.op)] << " " << freg_name(i.fd) << ", " << freg_name(i.fs1);
      if (i.op != FarithOp::FSQRT_S) o << ", " << freg_name(i.fs2);
    }
    void operator()(const Fsgnj& i) {
      static const char* n[] = {"fsgnj.s", "fsgnjn.s", "fsgnjx.s"};
      o << n[int(i.op)] << " " << freg_name(i.fd) << ", " << freg_name(i.fs1) << ", "
        << freg_name(i.fs2);
    }
    void operator()(const Fminmax& i) {
      o << (i.is_max ? "fmax.s" : "fmin.s") << " " << freg_name(i.fd) << ", " << freg_name(i.fs1)
        << ", " << freg_name(i.fs2);
    }
    void operator()(const Fcmp& i) {
      static const char* n[] = {"feq.s", "flt.s", "fle.s"};
      o << n[int(i.op)] << " " << reg_name(i.rd) << ", " << freg_name(i.fs1) << ", "
        << freg_name(i.fs2);
    }
    void operator()(const FcvtToInt& i) {
      static const char* n[] = {"fcvt.w.s", "fcvt.wu.s", "fcvt.l.s", "fcvt.lu.s"};
      o << n[int(i.kind)] << " " << reg_name(i.rd) << ", " << freg_name(i.fs1);
    }
    void operator()(const FcvtFromInt& i) {
      static const char* n[] = {"fcvt.s.w", "fcvt.s.wu", "fcvt.s.l", "fcvt.s.lu"};
      o << n[int(i.kind)] << " " << freg_name(i.fd) << ", " << reg_name(i.rs1);
    }
    void operator()(const FmvXW& i) {
      o << "fmv.x.w " << reg_name(i.rd) << ", " << freg_name(i.fs1);
    }
    void operator()(const FmvWX& i) {
      o << "fmv.w.x " << freg_name(i.fd) << ", " << reg_name(i.rs1);
    }
    void operator()(const Fclass& i) {
      o << "fclass.s " << reg_name(i.rd) << ", " << freg_name(i.fs1);
    }
    void operator()(const Ecall&) { o << "ecall"; }
    void operator()(const Ebreak&) { o << "ebreak"; }
    void operator()(const Mret&) { o << "mret"; }
    void operator()(const Wfi&) { o << "wfi"; }
    void operator()(const Illegal& i) {
      o << ".word 0x" << std::hex << i.raw << std::dec << "  # illegal";
    }
  };
  std::visit(V{o}, instr);
  return o.str();
}

}  // namespace rvtrace
