// rvfx: event-trace RISC-V simulator and equivalence-checking front end.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rvtrace/asm.hpp"
#include "rvtrace/elf.hpp"
#include "rvtrace/machine.hpp"
#include "rvtrace/microir.hpp"
#include "rvtrace/reorder.hpp"
#include "rvtrace/rulealu.hpp"
#include "rvtrace/suite.hpp"
#include "rvtrace/trace_json.hpp"

using namespace rvtrace;

namespace {

// Config precedence: flags > RVFX_* environment > defaults.
uint64_t env_u64(const char* name, uint64_t dflt) {
  const char* v = std::getenv(name);
  if (!v || !*v) return dflt;
  return std::strtoull(v, nullptr, 0);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

int emit_verdict(const Verdict& v, unsigned samples) {
  nlohmann::json j;
  j["verdict"] = verdict_name(v.kind);
  j["samples"] = samples;
  if (!v.evidence.empty()) j["counterexample"] = v.evidence;
  std::cout << j.dump(2) << "\n";
  return v.equivalent() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rvfx: event-trace RISC-V simulator and trace-equivalence checkers"};
  app.require_subcommand(1);

  uint64_t fuel = env_u64("RVFX_FUEL", 10'000'000);
  uint64_t samples = env_u64("RVFX_SAMPLES", 1000);
  uint64_t seed = env_u64("RVFX_SEED", 1);

  // run
  std::string elf_path, trace_path;
  unsigned xlen_flag = 0;
  auto* run_cmd = app.add_subcommand("run", "Run an ELF to HTIF exit");
  run_cmd->add_option("elf", elf_path, "ELF executable")->required();
  run_cmd->add_option("--fuel", fuel, "max instructions");
  run_cmd->add_option("--trace", trace_path, "write JSONL event trace");
  run_cmd->add_option("--xlen", xlen_flag, "override XLEN (32 or 64)");

  // test-suite
  std::string suite_dir, filter = "*";
  auto* suite_cmd = app.add_subcommand("test-suite", "Run a directory of riscv-tests binaries");
  suite_cmd->add_option("dir", suite_dir, "directory of test ELFs")->required();
  suite_cmd->add_option("--filter", filter, "filename glob");
  suite_cmd->add_option("--fuel", fuel, "max instructions per test");

  // validate-reorder
  std::string asm_a, asm_b;
  auto* reorder_cmd = app.add_subcommand("validate-reorder",
                                         "Check two instruction sequences equivalent");
  reorder_cmd->add_option("a", asm_a, "first assembly file")->required();
  reorder_cmd->add_option("b", asm_b, "second assembly file")->required();
  reorder_cmd->add_option("--samples", samples, "sample count");
  reorder_cmd->add_option("--seed", seed, "RNG seed");

  // check-alu
  auto* alu_cmd = app.add_subcommand("check-alu", "ALU refinement check");
  alu_cmd->add_option("--samples", samples, "samples per op");
  alu_cmd->add_option("--seed", seed, "RNG seed");

  // check-crosslevel
  auto* cross_cmd = app.add_subcommand("check-crosslevel", "Micro-IR vs ISA cross-level check");
  cross_cmd->add_option("--samples", samples, "sample count");
  cross_cmd->add_option("--seed", seed, "RNG seed");

  // disasm
  std::string disasm_path;
  auto* dis_cmd = app.add_subcommand("disasm", "Disassemble an ELF's loadable segments");
  dis_cmd->add_option("elf", disasm_path, "ELF executable")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) {
      LoadedImage img = load_elf_file(elf_path);
      if (xlen_flag == 32 || xlen_flag == 64) img.xlen = xlen_flag;
      MachineState s = machine_from_image(img);
      if (!s.tohost_addr)
        std::cerr << "warning: no tohost symbol; running on fuel only\n";
      std::ofstream trace_out;
      std::unique_ptr<TraceWriter> tw;
      EventSink sink;
      if (!trace_path.empty()) {
        trace_out.open(trace_path);
        if (!trace_out) throw std::runtime_error("cannot open " + trace_path);
        tw = std::make_unique<TraceWriter>(trace_out);
        sink = [&](const Event& e, const Response& r) { tw->emit(e, r); };
      }
      RunOutcome out = run(s, fuel, sink);
      switch (out.kind) {
        case RunKind::HtifExit: {
          bool pass = out.htif == 1;
          std::cout << (pass ? "PASS" : "FAIL (case " + std::to_string(out.htif >> 1) + ")")
                    << " after " << out.steps << " steps\n";
          return pass ? 0 : 1;
        }
        case RunKind::Wfi:
          std::cout << "WFI after " << out.steps << " steps\n";
          return 0;
        case RunKind::OutOfFuel:
          std::cout << "OUT OF FUEL after " << out.steps << " steps\n";
          return 1;
      }
      return 1;
    }

    if (*suite_cmd) {
      SuiteReport rep = run_suite(suite_dir, filter, fuel);
      std::map<std::string, std::pair<unsigned, unsigned>> by_ext;  // passed/total files
      for (const auto& f : rep.files) {
        std::cout << (f.passed ? "PASS" : "FAIL") << "  " << f.name;
        if (!f.passed && !f.error.empty()) std::cout << "  (" << f.error << ")";
        std::cout << "\n";
        auto& e = by_ext[f.arch + " " + f.extension];
        e.second++;
        if (f.passed) e.first++;
      }
      std::cout << "----\n";
      for (auto& [k, v] : by_ext)
        std::cout << k << ": " << v.first << "/" << v.second << " files\n";
      std::cout << "total: " << rep.passed_files() << "/" << rep.total_files() << " files, "
                << rep.total_cases() << " cases\n";
      return rep.all_passed() ? 0 : 1;
    }

    if (*reorder_cmd) {
      ReorderConfig cfg;
      cfg.samples = unsigned(samples);
      cfg.seed = seed;
      Verdict v = validate_reorder_files(read_file(asm_a), read_file(asm_b), cfg);
      return emit_verdict(v, unsigned(samples));
    }

    if (*alu_cmd) {
      AluCheckConfig cfg;
      cfg.samples = unsigned(samples);
      cfg.seed = seed;
      return emit_verdict(check_alu_refinement(cfg), unsigned(samples));
    }

    if (*cross_cmd) {
      CrosslevelConfig cfg;
      cfg.samples = unsigned(samples);
      cfg.seed = seed;
      return emit_verdict(check_crosslevel(cfg), unsigned(samples));
    }

    if (*dis_cmd) {
      LoadedImage img = load_elf_file(disasm_path);
      for (const auto& seg : img.segments) {
        for (size_t off = 0; off + 4 <= seg.bytes.size(); off += 4) {
          uint32_t w = uint32_t(seg.bytes[off]) | uint32_t(seg.bytes[off + 1]) << 8 |
                       uint32_t(seg.bytes[off + 2]) << 16 | uint32_t(seg.bytes[off + 3]) << 24;
          char addr[32];
          snprintf(addr, sizeof(addr), "%08llx", (unsigned long long)(seg.paddr + off));
          char word[16];
          snprintf(word, sizeof(word), "%08x", w);
          std::cout << addr << ":  " << word << "  " << disassemble(decode(w, img.xlen)) << "\n";
        }
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
