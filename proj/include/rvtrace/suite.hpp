#pragma once

#include <algorithm>
#include <filesystem>
#include <fnmatch.h>
#include <set>

#include "rvtrace/elf.hpp"
#include "rvtrace/isa.hpp"
#include "rvtrace/machine.hpp"

namespace rvtrace {

inline MachineState machine_from_image(const LoadedImage& img) {
  MachineState s(img.xlen);
  for (const auto& seg : img.segments)
    s.mem.write_bytes(seg.paddr, seg.bytes.data(), seg.bytes.size());
  s.pc = img.entry;
  auto it = img.symbols.find("tohost");
  if (it != img.symbols.end()) s.tohost_addr = it->second;
  return s;
}

struct FileResult {
  std::string name;
  std::string arch;       // "rv32" / "rv64"
  std::string extension;  // "I", "M", "A", "F", "Zicsr", "?"
  bool loaded = false;
  bool passed = false;
  uint64_t fail_case = 0;  // meaningful when loaded && !passed && htif
  unsigned cases = 0;      // test cases discovered in the binary
  std::string error;
};

struct SuiteReport {
  std::vector<FileResult> files;

  unsigned total_files() const { return unsigned(files.size()); }
  unsigned passed_files() const {
    return unsigned(std::count_if(files.begin(), files.end(),
                                  [](const FileResult& f) { return f.passed; }));
  }
  unsigned total_cases() const {
    unsigned n = 0;
    for (auto& f : files) n += f.cases;
    return n;
  }
  bool all_passed() const { return passed_files() == total_files() && !files.empty(); }
};

namespace detail {

// riscv-tests naming: rv32ui-p-add, rv64um-p-mulw, rv32mi-p-csr, ...
inline void classify_test_name(const std::string& name, std::string& arch, std::string& ext) {
  arch = "?";
  ext = "?";
  if (name.rfind("rv32", 0) == 0) arch = "rv32";
  else if (name.rfind("rv64", 0) == 0) arch = "rv64";
  else return;
  std::string rest = name.substr(4);
  auto dash = rest.find('-');
  std::string cls = dash == std::string::npos ? rest : rest.substr(0, dash);
  if (cls == "ui") ext = "I";
  else if (cls == "um") ext = "M";
  else if (cls == "ua") ext = "A";
  else if (cls == "uf") ext = "F";
  else if (cls == "mi" || cls == "si") ext = "Zicsr";
}

// Test cases announce themselves by loading the case number into gp (x3).
// Count distinct `li gp, k` (addi x3, x0, k, k > 0) occurrences in the text.
inline unsigned count_test_cases(const LoadedImage& img) {
  std::set<int64_t> nums;
  for (const auto& seg : img.segments) {
    for (size_t off = 0; off + 4 <= seg.bytes.size(); off += 4) {
      uint32_t w = uint32_t(seg.bytes[off]) | uint32_t(seg.bytes[off + 1]) << 8 |
                   uint32_t(seg.bytes[off + 2]) << 16 | uint32_t(seg.bytes[off + 3]) << 24;
      // addi x3, x0, imm
      if ((w & 0x000FFFFF) == 0x00000193 && (w >> 20) != 0) {
        int64_t imm = int32_t(w) >> 20;
        if (imm > 0) nums.insert(imm);
      }
    }
  }
  return unsigned(nums.size());
}

}  // namespace detail

inline FileResult run_test_file(const std::filesystem::path& path, uint64_t fuel = 2'000'000) {
  FileResult fr;
  fr.name = path.filename().string();
  detail::classify_test_name(fr.name, fr.arch, fr.extension);
  try {
    LoadedImage img = load_elf_file(path.string());
    fr.loaded = true;
    fr.cases = detail::count_test_cases(img);
    MachineState s = machine_from_image(img);
    RunOutcome out = run(s, fuel);
    if (out.kind == RunKind::HtifExit) {
      if (out.htif == 1) {
        fr.passed = true;
      } else {
        fr.fail_case = out.htif >> 1;  // tohost = 2k+1 marks failing case k
        fr.error = "failed case " + std::to_string(fr.fail_case);
      }
    } else if (out.kind == RunKind::OutOfFuel) {
      fr.error = "out of fuel";
    } else {
      fr.error = "stopped in wfi";
    }
  } catch (const std::exception& e) {
    fr.error = e.what();
  }
  return fr;
}

inline SuiteReport run_suite(const std::string& dir, const std::string& filter = "*",
                             uint64_t fuel = 2'000'000) {
  std::vector<std::filesystem::path> paths;
  for (auto& de : std::filesystem::directory_iterator(dir)) {
    if (!de.is_regular_file()) continue;
    std::string name = de.path().filename().string();
    if (name.size() > 5 && name.substr(name.size() - 5) == ".dump") continue;
    if (fnmatch(filter.c_str(), name.c_str(), 0) != 0) continue;
    paths.push_back(de.path());
  }
  std::sort(paths.begin(), paths.end());
  SuiteReport rep;
  for (auto& p : paths) rep.files.push_back(run_test_file(p, fuel));
  return rep;
}

}  // namespace rvtrace
