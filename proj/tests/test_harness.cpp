#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "rvtrace/elf.hpp"
#include "rvtrace/suite.hpp"

using namespace rvtrace;

namespace {

std::filesystem::path progs_dir() {
  const char* d = std::getenv("RVFX_TEST_PROGS");
  REQUIRE(d != nullptr);
  return d;
}

std::vector<uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  REQUIRE(f.good());
  return std::vector<uint8_t>((std::istreambuf_iterator<char>(f)),
                              std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("ELF loader rejects malformed inputs") {
  REQUIRE_THROWS_AS(load_elf({}), ElfError);
  REQUIRE_THROWS_AS(load_elf({0x7F, 'E', 'L', 'F'}), ElfError);  // truncated header
  REQUIRE_THROWS_AS(load_elf(std::vector<uint8_t>(0x40, 0)), ElfError);  // no magic

  std::vector<uint8_t> good = slurp(progs_dir() / "rv32ui-p-arith");
  REQUIRE_NOTHROW(load_elf(good));

  std::vector<uint8_t> big_endian = good;
  big_endian[5] = 2;
  REQUIRE_THROWS_AS(load_elf(big_endian), ElfError);

  std::vector<uint8_t> wrong_machine = good;
  wrong_machine[0x12] = 0x3E;  // x86-64
  REQUIRE_THROWS_AS(load_elf(wrong_machine), ElfError);

  std::vector<uint8_t> truncated(good.begin(), good.begin() + good.size() / 3);
  REQUIRE_THROWS_AS(load_elf(truncated), ElfError);

  std::vector<uint8_t> bad_class = good;
  bad_class[4] = 3;
  REQUIRE_THROWS_AS(load_elf(bad_class), ElfError);
}

TEST_CASE("ELF loader extracts segments, entry, and symbols") {
  LoadedImage img32 = load_elf_file((progs_dir() / "rv32ui-p-arith").string());
  REQUIRE(img32.xlen == 32);
  REQUIRE(img32.entry == 0x80000000);
  REQUIRE(!img32.segments.empty());
  REQUIRE(img32.symbols.count("tohost") == 1);
  REQUIRE(img32.symbols.at("tohost") >= 0x80000000);

  LoadedImage img64 = load_elf_file((progs_dir() / "rv64ui-p-arith").string());
  REQUIRE(img64.xlen == 64);
  REQUIRE(img64.entry == 0x80000000);

  // the image maps into machine memory with the first instruction at entry
  MachineState s = machine_from_image(img32);
  REQUIRE(s.pc == img32.entry);
  REQUIRE(s.tohost_addr.has_value());
  auto w = s.mem.read(img32.entry, Width::Word);
  REQUIRE(w.is_ok());
  REQUIRE(w.unwrap().value() != 0);
}

TEST_CASE("test-file runner classifies and counts cases") {
  FileResult fr = run_test_file(progs_dir() / "rv64um-p-muldiv");
  REQUIRE(fr.loaded);
  REQUIRE(fr.passed);
  REQUIRE(fr.arch == "rv64");
  REQUIRE(fr.extension == "M");
  REQUIRE(fr.cases >= 8);

  FileResult fcsr = run_test_file(progs_dir() / "rv32mi-p-csr");
  REQUIRE(fcsr.extension == "Zicsr");
  REQUIRE(fcsr.passed);
}

TEST_CASE("the full cross-compiled program suite passes") {
  SuiteReport rep = run_suite(progs_dir().string(), "rv*");
  for (const auto& f : rep.files) {
    INFO(f.name << ": " << (f.passed ? "pass" : "FAIL " + f.error));
    CHECK(f.passed);
  }
  REQUIRE(rep.total_files() == 14);
  REQUIRE(rep.all_passed());
  REQUIRE(rep.total_cases() > 100);
}

TEST_CASE("suite filtering") {
  SuiteReport rep = run_suite(progs_dir().string(), "rv32*");
  REQUIRE(rep.total_files() == 7);
  for (const auto& f : rep.files) REQUIRE(f.arch == "rv32");
  SuiteReport none = run_suite(progs_dir().string(), "does-not-exist*");
  REQUIRE(none.total_files() == 0);
  REQUIRE(!none.all_passed());  // an empty suite is not a passing suite
}
