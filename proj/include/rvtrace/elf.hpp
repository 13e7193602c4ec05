#pragma once

#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace rvtrace {

struct ElfError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Segment {
  uint64_t paddr = 0;
  std::vector<uint8_t> bytes;  // filesz data zero-padded to memsz
};

struct LoadedImage {
  unsigned xlen = 64;  // ELF32 -> 32, ELF64 -> 64
  uint64_t entry = 0;
  std::vector<Segment> segments;
  std::map<std::string, uint64_t> symbols;
};

namespace detail {

inline uint64_t rd_le(const std::vector<uint8_t>& b, size_t off, size_t n) {
  if (off + n > b.size()) throw ElfError("truncated ELF");
  uint64_t v = 0;
  for (size_t i = 0; i < n; i++) v |= uint64_t(b[off + i]) << (8 * i);
  return v;
}

}  // namespace detail

inline LoadedImage load_elf(const std::vector<uint8_t>& b) {
  using detail::rd_le;
  if (b.size() < 0x40 || b[0] != 0x7F || b[1] != 'E' || b[2] != 'L' || b[3] != 'F')
    throw ElfError("not an ELF file");
  if (b[5] != 1) throw ElfError("big-endian ELF not supported");
  bool is64 = b[4] == 2;
  if (b[4] != 1 && b[4] != 2) throw ElfError("bad ELF class");

  LoadedImage img;
  img.xlen = is64 ? 64 : 32;

  uint64_t e_machine = rd_le(b, 0x12, 2);
  if (e_machine != 243) throw ElfError("not a RISC-V ELF");

  uint64_t e_entry, e_phoff, e_shoff;
  unsigned e_phentsize, e_phnum, e_shentsize, e_shnum;
  if (is64) {
    e_entry = rd_le(b, 0x18, 8);
    e_phoff = rd_le(b, 0x20, 8);
    e_shoff = rd_le(b, 0x28, 8);
    e_phentsize = unsigned(rd_le(b, 0x36, 2));
    e_phnum = unsigned(rd_le(b, 0x38, 2));
    e_shentsize = unsigned(rd_le(b, 0x3A, 2));
    e_shnum = unsigned(rd_le(b, 0x3C, 2));
  } else {
    e_entry = rd_le(b, 0x18, 4);
    e_phoff = rd_le(b, 0x1C, 4);
    e_shoff = rd_le(b, 0x20, 4);
    e_phentsize = unsigned(rd_le(b, 0x2A, 2));
    e_phnum = unsigned(rd_le(b, 0x2C, 2));
    e_shentsize = unsigned(rd_le(b, 0x2E, 2));
    e_shnum = unsigned(rd_le(b, 0x30, 2));
  }
  img.entry = e_entry;

  for (unsigned i = 0; i < e_phnum; i++) {
    size_t ph = e_phoff + size_t(i) * e_phentsize;
    uint64_t p_type = rd_le(b, ph, 4);
    if (p_type != 1) continue;  // PT_LOAD only
    uint64_t p_offset, p_paddr, p_filesz, p_memsz;
    if (is64) {
      p_offset = rd_le(b, ph + 0x08, 8);
      p_paddr = rd_le(b, ph + 0x18, 8);
      p_filesz = rd_le(b, ph + 0x20, 8);
      p_memsz = rd_le(b, ph + 0x28, 8);
    } else {
      p_offset = rd_le(b, ph + 0x04, 4);
      p_paddr = rd_le(b, ph + 0x0C, 4);
      p_filesz = rd_le(b, ph + 0x10, 4);
      p_memsz = rd_le(b, ph + 0x14, 4);
    }
    if (p_offset + p_filesz > b.size()) throw ElfError("segment beyond end of file");
    if (p_memsz < p_filesz) throw ElfError("memsz < filesz");
    if (p_memsz > (uint64_t(1) << 31)) throw ElfError("unreasonable segment size");
    Segment seg;
    seg.paddr = p_paddr;
    seg.bytes.assign(b.begin() + p_offset, b.begin() + p_offset + p_filesz);
    seg.bytes.resize(p_memsz, 0);
    img.segments.push_back(std::move(seg));
  }

  // Symbol table (for tohost/fromhost).
  for (unsigned i = 0; i < e_shnum; i++) {
    size_t sh = e_shoff + size_t(i) * e_shentsize;
    uint64_t sh_type = rd_le(b, sh + 4, 4);
    if (sh_type != 2) continue;  // SHT_SYMTAB
    uint64_t sh_offset, sh_size, sh_link, sh_entsize;
    if (is64) {
      sh_offset = rd_le(b, sh + 0x18, 8);
      sh_size = rd_le(b, sh + 0x20, 8);
      sh_link = rd_le(b, sh + 0x28, 4);
      sh_entsize = rd_le(b, sh + 0x38, 8);
    } else {
      sh_offset = rd_le(b, sh + 0x10, 4);
      sh_size = rd_le(b, sh + 0x14, 4);
      sh_link = rd_le(b, sh + 0x18, 4);
      sh_entsize = rd_le(b, sh + 0x24, 4);
    }
    size_t str_sh = e_shoff + size_t(sh_link) * e_shentsize;
    uint64_t str_off = is64 ? rd_le(b, str_sh + 0x18, 8) : rd_le(b, str_sh + 0x10, 4);
    uint64_t str_size = is64 ? rd_le(b, str_sh + 0x20, 8) : rd_le(b, str_sh + 0x14, 4);
    if (sh_entsize == 0) continue;
    for (uint64_t off = 0; off + sh_entsize <= sh_size; off += sh_entsize) {
      size_t sym = sh_offset + off;
      uint64_t st_name = rd_le(b, sym, 4);
      uint64_t st_value = is64 ? rd_le(b, sym + 8, 8) : rd_le(b, sym + 4, 4);
      if (st_name == 0 || st_name >= str_size) continue;
      size_t p = str_off + st_name;
      std::string name;
      while (p < b.size() && b[p]) name.push_back(char(b[p++]));
      if (!name.empty()) img.symbols.emplace(name, st_value);
    }
  }
  return img;
}

inline LoadedImage load_elf_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ElfError("cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  return load_elf(bytes);
}

}  // namespace rvtrace
