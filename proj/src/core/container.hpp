#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/binio.hpp"

namespace cluedex {

// Versioned binary container holding the knowledge base and its index as
// named sections. Layout (all little-endian, see docs/file_format.md):
//
//   magic "CLDX" | u32 version | u64 content_hash | u32 section_count
//   section table: { name[8] | u64 offset | u64 size } per section
//   payloads, each 8-byte aligned
//
// content_hash is FNV-1a over every payload byte in table order; a writer
// and reader pair agree on it or the file is rejected as corrupt. Offsets
// are absolute, sections are flat arrays: a loader may mmap the file and
// use sections in place without pointer fixups.
inline constexpr std::uint32_t kContainerVersion = 1;

class ContainerWriter {
 public:
  void add_section(const std::string& name, BinaryWriter&& payload);
  // Hash the sections would carry if written now.
  std::uint64_t content_hash() const;
  // Writes the file and returns the content hash.
  std::uint64_t write(const std::string& path) const;

 private:
  std::vector<std::pair<std::string, std::vector<char>>> sections_;
};

class ContainerReader {
 public:
  explicit ContainerReader(const std::string& path);

  bool has_section(const std::string& name) const;
  BinaryReader section(const std::string& name) const;
  std::uint64_t content_hash() const { return content_hash_; }
  std::uint32_t version() const { return version_; }

 private:
  std::vector<char> data_;
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> table_;
  std::uint64_t content_hash_ = 0;
  std::uint32_t version_ = 0;
};

}  // namespace cluedex
