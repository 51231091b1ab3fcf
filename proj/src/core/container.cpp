#include "core/container.hpp"

#include <cstring>
#include <fstream>

#include "core/common.hpp"
#include "core/hash.hpp"

namespace cluedex {

namespace {

constexpr char kMagic[4] = {'C', 'L', 'D', 'X'};
constexpr std::size_t kNameLen = 8;

std::uint64_t align8(std::uint64_t off) { return (off + 7) & ~std::uint64_t(7); }

}  // namespace

void ContainerWriter::add_section(const std::string& name, BinaryWriter&& payload) {
  if (name.empty() || name.size() > kNameLen) {
    throw_error(ErrorCode::kInvalidArgument, "section name must be 1..8 chars: " + name);
  }
  for (const auto& [existing, payload_] : sections_) {
    if (existing == name) {
      throw_error(ErrorCode::kInvalidArgument, "duplicate section name: " + name);
    }
  }
  sections_.emplace_back(name, std::move(payload).take());
}

std::uint64_t ContainerWriter::content_hash() const {
  std::uint64_t hash = kFnvOffset;
  for (const auto& [name, payload] : sections_) {
    hash = fnv1a64(payload.data(), payload.size(), hash);
  }
  return hash;
}

std::uint64_t ContainerWriter::write(const std::string& path) const {
  const std::uint64_t hash = content_hash();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw_error(ErrorCode::kIo, "cannot open for writing: " + path);

  BinaryWriter header;
  header.bytes(kMagic, 4);
  header.u32(kContainerVersion);
  header.u64(hash);
  header.u32(static_cast<std::uint32_t>(sections_.size()));

  std::uint64_t table_size = sections_.size() * (kNameLen + 16);
  std::uint64_t offset = align8(header.size() + table_size);
  for (const auto& [name, payload] : sections_) {
    char namebuf[kNameLen] = {0};
    std::memcpy(namebuf, name.data(), name.size());
    header.bytes(namebuf, kNameLen);
    header.u64(offset);
    header.u64(payload.size());
    offset = align8(offset + payload.size());
  }

  out.write(header.data().data(), static_cast<std::streamsize>(header.size()));
  std::uint64_t pos = header.size();
  static const char zeros[8] = {0};
  for (const auto& [name, payload] : sections_) {
    std::uint64_t aligned = align8(pos);
    if (aligned > pos) out.write(zeros, static_cast<std::streamsize>(aligned - pos));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    pos = aligned + payload.size();
  }
  if (!out) throw_error(ErrorCode::kIo, "write failed: " + path);
  return hash;
}

ContainerReader::ContainerReader(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw_error(ErrorCode::kIo, "cannot open: " + path);
  auto size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);
  data_.resize(size);
  in.read(data_.data(), static_cast<std::streamsize>(size));
  if (!in) throw_error(ErrorCode::kIo, "read failed: " + path);

  BinaryReader r(std::span<const char>(data_.data(), data_.size()));
  char magic[4];
  if (size < 4) throw_error(ErrorCode::kFormat, "corrupt file: too short for magic: " + path);
  std::memcpy(magic, data_.data(), 4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw_error(ErrorCode::kFormat, "not a cluedex container (bad magic): " + path);
  }
  r = BinaryReader(std::span<const char>(data_.data() + 4, data_.size() - 4));
  version_ = r.u32();
  if (version_ != kContainerVersion) {
    throw_error(ErrorCode::kFormat,
                "unsupported format version " + std::to_string(version_) +
                    " (expected " + std::to_string(kContainerVersion) + ")");
  }
  content_hash_ = r.u64();
  std::uint32_t count = r.u32();

  std::uint64_t hash = kFnvOffset;
  for (std::uint32_t i = 0; i < count; ++i) {
    char namebuf[kNameLen + 1] = {0};
    for (std::size_t j = 0; j < kNameLen; ++j) namebuf[j] = static_cast<char>(r.u8());
    std::uint64_t off = r.u64();
    std::uint64_t len = r.u64();
    if (off + len > size || off + len < off) {
      throw_error(ErrorCode::kFormat, "corrupt file (format version " +
                                          std::to_string(version_) +
                                          "): section out of bounds: " + path);
    }
    table_[std::string(namebuf)] = {off, len};
    hash = fnv1a64(data_.data() + off, len, hash);
  }
  if (hash != content_hash_) {
    throw_error(ErrorCode::kFormat, "corrupt file (format version " +
                                        std::to_string(version_) +
                                        "): content hash mismatch: " + path);
  }
}

bool ContainerReader::has_section(const std::string& name) const {
  return table_.count(name) > 0;
}

BinaryReader ContainerReader::section(const std::string& name) const {
  auto it = table_.find(name);
  if (it == table_.end()) {
    throw_error(ErrorCode::kFormat, "missing section '" + name + "'");
  }
  return BinaryReader(
      std::span<const char>(data_.data() + it->second.first, it->second.second));
}

}  // namespace cluedex
