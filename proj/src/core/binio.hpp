#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace cluedex {

// Append-only little-endian buffer writer. All container payloads are built
// through this so the on-disk layout never depends on host struct padding.
class BinaryWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) { raw(&v, sizeof(v)); }
  void u64(std::uint64_t v) { raw(&v, sizeof(v)); }
  void f64(double v) { raw(&v, sizeof(v)); }

  void bytes(const void* data, std::size_t len) { raw(data, len); }

  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }

  template <typename T>
  void vec(const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    u64(v.size());
    raw(v.data(), v.size() * sizeof(T));
  }

  const std::vector<char>& data() const { return buf_; }
  std::vector<char> take() && { return std::move(buf_); }
  std::size_t size() const { return buf_.size(); }

 private:
  void raw(const void* data, std::size_t len) {
    const char* p = static_cast<const char*>(data);
    buf_.insert(buf_.end(), p, p + len);
  }

  std::vector<char> buf_;
};

// Bounds-checked reader over a byte span. Truncation anywhere surfaces as a
// format error instead of UB.
class BinaryReader {
 public:
  explicit BinaryReader(std::span<const char> data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }

  std::uint32_t u32() {
    std::uint32_t v;
    std::memcpy(&v, take(sizeof(v)).data(), sizeof(v));
    return v;
  }

  std::uint64_t u64() {
    std::uint64_t v;
    std::memcpy(&v, take(sizeof(v)).data(), sizeof(v));
    return v;
  }

  double f64() {
    double v;
    std::memcpy(&v, take(sizeof(v)).data(), sizeof(v));
    return v;
  }

  std::string str() {
    std::uint32_t len = u32();
    auto s = take(len);
    return std::string(s.data(), s.size());
  }

  void read_into(void* dst, std::size_t len) {
    auto s = take(len);
    std::memcpy(dst, s.data(), len);
  }

  template <typename T>
  std::vector<T> vec() {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint64_t n = u64();
    if (n > data_.size() / sizeof(T) + 1) {
      throw_error(ErrorCode::kFormat, "corrupt file: array length exceeds section size");
    }
    auto s = take(n * sizeof(T));
    std::vector<T> v(n);
    std::memcpy(v.data(), s.data(), s.size());
    return v;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const char> take(std::size_t len) {
    if (pos_ + len > data_.size()) {
      throw_error(ErrorCode::kFormat, "corrupt file: truncated section");
    }
    auto s = data_.subspan(pos_, len);
    pos_ += len;
    return s;
  }

  std::span<const char> data_;
  std::size_t pos_ = 0;
};

}  // namespace cluedex
