// Copyright 2026 The occamllm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "occamllm/errors.hpp"

namespace occamllm::io {

static_assert(std::endian::native == std::endian::little,
              "checkpoint formats are little-endian; add byte swapping for this target");

/// Append-only little-endian byte buffer.
class Writer {
 public:
  void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

  template <typename T>
  void pod(T v) {
    char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf_.insert(buf_.end(), raw, raw + sizeof(T));
  }

  void u8(std::uint8_t v) { pod(v); }
  void u32(std::uint32_t v) { pod(v); }
  void u64(std::uint64_t v) { pod(v); }
  void f32(float v) { pod(v); }
  void f64(double v) { pod(v); }

  /// u32 byte length followed by UTF-8 bytes.
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }

  const std::string& data() const { return buf_; }

 private:
  std::string buf_;
};

/// Bounds-checked reader; every failure reports the byte offset.
class Reader {
 public:
  Reader(std::string_view data, std::string what) : data_(data), what_(std::move(what)) {}

  std::string_view bytes(std::size_t n) {
    need(n);
    std::string_view out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::uint8_t u8() { return pod<std::uint8_t>(); }
  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  float f32() { return pod<float>(); }
  double f64() { return pod<double>(); }

  std::string str() {
    const std::uint32_t n = u32();
    return std::string(bytes(n));
  }

  void magic(std::string_view expected) {
    const std::size_t at = pos_;
    if (remaining() < expected.size() || bytes(expected.size()) != expected) {
      throw FormatError(what_ + ": bad magic at offset " + std::to_string(at) + ", expected \"" +
                        std::string(expected) + "\"");
    }
  }

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError(what_ + ": " + why + " at offset " + std::to_string(pos_));
  }

 private:
  void need(std::size_t n) const {
    if (remaining() < n) {
      throw FormatError(what_ + ": truncated at offset " + std::to_string(pos_) + " (need " +
                        std::to_string(n) + " bytes, " + std::to_string(remaining()) + " left)");
    }
  }

  std::string_view data_;
  std::string what_;
  std::size_t pos_ = 0;
};

std::string read_file(const std::string& path);
/// Writes to `path` through a temporary file and a rename.
void write_file(const std::string& path, std::string_view data);

}  // namespace occamllm::io
