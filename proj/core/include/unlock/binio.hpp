#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace unlock {

// Byte-level helpers for the fixed little-endian binary formats. Everything
// goes through an in-memory byte vector so writes are atomic-ish (single
// ofstream write) and reads can be bounds-checked up front.

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

class ByteWriter {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32le(std::uint32_t v) {
    out_.push_back(static_cast<std::uint8_t>(v));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v >> 16));
    out_.push_back(static_cast<std::uint8_t>(v >> 24));
  }
  void f32le(float v);
  void bytes(const void* data, std::size_t n);
  void text(const std::string& s) { bytes(s.data(), s.size()); }

  const std::vector<std::uint8_t>& data() const { return out_; }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  // The path is only used to name the file in error messages.
  ByteReader(std::vector<std::uint8_t> bytes, std::string path)
      : bytes_(std::move(bytes)), path_(std::move(path)) {}

  std::uint8_t u8();
  std::uint32_t u32le();
  float f32le();
  void raw(void* dst, std::size_t n);
  void expect_magic(const char magic[4]);
  void expect_end();
  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::string& path() const { return path_; }

 private:
  void need(std::size_t n);

  std::vector<std::uint8_t> bytes_;
  std::string path_;
  std::size_t pos_ = 0;
};

}  // namespace unlock
