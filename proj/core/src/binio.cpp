#include "unlock/binio.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "unlock/errors.hpp"

namespace unlock {

static_assert(sizeof(float) == 4, "f32 codecs assume 4-byte IEEE floats");

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open for reading: " + path.string());
  }
  std::vector<std::uint8_t> bytes;
  in.seekg(0, std::ios::end);
  const auto size = in.tellg();
  if (size < 0) {
    throw IoError("cannot determine size of: " + path.string());
  }
  bytes.resize(static_cast<std::size_t>(size));
  in.seekg(0, std::ios::beg);
  if (size > 0) {
    in.read(reinterpret_cast<char*>(bytes.data()), size);
  }
  if (!in) {
    throw IoError("short read: " + path.string());
  }
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open for writing: " + path.string());
  }
  if (!bytes.empty()) {
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  out.flush();
  if (!out) {
    throw IoError("short write: " + path.string());
  }
}

void ByteWriter::f32le(float v) {
  std::uint32_t u;
  std::memcpy(&u, &v, 4);
  if constexpr (std::endian::native == std::endian::big) {
    u = ((u & 0xFFu) << 24) | ((u & 0xFF00u) << 8) | ((u >> 8) & 0xFF00u) | (u >> 24);
  }
  u32le(u);
}

void ByteWriter::bytes(const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  out_.insert(out_.end(), p, p + n);
}

void ByteReader::need(std::size_t n) {
  if (remaining() < n) {
    throw IoError(path_ + ": truncated, needed " + std::to_string(n) + " more bytes at offset " +
                  std::to_string(pos_));
  }
}

std::uint8_t ByteReader::u8() {
  need(1);
  return bytes_[pos_++];
}

std::uint32_t ByteReader::u32le() {
  need(4);
  const std::uint32_t v = static_cast<std::uint32_t>(bytes_[pos_]) |
                          (static_cast<std::uint32_t>(bytes_[pos_ + 1]) << 8) |
                          (static_cast<std::uint32_t>(bytes_[pos_ + 2]) << 16) |
                          (static_cast<std::uint32_t>(bytes_[pos_ + 3]) << 24);
  pos_ += 4;
  return v;
}

float ByteReader::f32le() {
  std::uint32_t u = u32le();
  if constexpr (std::endian::native == std::endian::big) {
    u = ((u & 0xFFu) << 24) | ((u & 0xFF00u) << 8) | ((u >> 8) & 0xFF00u) | (u >> 24);
  }
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

void ByteReader::raw(void* dst, std::size_t n) {
  need(n);
  std::memcpy(dst, bytes_.data() + pos_, n);
  pos_ += n;
}

void ByteReader::expect_magic(const char magic[4]) {
  need(4);
  if (std::memcmp(bytes_.data() + pos_, magic, 4) != 0) {
    throw IoError(path_ + ": bad magic, expected \"" + std::string(magic, 4) + "\"");
  }
  pos_ += 4;
}

void ByteReader::expect_end() {
  if (remaining() != 0) {
    throw IoError(path_ + ": " + std::to_string(remaining()) + " trailing bytes");
  }
}

}  // namespace unlock
