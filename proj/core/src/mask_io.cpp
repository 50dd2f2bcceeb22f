#include "unlock/mask_io.hpp"

#include "unlock/binio.hpp"

namespace unlock {

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  const RunSequence runs = rle_encode(mask);
  ByteWriter w;
  w.text("ULKM");
  w.u32le(static_cast<std::uint32_t>(mask.height()));
  w.u32le(static_cast<std::uint32_t>(mask.width()));
  w.u32le(static_cast<std::uint32_t>(runs.size()));
  for (std::uint32_t run : runs) w.u32le(run);
  write_file_bytes(path, w.data());
}

BinaryMask read_mask(const std::filesystem::path& path) {
  ByteReader r(read_file_bytes(path), path.string());
  r.expect_magic("ULKM");
  const std::uint32_t height = r.u32le();
  const std::uint32_t width = r.u32le();
  const std::uint32_t count = r.u32le();
  RunSequence runs(count);
  for (std::uint32_t i = 0; i < count; ++i) runs[i] = r.u32le();
  r.expect_end();
  return rle_decode(runs, static_cast<int>(height), static_cast<int>(width));
}

}  // namespace unlock
