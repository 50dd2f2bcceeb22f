#pragma once

#include <filesystem>

#include "unlock/mask.hpp"

namespace unlock {

// Mask container: magic "ULKM", then u32 height, u32 width, u32 run count and
// the runs themselves, all little-endian. Runs follow the canonical in-memory
// convention (zeros first, first run may be empty).
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask(const std::filesystem::path& path);

}  // namespace unlock
