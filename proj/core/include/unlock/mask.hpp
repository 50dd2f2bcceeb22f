#pragma once

#include <cstdint>
#include <vector>

#include "unlock/errors.hpp"

namespace unlock {

using RunSequence = std::vector<std::uint32_t>;

// Dense binary mask over an H x W pixel grid, bit-packed into 64-bit words.
// Bit index is row-major (r * width + c). Tail bits past height*width are kept
// zero so word-wise algebra, popcounts and equality need no special casing.
//
// Masks are plain values: cheap to copy for small grids, safe to share by
// const reference across worker threads (no interior mutability).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width);

  static BinaryMask full(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }

  bool get(int r, int c) const {
    const std::size_t i = bit_index(r, c);
    return (words_[i >> 6] >> (i & 63)) & 1u;
  }

  void set(int r, int c, bool value) {
    const std::size_t i = bit_index(r, c);
    const std::uint64_t bit = 1ULL << (i & 63);
    if (value) {
      words_[i >> 6] |= bit;
    } else {
      words_[i >> 6] &= ~bit;
    }
  }

  // Number of set pixels.
  std::size_t area() const;

  bool empty() const { return area() == 0; }
  bool any() const { return !empty(); }

  bool same_shape(const BinaryMask& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  bool operator==(const BinaryMask& other) const {
    return height_ == other.height_ && width_ == other.width_ && words_ == other.words_;
  }

  // Tight bounding box of the set pixels as {r0, c0, r1, c1} with inclusive
  // ends. All -1 when the mask is empty.
  struct Box {
    int r0 = -1, c0 = -1, r1 = -1, c1 = -1;
    bool valid() const { return r0 >= 0; }
    int box_height() const { return r1 - r0 + 1; }
    int box_width() const { return c1 - c0 + 1; }
  };
  Box bounding_box() const;

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  std::size_t bit_index(int r, int c) const;
  void set_bit_range(std::size_t begin, std::size_t end);
  friend BinaryMask rle_decode(const RunSequence&, int, int);
  friend BinaryMask mask_and(const BinaryMask&, const BinaryMask&);
  friend BinaryMask mask_or(const BinaryMask&, const BinaryMask&);
  friend BinaryMask mask_diff(const BinaryMask&, const BinaryMask&);
  friend BinaryMask mask_not(const BinaryMask&);
  friend std::size_t intersection_area(const BinaryMask&, const BinaryMask&);
  friend bool is_subset(const BinaryMask&, const BinaryMask&);
  friend bool intersects(const BinaryMask&, const BinaryMask&);

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint64_t> words_;
};

// Word-parallel set algebra. Operands must share a shape; DimensionMismatch
// otherwise. diff(a, b) is defined as a AND NOT b.
BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_diff(const BinaryMask& a, const BinaryMask& b);
BinaryMask mask_not(const BinaryMask& a);

enum class MaskOp { And, Or, Diff };
BinaryMask mask_algebra(const BinaryMask& a, const BinaryMask& b, MaskOp op);

// |a AND b| without materializing the intersection.
std::size_t intersection_area(const BinaryMask& a, const BinaryMask& b);

bool is_subset(const BinaryMask& inner, const BinaryMask& outer);
bool intersects(const BinaryMask& a, const BinaryMask& b);

// Run-length encoding. Runs alternate zeros/ones starting with zeros, the
// first run may be empty when the mask starts with a set pixel, no other run
// is empty, and the lengths add up to height*width. A zero-pixel mask encodes
// to an empty sequence.
RunSequence rle_encode(const BinaryMask& mask);

// Rebuilds a mask from runs. Throws SumMismatch when the lengths do not add
// up to height*width. Non-canonical input (interior empty runs) is accepted;
// encoding always emits the canonical form.
BinaryMask rle_decode(const RunSequence& runs, int height, int width);

}  // namespace unlock
