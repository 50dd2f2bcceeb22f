#include "unlock/mask.hpp"

#include <bit>
#include <limits>
#include <string>

namespace unlock {

namespace {

std::string shape_str(const BinaryMask& m) {
  return std::to_string(m.height()) + "x" + std::to_string(m.width());
}

void require_same_shape(const BinaryMask& a, const BinaryMask& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionMismatch(std::string(op) + ": operand shapes differ, " + shape_str(a) +
                            " vs " + shape_str(b));
  }
}

// Clears the bits past pixel_count in the last word.
void trim_tail(std::vector<std::uint64_t>& words, std::size_t bits) {
  if (words.empty()) return;
  const unsigned used = bits & 63;
  if (used != 0) {
    words.back() &= (1ULL << used) - 1;
  }
}

}  // namespace

BinaryMask::BinaryMask(int height, int width) : height_(height), width_(width) {
  if (height < 0 || width < 0) {
    throw DimensionMismatch("BinaryMask: negative dimensions " + std::to_string(height) + "x" +
                            std::to_string(width));
  }
  words_.assign((pixel_count() + 63) / 64, 0);
}

BinaryMask BinaryMask::full(int height, int width) {
  BinaryMask m(height, width);
  for (auto& w : m.words_) w = ~0ULL;
  trim_tail(m.words_, m.pixel_count());
  return m;
}

std::size_t BinaryMask::bit_index(int r, int c) const {
  if (r < 0 || r >= height_ || c < 0 || c >= width_) {
    throw DimensionMismatch("BinaryMask: pixel (" + std::to_string(r) + "," + std::to_string(c) +
                            ") outside " + shape_str(*this));
  }
  return static_cast<std::size_t>(r) * width_ + c;
}

std::size_t BinaryMask::area() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += std::popcount(w);
  return n;
}

BinaryMask::Box BinaryMask::bounding_box() const {
  Box box;
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      if (!get(r, c)) continue;
      if (!box.valid()) {
        box = {r, c, r, c};
      } else {
        if (r < box.r0) box.r0 = r;
        if (c < box.c0) box.c0 = c;
        if (r > box.r1) box.r1 = r;
        if (c > box.c1) box.c1 = c;
      }
    }
  }
  return box;
}

BinaryMask mask_and(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask_and");
  BinaryMask out(a.height_, a.width_);
  for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] = a.words_[i] & b.words_[i];
  return out;
}

BinaryMask mask_or(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask_or");
  BinaryMask out(a.height_, a.width_);
  for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] = a.words_[i] | b.words_[i];
  return out;
}

BinaryMask mask_diff(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "mask_diff");
  BinaryMask out(a.height_, a.width_);
  for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] = a.words_[i] & ~b.words_[i];
  return out;
}

BinaryMask mask_not(const BinaryMask& a) {
  BinaryMask out(a.height_, a.width_);
  for (std::size_t i = 0; i < out.words_.size(); ++i) out.words_[i] = ~a.words_[i];
  trim_tail(out.words_, out.pixel_count());
  return out;
}

BinaryMask mask_algebra(const BinaryMask& a, const BinaryMask& b, MaskOp op) {
  switch (op) {
    case MaskOp::And:
      return mask_and(a, b);
    case MaskOp::Or:
      return mask_or(a, b);
    case MaskOp::Diff:
      return mask_diff(a, b);
  }
  throw Error("mask_algebra: unknown op");
}

std::size_t intersection_area(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "intersection_area");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.words_.size(); ++i) {
    n += std::popcount(a.words_[i] & b.words_[i]);
  }
  return n;
}

bool is_subset(const BinaryMask& inner, const BinaryMask& outer) {
  require_same_shape(inner, outer, "is_subset");
  for (std::size_t i = 0; i < inner.words_.size(); ++i) {
    if (inner.words_[i] & ~outer.words_[i]) return false;
  }
  return true;
}

bool intersects(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "intersects");
  for (std::size_t i = 0; i < a.words_.size(); ++i) {
    if (a.words_[i] & b.words_[i]) return true;
  }
  return false;
}

namespace {

// First bit index >= pos whose value differs from `current`, or n if the rest
// of the mask is one uniform run. Skips whole words of the current value.
std::size_t scan_run_end(const std::vector<std::uint64_t>& words, std::size_t pos, std::size_t n,
                         bool current) {
  while (pos < n) {
    const std::size_t wi = pos >> 6;
    // Flip so we are always searching for the first set bit.
    std::uint64_t w = current ? ~words[wi] : words[wi];
    w &= ~0ULL << (pos & 63);
    if (wi == (n - 1) >> 6) {
      // Last word: bits past n are zero in storage, which reads as a spurious
      // transition when scanning a run of ones. Mask them out of the search.
      const unsigned used = n & 63;
      if (used != 0) w &= (1ULL << used) - 1;
    }
    if (w != 0) {
      return (wi << 6) + static_cast<std::size_t>(std::countr_zero(w));
    }
    pos = (wi + 1) << 6;
  }
  return n;
}

}  // namespace

RunSequence rle_encode(const BinaryMask& mask) {
  const std::size_t n = mask.pixel_count();
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw Error("rle_encode: mask too large for 32-bit run lengths");
  }
  RunSequence runs;
  std::size_t pos = 0;
  bool current = false;  // zeros first
  while (pos < n) {
    const std::size_t end = scan_run_end(mask.words(), pos, n, current);
    runs.push_back(static_cast<std::uint32_t>(end - pos));
    pos = end;
    current = !current;
  }
  return runs;
}

void BinaryMask::set_bit_range(std::size_t begin, std::size_t end) {
  if (begin >= end) return;
  const std::size_t wb = begin >> 6;
  const std::size_t we = (end - 1) >> 6;
  const std::uint64_t first = ~0ULL << (begin & 63);
  const std::uint64_t last = (end & 63) ? ((1ULL << (end & 63)) - 1) : ~0ULL;
  if (wb == we) {
    words_[wb] |= first & last;
    return;
  }
  words_[wb] |= first;
  for (std::size_t w = wb + 1; w < we; ++w) words_[w] = ~0ULL;
  words_[we] |= last;
}

BinaryMask rle_decode(const RunSequence& runs, int height, int width) {
  BinaryMask mask(height, width);
  const std::size_t n = mask.pixel_count();
  std::size_t total = 0;
  for (std::uint32_t r : runs) total += r;
  if (total != n) {
    throw SumMismatch("rle_decode: run lengths sum to " + std::to_string(total) + ", expected " +
                      std::to_string(n));
  }
  std::size_t pos = 0;
  bool current = false;
  for (std::uint32_t run : runs) {
    if (current) mask.set_bit_range(pos, pos + run);
    pos += run;
    current = !current;
  }
  return mask;
}

}  // namespace unlock
