#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <vector>

#include "helpers.hpp"
#include "unlock/binio.hpp"
#include "unlock/errors.hpp"
#include "unlock/image.hpp"
#include "unlock/mask.hpp"
#include "unlock/mask_io.hpp"
#include "unlock/rng.hpp"
#include "unlock/semantic.hpp"

using namespace unlock;
using testutil::mask_of;
using testutil::random_mask;

namespace {

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "unlock_core_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("rle worked examples") {
  // All zeros: one run covering everything.
  CHECK(rle_encode(BinaryMask(1, 4)) == RunSequence{4});
  // All ones: leading empty zero-run, then one full run.
  CHECK(rle_encode(BinaryMask::full(1, 4)) == RunSequence{0, 4});
  // 0110 alternates.
  CHECK(rle_encode(mask_of("0110")) == RunSequence{1, 2, 1});
  // Row-major flattening: 01|10 reads as 0110.
  CHECK(rle_encode(mask_of("01|10")) == RunSequence{1, 2, 1});
  // A zero-pixel mask encodes to nothing at all.
  CHECK(rle_encode(BinaryMask()) == RunSequence{});
}

TEST_CASE("rle decode rejects bad totals") {
  CHECK_THROWS_AS(rle_decode({3}, 1, 4), SumMismatch);
  CHECK_THROWS_AS(rle_decode({5}, 1, 4), SumMismatch);
  CHECK_THROWS_AS(rle_decode({}, 1, 1), SumMismatch);
}

TEST_CASE("rle decode accepts non-canonical runs") {
  // Interior empty runs merge away; the re-encode is canonical.
  const BinaryMask direct = rle_decode({1, 2, 0, 0, 1}, 1, 4);
  CHECK(direct == mask_of("0110"));
  CHECK(rle_encode(direct) == RunSequence{1, 2, 1});
}

TEST_CASE("rle round trip preserves masks and stays canonical") {
  SplitMix64 rng(0x5eed);
  for (int trial = 0; trial < 200; ++trial) {
    const int h = 1 + int(rng.below(64));
    const int w = 1 + int(rng.below(64));
    const BinaryMask mask = random_mask(rng, h, w, int(rng.below(101)));
    const RunSequence runs = rle_encode(mask);
    CHECK(rle_decode(runs, h, w) == mask);

    std::size_t total = 0;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      total += runs[i];
      // Only the first (zeros) run may be empty.
      if (i > 0) CHECK(runs[i] > 0);
    }
    if (mask.empty()) {
      CHECK(runs.size() == 1);
    } else {
      // Runs alternate starting with zeros and cover the whole grid, so the
      // count is even exactly when the flattened mask ends on a set pixel.
      const bool last_set = mask.get(h - 1, w - 1);
      CHECK((runs.size() % 2 == 0) == last_set);
    }
    CHECK(total == mask.pixel_count());
  }
}

TEST_CASE("mask algebra matches a per-pixel oracle") {
  SplitMix64 rng(0xa19e);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 1 + int(rng.below(40));
    const int w = 1 + int(rng.below(40));
    const BinaryMask a = random_mask(rng, h, w, 40);
    const BinaryMask b = random_mask(rng, h, w, 40);
    const BinaryMask u = mask_or(a, b);
    const BinaryMask n = mask_and(a, b);
    const BinaryMask d = mask_diff(a, b);
    const BinaryMask na = mask_not(a);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        REQUIRE(u.get(r, c) == (a.get(r, c) || b.get(r, c)));
        REQUIRE(n.get(r, c) == (a.get(r, c) && b.get(r, c)));
        REQUIRE(d.get(r, c) == (a.get(r, c) && !b.get(r, c)));
        REQUIRE(na.get(r, c) == !a.get(r, c));
      }
    }
    // Inclusion-exclusion ties the four areas together.
    CHECK(a.area() + b.area() == u.area() + n.area());
    CHECK(intersection_area(a, b) == n.area());
    CHECK(mask_diff(a, b) == mask_and(a, mask_not(b)));
    // The enum dispatcher is the same operations by another door.
    CHECK(mask_algebra(a, b, MaskOp::And) == n);
    CHECK(mask_algebra(a, b, MaskOp::Or) == u);
    CHECK(mask_algebra(a, b, MaskOp::Diff) == d);
  }
}

TEST_CASE("subset and intersection predicates") {
  const BinaryMask a = mask_of("0110|0110");
  const BinaryMask b = mask_of("0111|0110");
  const BinaryMask c = mask_of("1000|0000");
  CHECK(is_subset(a, b));
  CHECK_FALSE(is_subset(b, a));
  CHECK(is_subset(a, a));
  CHECK(intersects(a, b));
  CHECK_FALSE(intersects(a, c));
  // Empty mask is a subset of anything and intersects nothing.
  CHECK(is_subset(BinaryMask(2, 4), a));
  CHECK_FALSE(intersects(BinaryMask(2, 4), a));
}

TEST_CASE("mask shape errors") {
  const BinaryMask a(2, 3);
  const BinaryMask b(3, 2);
  CHECK_THROWS_AS(mask_and(a, b), DimensionMismatch);
  CHECK_THROWS_AS(mask_or(a, b), DimensionMismatch);
  CHECK_THROWS_AS(mask_diff(a, b), DimensionMismatch);
  CHECK_THROWS_AS(BinaryMask(-1, 3), DimensionMismatch);
}

TEST_CASE("full masks and bounding boxes") {
  const BinaryMask f = BinaryMask::full(5, 7);
  CHECK(f.area() == 35);
  const auto fb = f.bounding_box();
  CHECK(fb.r0 == 0);
  CHECK(fb.c0 == 0);
  CHECK(fb.r1 == 4);
  CHECK(fb.c1 == 6);

  const BinaryMask m = mask_of("0000|0110|0010|0000");
  const auto box = m.bounding_box();
  CHECK(box.r0 == 1);
  CHECK(box.c0 == 1);
  CHECK(box.r1 == 2);
  CHECK(box.c1 == 2);
  CHECK(box.box_height() == 2);
  CHECK(box.box_width() == 2);

  CHECK_FALSE(BinaryMask(3, 3).bounding_box().valid());
}

TEST_CASE("mask container golden bytes") {
  // 2x3 mask with rows 011 / 001 flattens to 011001: runs 1,2,2,1.
  const BinaryMask mask = mask_of("011|001");
  CHECK(rle_encode(mask) == RunSequence{1, 2, 2, 1});

  const auto path = temp_dir() / "golden.ulkm";
  write_mask(path, mask);

  ByteWriter expect;
  expect.text("ULKM");
  expect.u32le(2);
  expect.u32le(3);
  expect.u32le(4);
  for (std::uint32_t run : {1u, 2u, 2u, 1u}) expect.u32le(run);
  CHECK(read_file_bytes(path) == expect.data());

  CHECK(read_mask(path) == mask);
}

TEST_CASE("mask container rejects damage") {
  const auto dir = temp_dir();
  const auto path = dir / "damaged.ulkm";

  // Truncated after the header.
  write_mask(path, mask_of("011|001"));
  auto bytes = read_file_bytes(path);
  bytes.resize(bytes.size() - 2);
  write_file_bytes(path, bytes);
  CHECK_THROWS_WITH_AS(read_mask(path), doctest::Contains("damaged.ulkm"), IoError);

  // Wrong magic.
  write_mask(path, mask_of("011|001"));
  bytes = read_file_bytes(path);
  bytes[0] = 'X';
  write_file_bytes(path, bytes);
  CHECK_THROWS_AS(read_mask(path), IoError);

  // Trailing garbage is also an error, not silently ignored.
  write_mask(path, mask_of("011|001"));
  bytes = read_file_bytes(path);
  bytes.push_back(0);
  write_file_bytes(path, bytes);
  CHECK_THROWS_AS(read_mask(path), IoError);
}

TEST_CASE("byte reader primitives") {
  ByteWriter w;
  w.text("ULKM");
  w.u32le(0x01020304u);
  w.u8(9);
  auto bytes = w.take();

  ByteReader ok(bytes, "mem");
  ok.expect_magic("ULKM");
  CHECK(ok.u32le() == 0x01020304u);
  CHECK(ok.u8() == 9);
  CHECK(ok.remaining() == 0);
  ok.expect_end();

  ByteReader wrong(bytes, "mem");
  CHECK_THROWS_AS(wrong.expect_magic("ULKP"), IoError);

  ByteReader early(bytes, "mem");
  early.expect_magic("ULKM");
  CHECK_THROWS_AS(early.expect_end(), IoError);

  ByteReader short_read({1, 2}, "mem");
  CHECK_THROWS_AS(short_read.u32le(), IoError);
}

TEST_CASE("pnm golden bytes and round trip") {
  const auto dir = temp_dir();

  Image rgb(1, 2, 3);
  rgb.at(0, 0, 0) = 10;
  rgb.at(0, 0, 1) = 20;
  rgb.at(0, 0, 2) = 30;
  rgb.at(0, 1, 0) = 40;
  rgb.at(0, 1, 1) = 50;
  rgb.at(0, 1, 2) = 60;
  const auto ppm = dir / "two.ppm";
  write_pnm(ppm, rgb);

  ByteWriter expect;
  expect.text("P6\n2 1\n255\n");
  const std::uint8_t px[] = {10, 20, 30, 40, 50, 60};
  expect.bytes(px, sizeof px);
  CHECK(read_file_bytes(ppm) == expect.data());
  CHECK(read_pnm(ppm) == rgb);

  Image gray(2, 2, 1);
  gray.at(1, 1, 0) = 200;
  const auto pgm = dir / "two.pgm";
  write_pnm(pgm, gray);
  CHECK(read_file_bytes(pgm)[1] == '5');  // P5 for single channel
  CHECK(read_pnm(pgm) == gray);
}

TEST_CASE("pnm reader handles comments and rejects odd maxval") {
  const auto dir = temp_dir();
  const auto path = dir / "commented.pgm";

  ByteWriter w;
  w.text("P5 # format\n# a comment line\n 2\t1 #dims\n255\n");
  w.u8(7);
  w.u8(8);
  write_file_bytes(path, w.take());
  const Image img = read_pnm(path);
  CHECK(img.height == 1);
  CHECK(img.width == 2);
  CHECK(img.at(0, 0, 0) == 7);
  CHECK(img.at(0, 1, 0) == 8);

  ByteWriter bad;
  bad.text("P5\n2 1\n65535\n");
  bad.u8(0);
  bad.u8(0);
  write_file_bytes(path, bad.take());
  CHECK_THROWS_AS(read_pnm(path), IoError);
}

TEST_CASE("image crop") {
  Image img(3, 4, 1);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) img.at(r, c, 0) = std::uint8_t(10 * r + c);
  const Image sub = crop(img, 1, 2, 2, 2);
  CHECK(sub.height == 2);
  CHECK(sub.width == 2);
  CHECK(sub.at(0, 0, 0) == 12);
  CHECK(sub.at(0, 1, 0) == 13);
  CHECK(sub.at(1, 0, 0) == 22);
  CHECK(sub.at(1, 1, 0) == 23);
  CHECK_THROWS_AS(crop(img, 2, 3, 2, 2), DimensionMismatch);
}

TEST_CASE("probability grid golden bytes and round trip") {
  SemanticPrediction sem(1, 1, 2);
  sem.at(0, 0, 0) = 0.25f;
  sem.at(1, 0, 0) = 0.75f;

  const auto path = temp_dir() / "probs.ulkp";
  write_semantic_prob(path, sem);

  ByteWriter expect;
  expect.text("ULKP");
  expect.u32le(1);
  expect.u32le(1);
  expect.u32le(2);
  // 0.25f = 0x3E800000, 0.75f = 0x3F400000, little-endian on disk.
  for (std::uint8_t b : {0x00, 0x00, 0x80, 0x3E}) expect.u8(b);
  for (std::uint8_t b : {0x00, 0x00, 0x40, 0x3F}) expect.u8(b);
  CHECK(read_file_bytes(path) == expect.data());

  const SemanticPrediction back = read_semantic_prob(path);
  CHECK(back.height == 1);
  CHECK(back.width == 1);
  CHECK(back.num_classes == 2);
  CHECK(back.at(0, 0, 0) == 0.25f);
  CHECK(back.at(1, 0, 0) == 0.75f);
  back.validate_normalized();
}

TEST_CASE("probability normalization check") {
  SemanticPrediction sem(1, 2, 2);
  sem.at(0, 0, 0) = 0.5f;
  sem.at(1, 0, 0) = 0.5f;
  sem.at(0, 0, 1) = 0.9f;
  sem.at(1, 0, 1) = 0.2f;  // sums to 1.1
  CHECK_THROWS_AS(sem.validate_normalized(), ConfigError);
  sem.at(1, 0, 1) = 0.1f;
  sem.validate_normalized();
}

TEST_CASE("argmax ties resolve to the lowest plane") {
  SemanticPrediction sem(1, 1, 3);
  sem.at(0, 0, 0) = 0.4f;
  sem.at(1, 0, 0) = 0.4f;
  sem.at(2, 0, 0) = 0.2f;
  CHECK(sem.argmax_index(0, 0) == 0);
  CHECK(sem.max_prob(0, 0) == 0.4f);
}

TEST_CASE("semantic map round trip keeps sentinel labels") {
  SemanticMap map(2, 2, 0);
  map.at(0, 1) = 3;
  map.at(1, 0) = kUncertainLabel;
  map.at(1, 1) = kIgnoreLabel;

  const auto path = temp_dir() / "labels.pgm";
  write_semantic_map(path, map);
  CHECK(read_semantic_map(path) == map);

  CHECK(map.pixels_equal(kUncertainLabel) == mask_of("00|10"));
  CHECK(map.pixels_equal(0) == mask_of("10|00"));
}

TEST_CASE("deterministic rng basics") {
  SplitMix64 a(42), b(42), c(43);
  CHECK(a.next() == b.next());
  CHECK(a.next() == b.next());
  CHECK(a.next() != c.next());

  SplitMix64 r(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.unit();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const auto v = r.range(-3, 3);
    REQUIRE(v >= -3);
    REQUIRE(v <= 3);
    REQUIRE(r.below(10) < 10);
  }
}
