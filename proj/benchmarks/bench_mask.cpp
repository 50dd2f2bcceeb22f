#include <benchmark/benchmark.h>

#include "unlock/mask.hpp"
#include "unlock/rng.hpp"

namespace {

using namespace unlock;

// Blotchy test mask: random rectangles give realistic run statistics, unlike
// pure per-pixel noise which is the pathological worst case for RLE.
BinaryMask blotchy(int h, int w, std::uint64_t seed) {
  SplitMix64 rng(seed);
  BinaryMask m(h, w);
  for (int i = 0; i < 40; ++i) {
    const int r0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
    const int c0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(w)));
    const int rh = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(h / 4 + 1)));
    const int rw = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(w / 4 + 1)));
    for (int r = r0; r < std::min(h, r0 + rh); ++r)
      for (int c = c0; c < std::min(w, c0 + rw); ++c) m.set(r, c, true);
  }
  return m;
}

void BM_RleEncode(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const BinaryMask m = blotchy(side, side, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(rle_encode(m));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m.pixel_count()));
}
BENCHMARK(BM_RleEncode)->Arg(128)->Arg(512);

void BM_RleDecode(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const RunSequence runs = rle_encode(blotchy(side, side, 1));
  for (auto _ : state) {
    benchmark::DoNotOptimize(rle_decode(runs, side, side));
  }
}
BENCHMARK(BM_RleDecode)->Arg(128)->Arg(512);

void BM_MaskAnd(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const BinaryMask a = blotchy(side, side, 1);
  const BinaryMask b = blotchy(side, side, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mask_and(a, b));
  }
}
BENCHMARK(BM_MaskAnd)->Arg(512);

void BM_IntersectionArea(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const BinaryMask a = blotchy(side, side, 1);
  const BinaryMask b = blotchy(side, side, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(intersection_area(a, b));
  }
}
BENCHMARK(BM_IntersectionArea)->Arg(512);

}  // namespace
