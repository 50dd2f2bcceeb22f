#pragma once

#include <string>
#include <vector>

#include "unlock/classes.hpp"
#include "unlock/mask.hpp"
#include "unlock/rng.hpp"
#include "unlock/semantic.hpp"

namespace testutil {

// Builds a mask from rows of '0'/'1' separated by '|', e.g. "010|111".
inline unlock::BinaryMask mask_of(const std::string& spec) {
  std::vector<std::string> rows;
  std::string row;
  for (char ch : spec) {
    if (ch == '|') {
      rows.push_back(row);
      row.clear();
    } else {
      row.push_back(ch);
    }
  }
  rows.push_back(row);
  unlock::BinaryMask mask(int(rows.size()), int(rows[0].size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (rows[r][c] == '1') mask.set(int(r), int(c), true);
    }
  }
  return mask;
}

inline unlock::BinaryMask random_mask(unlock::SplitMix64& rng, int h, int w,
                                      int density_pct) {
  unlock::BinaryMask mask(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (rng.below(100) < std::uint64_t(density_pct)) mask.set(r, c, true);
    }
  }
  return mask;
}

// One stuff class 0 plus thing classes 1..things.
inline unlock::ClassTable small_palette(int things) {
  std::vector<unlock::ClassDef> defs{{0, "bg", unlock::ClassKind::Stuff}};
  for (int i = 1; i <= things; ++i) {
    defs.push_back({i, "t" + std::to_string(i), unlock::ClassKind::Thing});
  }
  return unlock::ClassTable(std::move(defs));
}

// Probability grid that puts `hot` mass on one plane per pixel, given by a
// label grid, and spreads the rest evenly.
inline unlock::SemanticPrediction one_hot(const std::vector<std::vector<int>>& plane_of_pixel,
                                          int num_planes, float hot = 1.0f) {
  const int h = int(plane_of_pixel.size());
  const int w = int(plane_of_pixel[0].size());
  unlock::SemanticPrediction sem(h, w, num_planes);
  const float off = num_planes > 1 ? (1.0f - hot) / float(num_planes - 1) : 0.0f;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int p = 0; p < num_planes; ++p) {
        sem.at(p, r, c) = p == plane_of_pixel[r][c] ? hot : off;
      }
    }
  }
  return sem;
}

}  // namespace testutil
