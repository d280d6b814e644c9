#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "tspn/inner_dp.hpp"
#include "tspn/rng.hpp"
#include "tspn/verify.hpp"

namespace tspn::testing {

// Leaf square at odd origin with side 16 and portal spacing 2, so portals sit
// at odd coordinates and segments at even x.
inline Portal square_portal(const Square& sq, int side, int k) {
  const double d = 2.0 * k;
  Point p;
  switch (side) {
    case 0: p = {sq.x0 + d, sq.y0}; break;
    case 1: p = {sq.x1(), sq.y0 + d}; break;
    case 2: p = {sq.x0 + d, sq.y1()}; break;
    default: p = {sq.x0, sq.y0 + d}; break;
  }
  return {side * 100 + k, p};
}

inline LeafProblem random_leaf(std::uint64_t seed, int max_segments, int max_pairs,
                               int max_required) {
  return tspn::random_leaf(seed, max_segments, max_pairs, max_required);
}

}  // namespace tspn::testing
