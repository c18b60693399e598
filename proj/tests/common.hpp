#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "droplet/geometry.hpp"
#include "droplet/grid.hpp"

namespace testutil {

using namespace droplet;

inline Shape disk(double x, double y, double r) { return Shape{Disk{{x, y}, r}}; }

inline SupportMask mask_from(GridPtr g, auto&& level_fn) {
  SupportMask m{g, std::vector<double>(g->size())};
  for (int j = 0; j < g->ny(); ++j)
    for (int i = 0; i < g->nx(); ++i) m.level[g->index(i, j)] = level_fn(g->node(i, j));
  return m;
}

// Brute-force distance from p to a set of polylines.
inline double brute_distance(const Boundary& b, Vec2 p) {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& c : b) {
    const std::size_t n = c.points.size();
    const std::size_t m = c.closed ? n : n - 1;
    for (std::size_t k = 0; k < m; ++k) d = std::min(d, segment_distance(p, c.points[k], c.points[(k + 1) % n]));
  }
  return d;
}

inline double brute_hausdorff(const Boundary& a, const Boundary& b) {
  double d = 0.0;
  for (const auto& c : a)
    for (Vec2 p : c.points) d = std::max(d, brute_distance(b, p));
  for (const auto& c : b)
    for (Vec2 p : c.points) d = std::max(d, brute_distance(a, p));
  return d;
}

inline double total_length(const Boundary& b) {
  double L = 0.0;
  for (const auto& c : b) L += c.length();
  return L;
}

}  // namespace testutil
