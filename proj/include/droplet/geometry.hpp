#pragma once

#include <array>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "droplet/grid.hpp"

namespace droplet {

struct Polyline {
  std::vector<Vec2> points;
  bool closed = false;

  std::size_t segment_count() const {
    if (points.size() < 2) return 0;
    return closed ? points.size() : points.size() - 1;
  }
  std::pair<Vec2, Vec2> segment(std::size_t k) const { return {points[k], points[(k + 1) % points.size()]}; }

  double length() const {
    double L = 0.0;
    for (std::size_t k = 0; k < segment_count(); ++k) {
      auto [a, b] = segment(k);
      L += distance(a, b);
    }
    return L;
  }

  // Shoelace area; positive for counter-clockwise closed curves.
  double signed_area() const {
    if (!closed) return 0.0;
    double A = 0.0;
    for (std::size_t k = 0; k < points.size(); ++k) A += cross(points[k], points[(k + 1) % points.size()]);
    return 0.5 * A;
  }
};

using Boundary = std::vector<Polyline>;

namespace detail {

// Corner order of a cell: (i,j), (i+1,j), (i+1,j+1), (i,j+1).
constexpr std::array<std::array<int, 2>, 4> kCorner{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};

// Global edge id: 2*node + 0 for the +x edge, 2*node + 1 for the +y edge.
inline std::size_t edge_id(const Grid& g, int i, int j, int axis) { return 2 * g.index(i, j) + axis; }

// Cell-local edge k joins corners k and k+1 (mod 4).
inline std::size_t cell_edge(const Grid& g, int i, int j, int k) {
  switch (k) {
    case 0: return edge_id(g, i, j, 0);
    case 1: return edge_id(g, i + 1, j, 1);
    case 2: return edge_id(g, i, j + 1, 0);
    default: return edge_id(g, i, j, 1);
  }
}

inline Vec2 edge_crossing(const Grid& g, std::span<const double> lv, std::size_t eid) {
  const std::size_t node = eid / 2;
  const int i = static_cast<int>(node % g.nx());
  const int j = static_cast<int>(node / g.nx());
  const int i2 = (eid % 2 == 0) ? i + 1 : i;
  const int j2 = (eid % 2 == 0) ? j : j + 1;
  const double a = lv[g.index(i, j)];
  const double b = lv[g.index(i2, j2)];
  const double t = a / (a - b);
  return g.node(i, j) + t * (g.node(i2, j2) - g.node(i, j));
}

struct OrientedSegment {
  std::size_t from;
  std::size_t to;
};

}  // namespace detail

// Marching squares on the zero set of a level function, linear interpolation on
// edges, saddles resolved by the cell-centre average. Curves are oriented with
// the negative (wet) side on the left.
inline Boundary extract_boundary(const Grid& g, std::span<const double> lv) {
  using detail::kCorner;
  std::vector<detail::OrientedSegment> segs;
  const double h = g.h();
  for (int j = 0; j + 1 < g.ny(); ++j) {
    for (int i = 0; i + 1 < g.nx(); ++i) {
      std::array<double, 4> v;
      int wet = 0;
      for (int k = 0; k < 4; ++k) {
        v[k] = lv[g.index(i + kCorner[k][0], j + kCorner[k][1])];
        wet |= (v[k] < 0.0) << k;
      }
      if (wet == 0 || wet == 15) continue;
      auto is_wet = [&](int k) { return ((wet >> k) & 1) != 0; };
      auto corner_pos = [&](int k) { return g.node(i + kCorner[k][0], j + kCorner[k][1]); };
      // Emit a segment between cell edges ea, eb; 'probe' is a corner whose side is known.
      auto emit = [&](int ea, int eb, int probe, bool probe_wet) {
        const std::size_t ia = detail::cell_edge(g, i, j, ea);
        const std::size_t ib = detail::cell_edge(g, i, j, eb);
        // Orientation from edge midpoints: crossings coincide when a node sits on the zero level.
        const Vec2 pa = 0.5 * (corner_pos(ea) + corner_pos((ea + 1) % 4));
        const Vec2 pb = 0.5 * (corner_pos(eb) + corner_pos((eb + 1) % 4));
        const Vec2 d = pb - pa;
        const Vec2 left{-d.y, d.x};
        const bool probe_left = dot(corner_pos(probe) - pa, left) > 0.0;
        if (probe_left == probe_wet) segs.push_back({ia, ib});
        else segs.push_back({ib, ia});
      };
      std::array<int, 4> crossing_edges;
      int nc = 0;
      for (int k = 0; k < 4; ++k)
        if (is_wet(k) != is_wet((k + 1) % 4)) crossing_edges[nc++] = k;
      if (nc == 2) {
        int probe = 0;
        while (!is_wet(probe)) ++probe;
        // Edges adjacent to a lone corner share it; otherwise the wet corners are a pair.
        emit(crossing_edges[0], crossing_edges[1], probe, true);
      } else {
        // Saddle: corners alternate. Centre value decides whether wet corners connect.
        const double centre = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        const bool centre_wet = centre < 0.0;
        for (int k = 0; k < 4; ++k) {
          // Corner k is cut off when its state differs from the centre.
          if (is_wet(k) == centre_wet) continue;
          emit((k + 3) % 4, k, k, is_wet(k));
        }
      }
      (void)h;
    }
  }

  std::unordered_map<std::size_t, std::size_t> by_start;
  std::unordered_map<std::size_t, std::size_t> by_end;
  by_start.reserve(segs.size() * 2);
  by_end.reserve(segs.size() * 2);
  for (std::size_t s = 0; s < segs.size(); ++s) {
    by_start[segs[s].from] = s;
    by_end[segs[s].to] = s;
  }
  std::vector<std::uint8_t> used(segs.size(), 0);
  Boundary out;
  auto trace = [&](std::size_t s0) {
    Polyline pl;
    std::size_t s = s0;
    pl.points.push_back(detail::edge_crossing(g, lv, segs[s].from));
    while (true) {
      used[s] = 1;
      const std::size_t e = segs[s].to;
      auto it = by_start.find(e);
      if (it == by_start.end()) {
        pl.points.push_back(detail::edge_crossing(g, lv, e));
        break;
      }
      if (it->second == s0) {
        pl.closed = true;
        break;
      }
      pl.points.push_back(detail::edge_crossing(g, lv, e));
      s = it->second;
      if (used[s]) break;
    }
    // Drop coincident consecutive vertices (zero level exactly at a node).
    std::vector<Vec2> pts;
    for (const Vec2& p : pl.points)
      if (pts.empty() || distance(pts.back(), p) > 1e-12 * g.h()) pts.push_back(p);
    if (pl.closed && pts.size() > 1 && distance(pts.front(), pts.back()) <= 1e-12 * g.h()) pts.pop_back();
    pl.points = std::move(pts);
    if (pl.points.size() >= 2) out.push_back(std::move(pl));
  };
  // Open chains first (they start where no segment ends), then loops.
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s] && by_end.find(segs[s].from) == by_end.end()) trace(s);
  for (std::size_t s = 0; s < segs.size(); ++s)
    if (!used[s]) trace(s);
  return out;
}

inline Boundary extract_boundary(const LevelSetField& phi) {
  Boundary b = extract_boundary(*phi.grid, phi.phi);
  if (b.empty()) throw DegenerateGeometryError("level set has an empty zero set");
  return b;
}

inline Boundary extract_boundary(const SupportMask& s) {
  Boundary b = extract_boundary(*s.grid, s.level);
  if (b.empty()) throw DegenerateGeometryError("support has an empty boundary");
  return b;
}

// ---------------------------------------------------------------------------
// Nearest-segment queries over a bucketed set of polyline segments.

class SegmentIndex {
 public:
  SegmentIndex(const Boundary& curves, double bucket) : bucket_(bucket) {
    lo_ = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Vec2 hi{-lo_.x, -lo_.y};
    for (const auto& c : curves)
      for (std::size_t k = 0; k < c.segment_count(); ++k) {
        segs_.push_back(c.segment(k));
        for (Vec2 p : {segs_.back().first, segs_.back().second}) {
          lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
          hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
        }
      }
    if (segs_.empty()) return;
    nx_ = static_cast<int>((hi.x - lo_.x) / bucket_) + 1;
    ny_ = static_cast<int>((hi.y - lo_.y) / bucket_) + 1;
    cells_.assign(static_cast<std::size_t>(nx_) * ny_, {});
    for (std::size_t s = 0; s < segs_.size(); ++s) {
      auto [a, b] = segs_[s];
      const int i0 = cx(std::min(a.x, b.x)), i1 = cx(std::max(a.x, b.x));
      const int j0 = cy(std::min(a.y, b.y)), j1 = cy(std::max(a.y, b.y));
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) cells_[static_cast<std::size_t>(j) * nx_ + i].push_back(s);
    }
  }

  bool empty() const { return segs_.empty(); }

  double nearest(Vec2 p) const {
    if (segs_.empty()) return std::numeric_limits<double>::infinity();
    const int pi = std::clamp(cx(p.x), 0, nx_ - 1);
    const int pj = std::clamp(cy(p.y), 0, ny_ - 1);
    // Distance from p to the bucket box, so rings account for points outside it.
    const double outside = std::max({lo_.x - p.x, p.x - (lo_.x + nx_ * bucket_), lo_.y - p.y,
                                     p.y - (lo_.y + ny_ * bucket_), 0.0});
    double best = std::numeric_limits<double>::infinity();
    const int max_ring = std::max(nx_, ny_);
    for (int r = 0; r <= max_ring; ++r) {
      for (int j = pj - r; j <= pj + r; ++j) {
        if (j < 0 || j >= ny_) continue;
        for (int i = pi - r; i <= pi + r; ++i) {
          if (i < 0 || i >= nx_) continue;
          if (std::max(std::abs(i - pi), std::abs(j - pj)) != r) continue;
          for (std::size_t s : cells_[static_cast<std::size_t>(j) * nx_ + i])
            best = std::min(best, segment_distance(p, segs_[s].first, segs_[s].second));
        }
      }
      if (best <= outside + r * bucket_) break;
    }
    return best;
  }

 private:
  int cx(double x) const { return static_cast<int>(std::floor((x - lo_.x) / bucket_)); }
  int cy(double y) const { return static_cast<int>(std::floor((y - lo_.y) / bucket_)); }

  double bucket_;
  Vec2 lo_;
  int nx_ = 0, ny_ = 0;
  std::vector<std::pair<Vec2, Vec2>> segs_;
  std::vector<std::vector<std::size_t>> cells_;
};

// ---------------------------------------------------------------------------

namespace detail {

inline void fast_sweep(const Grid& g, std::vector<double>& d, const std::vector<std::uint8_t>& fixed) {
  const double h = g.h();
  const int nx = g.nx(), ny = g.ny();
  auto update = [&](int i, int j) {
    const std::size_t k = g.index(i, j);
    if (fixed[k]) return false;
    const double a = std::min(i > 0 ? d[k - 1] : d[k], i + 1 < nx ? d[k + 1] : d[k]);
    const double b = std::min(j > 0 ? d[k - nx] : d[k], j + 1 < ny ? d[k + nx] : d[k]);
    if (!std::isfinite(a) && !std::isfinite(b)) return false;
    double cand;
    if (std::abs(a - b) >= h) cand = std::min(a, b) + h;
    else cand = 0.5 * (a + b + std::sqrt(2.0 * h * h - (a - b) * (a - b)));
    if (cand < d[k] - 1e-14 * h) {
      d[k] = cand;
      return true;
    }
    return false;
  };
  for (int round = 0; round < 8; ++round) {
    bool changed = false;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) changed |= update(i, j);
    for (int j = 0; j < ny; ++j)
      for (int i = nx - 1; i >= 0; --i) changed |= update(i, j);
    for (int j = ny - 1; j >= 0; --j)
      for (int i = nx - 1; i >= 0; --i) changed |= update(i, j);
    for (int j = ny - 1; j >= 0; --j)
      for (int i = 0; i < nx; ++i) changed |= update(i, j);
    if (!changed) break;
  }
}

}  // namespace detail

// Signed distance to the interface of a support: exact distance to the
// marching-squares polyline within three cells, fast sweeping beyond.
inline LevelSetField signed_distance(const SupportMask& support) {
  const Grid& g = *support.grid;
  const std::size_t wet = support.wet_count();
  if (wet == 0 || wet == g.size()) throw DegenerateGeometryError("signed distance of an empty or full support");
  const Boundary curves = extract_boundary(g, support.level);
  const double h = g.h();
  const double band = 3.0 * h;
  std::vector<double> d(g.size(), std::numeric_limits<double>::infinity());
  const Vec2 o = g.origin();
  for (const auto& c : curves) {
    for (std::size_t s = 0; s < c.segment_count(); ++s) {
      auto [a, b] = c.segment(s);
      const int i0 = std::max(0, static_cast<int>(std::floor((std::min(a.x, b.x) - band - o.x) / h)));
      const int i1 = std::min(g.nx() - 1, static_cast<int>(std::ceil((std::max(a.x, b.x) + band - o.x) / h)));
      const int j0 = std::max(0, static_cast<int>(std::floor((std::min(a.y, b.y) - band - o.y) / h)));
      const int j1 = std::min(g.ny() - 1, static_cast<int>(std::ceil((std::max(a.y, b.y) + band - o.y) / h)));
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) {
          const std::size_t k = g.index(i, j);
          d[k] = std::min(d[k], segment_distance(g.node(i, j), a, b));
        }
    }
  }
  std::vector<std::uint8_t> fixed(g.size(), 0);
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k] <= band) fixed[k] = 1;
    else d[k] = std::numeric_limits<double>::infinity();
  }
  detail::fast_sweep(g, d, fixed);
  LevelSetField out{support.grid, std::move(d)};
  for (std::size_t k = 0; k < out.phi.size(); ++k)
    if (support.level[k] < 0.0) out.phi[k] = -out.phi[k];
  return out;
}

inline LevelSetField signed_distance(const SupportMask& support, const Grid& grid) {
  require_same_grid(*support.grid, grid);
  return signed_distance(support);
}

// Restores |grad phi| = 1 while keeping the zero set.
inline LevelSetField reinitialize(const LevelSetField& phi) { return signed_distance(phi.support()); }

// ---------------------------------------------------------------------------
// Subcell area fractions. Each cell is split into four triangles around its
// centre (centre value = corner average) and every level function is linear on
// each triangle, so intersections are computed by exact polygon clipping.

namespace detail {

struct Constraint {
  std::span<const double> values;
  double sign;  // region kept is sign * value < 0
};

inline double clip_cell_fraction(const Grid& g, int i, int j, std::span<const Constraint> cons) {
  std::array<std::array<double, 5>, 4> cv;  // constraint x (4 corners + centre)
  std::array<int, 4> active;
  int na = 0;
  for (std::size_t c = 0; c < cons.size(); ++c) {
    bool all_in = true, all_out = true;
    std::array<double, 5> v;
    for (int k = 0; k < 4; ++k) {
      v[k] = cons[c].sign * cons[c].values[g.index(i + kCorner[k][0], j + kCorner[k][1])];
      all_in &= v[k] < 0.0;
      all_out &= v[k] >= 0.0;
    }
    if (all_out) return 0.0;
    if (all_in) continue;
    v[4] = 0.25 * (v[0] + v[1] + v[2] + v[3]);
    cv[na] = v;
    active[na++] = static_cast<int>(c);
  }
  if (na == 0) return 1.0;
  (void)active;
  constexpr std::array<Vec2, 5> pos{{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}}};
  double area = 0.0;
  for (int t = 0; t < 4; ++t) {
    const std::array<int, 3> tv{4, t, (t + 1) % 4};
    // Polygon vertices as barycentric coordinates on the triangle.
    std::vector<std::array<double, 3>> poly{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int c = 0; c < na && !poly.empty(); ++c) {
      auto f = [&](const std::array<double, 3>& b) {
        return b[0] * cv[c][tv[0]] + b[1] * cv[c][tv[1]] + b[2] * cv[c][tv[2]];
      };
      std::vector<std::array<double, 3>> next;
      for (std::size_t k = 0; k < poly.size(); ++k) {
        const auto& P = poly[k];
        const auto& Q = poly[(k + 1) % poly.size()];
        const double fp = f(P), fq = f(Q);
        if (fp < 0.0) next.push_back(P);
        if ((fp < 0.0) != (fq < 0.0)) {
          const double s = fp / (fp - fq);
          next.push_back({P[0] + s * (Q[0] - P[0]), P[1] + s * (Q[1] - P[1]), P[2] + s * (Q[2] - P[2])});
        }
      }
      poly = std::move(next);
    }
    if (poly.size() < 3) continue;
    double a2 = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const auto& P = poly[k];
      const auto& Q = poly[(k + 1) % poly.size()];
      const Vec2 p = P[0] * pos[tv[0]] + P[1] * pos[tv[1]] + P[2] * pos[tv[2]];
      const Vec2 q = Q[0] * pos[tv[0]] + Q[1] * pos[tv[1]] + Q[2] * pos[tv[2]];
      a2 += cross(p, q);
    }
    area += 0.5 * std::abs(a2);
  }
  return area;
}

inline double clipped_measure(const Grid& g, std::span<const Constraint> cons) {
  double total = 0.0;
  for (int j = 0; j + 1 < g.ny(); ++j)
    for (int i = 0; i + 1 < g.nx(); ++i) total += clip_cell_fraction(g, i, j, cons);
  return total * g.h() * g.h();
}

}  // namespace detail

// Per-cell fraction of Omega ∩ U, indexed by the lower-left node of the cell.
inline std::vector<double> cell_fractions(const SupportMask& s) {
  const Grid& g = *s.grid;
  const std::array<detail::Constraint, 2> cons{{{s.level, 1.0}, {g.solid_levels(), -1.0}}};
  std::vector<double> f(g.size(), 0.0);
  for (int j = 0; j + 1 < g.ny(); ++j)
    for (int i = 0; i + 1 < g.nx(); ++i) f[g.index(i, j)] = detail::clip_cell_fraction(g, i, j, cons);
  return f;
}

// Lebesgue measure of Omega ∩ U.
inline double measure(const SupportMask& s) {
  const std::array<detail::Constraint, 2> cons{{{s.level, 1.0}, {s.grid->solid_levels(), -1.0}}};
  return detail::clipped_measure(*s.grid, cons);
}

// (|a \ b|, |b \ a|) measured inside U.
inline std::pair<double, double> set_difference_measures(const SupportMask& a, const SupportMask& b) {
  require_same_grid(*a.grid, *b.grid);
  const auto solid = a.grid->solid_levels();
  const std::array<detail::Constraint, 3> ab{{{a.level, 1.0}, {b.level, -1.0}, {solid, -1.0}}};
  const std::array<detail::Constraint, 3> ba{{{b.level, 1.0}, {a.level, -1.0}, {solid, -1.0}}};
  return {detail::clipped_measure(*a.grid, ab), detail::clipped_measure(*a.grid, ba)};
}

inline double intersection_measure(const SupportMask& a, const SupportMask& b) {
  require_same_grid(*a.grid, *b.grid);
  const std::array<detail::Constraint, 3> c{{{a.level, 1.0}, {b.level, 1.0}, {a.grid->solid_levels(), -1.0}}};
  return detail::clipped_measure(*a.grid, c);
}

// ---------------------------------------------------------------------------

// Directed Hausdorff: max over vertices of `from` of the distance to `to`.
inline double directed_hausdorff(const Boundary& from, const SegmentIndex& to) {
  double worst = 0.0;
  for (const auto& c : from)
    for (Vec2 p : c.points) worst = std::max(worst, to.nearest(p));
  return worst;
}

inline double hausdorff_distance(const Boundary& a, const Boundary& b, double bucket) {
  if (a.empty() || b.empty()) throw DegenerateGeometryError("Hausdorff distance of an empty boundary");
  const SegmentIndex ia(a, bucket), ib(b, bucket);
  return std::max(directed_hausdorff(a, ib), directed_hausdorff(b, ia));
}

inline double hausdorff_distance(const SupportMask& a, const SupportMask& b) {
  require_same_grid(*a.grid, *b.grid);
  return hausdorff_distance(extract_boundary(a), extract_boundary(b), 8.0 * a.grid->h());
}

// ---------------------------------------------------------------------------

struct ComponentLabels {
  int count = 0;
  std::vector<int> label;  // -1 for dry nodes
};

// Face-connected (4-neighbour) components of the wet node set.
inline ComponentLabels label_components(const SupportMask& s) {
  const Grid& g = *s.grid;
  ComponentLabels out;
  out.label.assign(g.size(), -1);
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < g.size(); ++seed) {
    if (!s.wet(seed) || out.label[seed] >= 0) continue;
    const int id = out.count++;
    out.label[seed] = id;
    stack.push_back(seed);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      const int i = static_cast<int>(k % g.nx()), j = static_cast<int>(k / g.nx());
      constexpr std::array<std::array<int, 2>, 4> nb{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
      for (auto [di, dj] : nb) {
        if (!g.inside(i + di, j + dj)) continue;
        const std::size_t q = g.index(i + di, j + dj);
        if (s.wet(q) && out.label[q] < 0) {
          out.label[q] = id;
          stack.push_back(q);
        }
      }
    }
  }
  return out;
}

inline int connected_components(const SupportMask& s) { return label_components(s).count; }

// Component of the wet node nearest to p among the corners of the cell holding p.
inline int component_at(const Grid& g, const ComponentLabels& labels, Vec2 p) {
  const int i = std::clamp(static_cast<int>(std::floor((p.x - g.origin().x) / g.h())), 0, g.nx() - 2);
  const int j = std::clamp(static_cast<int>(std::floor((p.y - g.origin().y) / g.h())), 0, g.ny() - 2);
  int best = -1;
  double bd = std::numeric_limits<double>::infinity();
  for (auto [di, dj] : detail::kCorner) {
    const int l = labels.label[g.index(i + di, j + dj)];
    if (l < 0) continue;
    const double d = distance(p, g.node(i + di, j + dj));
    if (d < bd) bd = d, best = l;
  }
  return best;
}

// Smallest distance between boundary curves that belong to different wet
// components; +inf when the support is connected.
inline double component_gap(const SupportMask& s) {
  const ComponentLabels labels = label_components(s);
  if (labels.count < 2) return std::numeric_limits<double>::infinity();
  const Boundary curves = extract_boundary(*s.grid, s.level);
  std::map<int, Boundary> by_comp;
  for (const auto& c : curves) {
    std::map<int, int> votes;
    for (Vec2 p : c.points) ++votes[component_at(*s.grid, labels, p)];
    int best = -1, bv = -1;
    for (auto [l, v] : votes)
      if (v > bv) best = l, bv = v;
    by_comp[best].push_back(c);
  }
  double gap = std::numeric_limits<double>::infinity();
  for (auto it = by_comp.begin(); it != by_comp.end(); ++it) {
    const SegmentIndex idx(it->second, 8.0 * s.grid->h());
    for (auto jt = by_comp.begin(); jt != by_comp.end(); ++jt) {
      if (jt == it) continue;
      for (const auto& c : jt->second)
        for (Vec2 p : c.points) gap = std::min(gap, idx.nearest(p));
    }
  }
  return gap;
}

// ---------------------------------------------------------------------------

// Largest total re-entry gap along rays cast from centres sampled on a 5x5
// lattice inside B_rho(centre), 256 rays each. Zero means star-shaped with
// respect to every sampled centre at grid resolution.
inline double star_shape_defect(const SupportMask& s, double rho, Vec2 centre = {0.0, 0.0}) {
  if (rho < 0.0) throw PreconditionError("centre ball radius must be nonnegative");
  const Grid& g = *s.grid;
  const double h = g.h();
  auto wet_at = [&](Vec2 p) { return g.interpolate(s.level, p) < 0.0; };
  std::vector<Vec2> centres;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b) {
      const Vec2 off{0.5 * a * rho, 0.5 * b * rho};
      if (norm(off) <= rho * (1.0 + 1e-12)) centres.push_back(centre + off);
    }
  for (Vec2 c : centres)
    if (!wet_at(c)) throw PreconditionError("centre ball is not inside the support");
  for (int k = 0; k < 64; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 64.0;
    if (!wet_at(centre + rho * Vec2{std::cos(a), std::sin(a)}))
      throw PreconditionError("centre ball is not inside the support");
  }
  const Vec2 lo = g.origin(), hi = g.upper();
  const double step = 0.25 * h;
  double worst = 0.0;
  for (Vec2 c : centres) {
    for (int r = 0; r < 256; ++r) {
      const double a = 2.0 * std::numbers::pi * r / 256.0;
      const Vec2 dir{std::cos(a), std::sin(a)};
      double gap = 0.0, dry_run = 0.0;
      bool left_once = false;
      for (double t = step;; t += step) {
        const Vec2 p = c + t * dir;
        if (p.x < lo.x || p.y < lo.y || p.x > hi.x || p.y > hi.y) break;
        if (wet_at(p)) {
          if (left_once) gap += dry_run;
          dry_run = 0.0;
        } else {
          left_once = true;
          dry_run += step;
        }
      }
      worst = std::max(worst, gap);
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------

inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 1] - hull[k - 2], pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

// Convex-hull area minus enclosed area of the boundary curves (holes subtract).
inline double convexity_deficit(const Boundary& curves) {
  std::vector<Vec2> all;
  double enclosed = 0.0;
  for (const auto& c : curves) {
    all.insert(all.end(), c.points.begin(), c.points.end());
    enclosed += c.signed_area();
  }
  Polyline hull{convex_hull(std::move(all)), true};
  return hull.signed_area() - enclosed;
}

// ---------------------------------------------------------------------------
// Boundary CSV: curve_id,vertex_id,x,y. Closed curves repeat their first vertex.

inline void write_boundary_csv(std::ostream& os, const Boundary& curves) {
  os << "curve_id,vertex_id,x,y\n";
  os << std::setprecision(17);
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& pts = curves[c].points;
    std::size_t v = 0;
    for (; v < pts.size(); ++v) os << c << ',' << v << ',' << pts[v].x << ',' << pts[v].y << '\n';
    if (curves[c].closed && !pts.empty()) os << c << ',' << v << ',' << pts[0].x << ',' << pts[0].y << '\n';
  }
}

inline Boundary read_boundary_csv(std::istream& is) {
  std::string line;
  std::getline(is, line);
  if (line.rfind("curve_id", 0) != 0) throw Error("boundary CSV: missing header");
  Boundary out;
  long current = -1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f[4];
    for (auto& x : f) std::getline(ss, x, ',');
    const long id = std::stol(f[0]);
    if (id != current) {
      out.emplace_back();
      current = id;
    }
    out.back().points.push_back({std::stod(f[2]), std::stod(f[3])});
  }
  for (auto& c : out) {
    if (c.points.size() > 2 && c.points.front() == c.points.back()) {
      c.points.pop_back();
      c.closed = true;
    }
  }
  return out;
}

}  // namespace droplet
