#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include "droplet/error.hpp"

namespace droplet {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

inline double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, a + t * ab);
}

// ---------------------------------------------------------------------------
// Analytic shapes. level() is negative inside; it is the exact signed distance
// for disks, stadiums and polygons, and a sign-correct approximation otherwise.

struct Disk {
  Vec2 center;
  double radius = 1.0;
};

struct Ellipse {
  Vec2 center;
  double semi_x = 1.0;
  double semi_y = 1.0;
};

// Strip |y - cy| < a for |x - cx| <= b, capped by half-disks of radius a at (cx +- b, cy).
struct Stadium {
  Vec2 center;
  double half_width = 1.0;   // a
  double half_length = 1.0;  // b
};

struct Polygon {
  std::vector<Vec2> vertices;  // counter-clockwise or clockwise, implicitly closed
};

struct Shape;

struct ShapeUnion {
  std::vector<Shape> parts;
};

struct Shape {
  std::variant<Disk, Ellipse, Stadium, Polygon, ShapeUnion> geometry;
};

namespace detail {

inline double polygon_level(const Polygon& poly, Vec2 p) {
  const auto& v = poly.vertices;
  if (v.size() < 3) throw PreconditionError("polygon needs at least 3 vertices");
  double d = std::numeric_limits<double>::infinity();
  bool inside = false;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    d = std::min(d, segment_distance(p, v[j], v[i]));
    if ((v[i].y > p.y) != (v[j].y > p.y)) {
      const double xc = v[j].x + (p.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (p.x < xc) inside = !inside;
    }
  }
  return inside ? -d : d;
}

}  // namespace detail

inline double level(const Shape& shape, Vec2 p) {
  return std::visit(
      [&](const auto& g) -> double {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Disk>) {
          return distance(p, g.center) - g.radius;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          const double dx = (p.x - g.center.x) / g.semi_x;
          const double dy = (p.y - g.center.y) / g.semi_y;
          return (std::hypot(dx, dy) - 1.0) * std::min(g.semi_x, g.semi_y);
        } else if constexpr (std::is_same_v<T, Stadium>) {
          const Vec2 q = p - g.center;
          return segment_distance(q, {-g.half_length, 0.0}, {g.half_length, 0.0}) - g.half_width;
        } else if constexpr (std::is_same_v<T, Polygon>) {
          return detail::polygon_level(g, p);
        } else {
          double d = std::numeric_limits<double>::infinity();
          for (const auto& part : g.parts) d = std::min(d, level(part, p));
          return d;
        }
      },
      shape.geometry);
}

// ---------------------------------------------------------------------------

// Uniform node-centred Cartesian grid. Node (i, j) sits at origin + h * (i, j).
// The wetted solid K is carried as a signed level (negative inside K); the node
// mask K is derived from it and the level also supplies subcell boundary fractions.
class Grid {
 public:
  Grid(Vec2 origin, double h, int nx, int ny, std::vector<double> solid_level = {})
      : origin_(origin), h_(h), nx_(nx), ny_(ny), solid_level_(std::move(solid_level)) {
    if (!(h > 0.0)) throw PreconditionError("grid spacing must be positive");
    if (nx < 3 || ny < 3) throw PreconditionError("grid needs at least 3x3 nodes");
    if (solid_level_.empty()) {
      solid_level_.assign(size(), std::numeric_limits<double>::infinity());
    } else if (solid_level_.size() != size()) {
      throw PreconditionError("solid level has wrong size");
    }
  }

  // Square-ish box [lo, hi] sampled at spacing h with solid K given by a shape (optional).
  static std::shared_ptr<const Grid> box(Vec2 lo, Vec2 hi, double h, const Shape* solid = nullptr) {
    const int nx = static_cast<int>(std::lround((hi.x - lo.x) / h)) + 1;
    const int ny = static_cast<int>(std::lround((hi.y - lo.y) / h)) + 1;
    std::vector<double> lv;
    if (solid != nullptr) {
      lv.resize(static_cast<std::size_t>(nx) * ny);
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) lv[static_cast<std::size_t>(j) * nx + i] = level(*solid, {lo.x + i * h, lo.y + j * h});
    }
    auto g = std::make_shared<const Grid>(lo, h, nx, ny, std::move(lv));
    if (solid != nullptr) g->check_solid();
    return g;
  }

  Vec2 origin() const { return origin_; }
  double h() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  bool inside(int i, int j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }
  Vec2 node(int i, int j) const { return {origin_.x + i * h_, origin_.y + j * h_}; }
  Vec2 upper() const { return node(nx_ - 1, ny_ - 1); }

  double solid_level(int i, int j) const { return solid_level_[index(i, j)]; }
  std::span<const double> solid_levels() const { return solid_level_; }
  bool solid(int i, int j) const { return solid_level(i, j) < 0.0; }
  bool has_solid() const {
    return std::any_of(solid_level_.begin(), solid_level_.end(), [](double v) { return v < 0.0; });
  }

  // Solid must be nonempty and kept at least two cells away from the box edge.
  void check_solid() const {
    if (!has_solid()) throw PreconditionError("solid region K is empty");
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i)
        if (solid(i, j) && (i < 2 || j < 2 || i >= nx_ - 2 || j >= ny_ - 2))
          throw PreconditionError("solid region K touches the computational box");
  }

  bool same_layout(const Grid& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && h_ == o.h_ && origin_ == o.origin_;
  }

  // Bilinear interpolation of node data at a physical point (clamped to the box).
  double interpolate(std::span<const double> data, Vec2 p) const {
    double fx = (p.x - origin_.x) / h_;
    double fy = (p.y - origin_.y) / h_;
    fx = std::clamp(fx, 0.0, static_cast<double>(nx_ - 1));
    fy = std::clamp(fy, 0.0, static_cast<double>(ny_ - 1));
    int i = std::min(static_cast<int>(fx), nx_ - 2);
    int j = std::min(static_cast<int>(fy), ny_ - 2);
    const double tx = fx - i;
    const double ty = fy - j;
    return (1 - tx) * (1 - ty) * data[index(i, j)] + tx * (1 - ty) * data[index(i + 1, j)] +
           (1 - tx) * ty * data[index(i, j + 1)] + tx * ty * data[index(i + 1, j + 1)];
  }

 private:
  Vec2 origin_;
  double h_;
  int nx_;
  int ny_;
  std::vector<double> solid_level_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline void require_same_grid(const Grid& a, const Grid& b) {
  if (!a.same_layout(b)) throw GridMismatchError("operands live on different grids");
}

// Wet set Omega = {u > 0} on the grid. Node values are a level function whose
// negative set is the wet region; interface positions and subcell area
// fractions are read off by linear interpolation of these values.
struct SupportMask {
  GridPtr grid;
  std::vector<double> level;

  bool wet(int i, int j) const { return level[grid->index(i, j)] < 0.0; }
  bool wet(std::size_t k) const { return level[k] < 0.0; }

  std::size_t wet_count() const {
    return static_cast<std::size_t>(std::count_if(level.begin(), level.end(), [](double v) { return v < 0.0; }));
  }

  static SupportMask from_shape(GridPtr g, const Shape& s) {
    SupportMask m{g, std::vector<double>(g->size())};
    for (int j = 0; j < g->ny(); ++j)
      for (int i = 0; i < g->nx(); ++i) m.level[g->index(i, j)] = droplet::level(s, g->node(i, j));
    return m;
  }

  // Boolean node mask; interfaces sit at edge midpoints.
  static SupportMask from_nodes(GridPtr g, std::span<const std::uint8_t> wet_nodes) {
    if (wet_nodes.size() != g->size()) throw GridMismatchError("node mask has wrong size");
    SupportMask m{g, std::vector<double>(g->size())};
    for (std::size_t k = 0; k < m.level.size(); ++k) m.level[k] = wet_nodes[k] ? -0.5 * g->h() : 0.5 * g->h();
    return m;
  }

  std::vector<std::uint8_t> node_mask() const {
    std::vector<std::uint8_t> out(level.size());
    for (std::size_t k = 0; k < level.size(); ++k) out[k] = level[k] < 0.0;
    return out;
  }
};

// Signed distance carrier: negative inside Omega, positive outside.
struct LevelSetField {
  GridPtr grid;
  std::vector<double> phi;

  SupportMask support() const { return SupportMask{grid, phi}; }
  double at(int i, int j) const { return phi[grid->index(i, j)]; }
  double operator()(Vec2 p) const { return grid->interpolate(phi, p); }

  // Central-difference gradient at a node (one-sided at the box edge).
  Vec2 gradient(int i, int j) const {
    const double h = grid->h();
    const int il = std::max(i - 1, 0), ir = std::min(i + 1, grid->nx() - 1);
    const int jl = std::max(j - 1, 0), jr = std::min(j + 1, grid->ny() - 1);
    return {(at(ir, j) - at(il, j)) / ((ir - il) * h), (at(i, jr) - at(i, jl)) / ((jr - jl) * h)};
  }

  // Unit outward normal at an arbitrary point (bilinear blend of node gradients).
  Vec2 normal(Vec2 p) const {
    const double h = grid->h();
    const Vec2 o = grid->origin();
    int i = std::clamp(static_cast<int>(std::floor((p.x - o.x) / h)), 0, grid->nx() - 2);
    int j = std::clamp(static_cast<int>(std::floor((p.y - o.y) / h)), 0, grid->ny() - 2);
    const double tx = std::clamp((p.x - o.x) / h - i, 0.0, 1.0);
    const double ty = std::clamp((p.y - o.y) / h - j, 0.0, 1.0);
    const Vec2 g = (1 - tx) * (1 - ty) * gradient(i, j) + tx * (1 - ty) * gradient(i + 1, j) +
                   (1 - tx) * ty * gradient(i, j + 1) + tx * ty * gradient(i + 1, j + 1);
    const double n = norm(g);
    return n > 0.0 ? (1.0 / n) * g : Vec2{0.0, 0.0};
  }
};

}  // namespace droplet
