#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include "droplet/geometry.hpp"
#include "droplet/grid.hpp"

namespace droplet {

inline constexpr double kThetaFloor = 0.01;

// Edges of the 5-point stencil around the wet unknowns. An unknown is a wet
// node outside K. Edges to dry nodes end on the free boundary (u = 0) and
// edges to solid nodes end on dK (u = F), both at the linearly interpolated
// subcell fraction theta in (0, 1], floored at kThetaFloor.
struct LaplaceStencil {
  enum class EdgeKind { interior, free_boundary, solid };

  GridPtr grid;
  std::vector<int> unknown_of;        // node -> unknown id or -1
  std::vector<std::size_t> node_of;   // unknown id -> node
  std::vector<std::array<int, 4>> nbr;  // +x, -x, +y, -y unknown ids (or -1)
  std::vector<double> diag;
  std::vector<double> solid_weight;  // sum of 1/theta over solid edges
  std::vector<double> free_weight;   // sum of 1/theta over free-boundary edges

  static constexpr std::array<std::array<int, 2>, 4> kDir{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

  static double fraction(double inside, double outside) {
    // inside < 0 <= outside (or the solid analogue with the signs swapped)
    const double t = inside / (inside - outside);
    return std::max(t, kThetaFloor);
  }

  explicit LaplaceStencil(const SupportMask& support) : grid(support.grid) {
    const Grid& g = *grid;
    unknown_of.assign(g.size(), -1);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t k = g.index(i, j);
        if (g.solid(i, j)) {
          if (!support.wet(k)) throw PreconditionError("support does not contain the solid region");
          continue;
        }
        if (!support.wet(k)) continue;
        if (i == 0 || j == 0 || i == g.nx() - 1 || j == g.ny() - 1)
          throw BoxReachedError("wet region reaches the computational box");
        unknown_of[k] = static_cast<int>(node_of.size());
        node_of.push_back(k);
      }
    const std::size_t n = node_of.size();
    nbr.assign(n, {-1, -1, -1, -1});
    diag.assign(n, 0.0);
    solid_weight.assign(n, 0.0);
    free_weight.assign(n, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      const std::size_t k = node_of[p];
      const int i = static_cast<int>(k % g.nx()), j = static_cast<int>(k / g.nx());
      for (int d = 0; d < 4; ++d) {
        const int qi = i + kDir[d][0], qj = j + kDir[d][1];
        const std::size_t q = g.index(qi, qj);
        if (g.solid(qi, qj)) {
          const double th = fraction(-g.solid_level(i, j), -g.solid_level(qi, qj));
          solid_weight[p] += 1.0 / th;
        } else if (!support.wet(q)) {
          const double th = fraction(support.level[k], support.level[q]);
          free_weight[p] += 1.0 / th;
        } else {
          nbr[p][d] = unknown_of[q];
          diag[p] += 1.0;
        }
      }
      diag[p] += solid_weight[p] + free_weight[p];
    }
  }

  std::size_t size() const { return node_of.size(); }

  // y = A x
  void apply(const std::vector<double>& x, std::vector<double>& y) const {
    for (std::size_t p = 0; p < size(); ++p) {
      double s = diag[p] * x[p];
      for (int q : nbr[p])
        if (q >= 0) s -= x[q];
      y[p] = s;
    }
  }

  // Visits every stencil edge once: f(kind, unknown p, unknown q or -1, theta).
  template <class Fn>
  void for_each_edge(const SupportMask& support, Fn&& f) const {
    const Grid& g = *grid;
    for (std::size_t p = 0; p < size(); ++p) {
      const std::size_t k = node_of[p];
      const int i = static_cast<int>(k % g.nx()), j = static_cast<int>(k / g.nx());
      for (int d = 0; d < 4; ++d) {
        const int qi = i + kDir[d][0], qj = j + kDir[d][1];
        const std::size_t q = g.index(qi, qj);
        if (g.solid(qi, qj)) {
          f(EdgeKind::solid, p, -1, fraction(-g.solid_level(i, j), -g.solid_level(qi, qj)));
        } else if (!support.wet(q)) {
          f(EdgeKind::free_boundary, p, -1, fraction(support.level[k], support.level[q]));
        } else if (nbr[p][d] > static_cast<int>(p)) {
          f(EdgeKind::interior, p, nbr[p][d], 1.0);
        }
      }
    }
  }
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

// Height field u on the grid: harmonic in Omega ∩ U, u = F on dK, u = 0 off Omega.
struct HeightField {
  GridPtr grid;
  SupportMask support;
  double F = 0.0;
  std::vector<double> u;
  SolveStats stats;
  bool solved = false;

  double at(int i, int j) const { return u[grid->index(i, j)]; }
};

namespace detail {

// Modified incomplete Cholesky (MIC(0)) for the stencil matrix, in unknown order.
struct MicPreconditioner {
  std::vector<double> inv;

  explicit MicPreconditioner(const LaplaceStencil& A) : inv(A.size(), 0.0) {
    constexpr double tau = 0.97, sigma = 0.25;
    for (std::size_t p = 0; p < A.size(); ++p) {
      double e = A.diag[p];
      const int left = A.nbr[p][1], down = A.nbr[p][3];
      if (left >= 0) {
        const double pl = inv[left];
        e -= pl * pl;
        e -= tau * (A.nbr[left][2] >= 0 ? 1.0 : 0.0) * pl * pl;
      }
      if (down >= 0) {
        const double pd = inv[down];
        e -= pd * pd;
        e -= tau * (A.nbr[down][0] >= 0 ? 1.0 : 0.0) * pd * pd;
      }
      if (e < sigma * A.diag[p]) e = A.diag[p];
      inv[p] = 1.0 / std::sqrt(e);
    }
  }

  void apply(const LaplaceStencil& A, const std::vector<double>& r, std::vector<double>& z,
             std::vector<double>& q) const {
    const std::size_t n = A.size();
    for (std::size_t p = 0; p < n; ++p) {
      double t = r[p];
      const int left = A.nbr[p][1], down = A.nbr[p][3];
      if (left >= 0) t += inv[left] * q[left];
      if (down >= 0) t += inv[down] * q[down];
      q[p] = t * inv[p];
    }
    for (std::size_t p = n; p-- > 0;) {
      double t = q[p];
      const int right = A.nbr[p][0], up = A.nbr[p][2];
      if (right >= 0) t += inv[p] * z[right];
      if (up >= 0) t += inv[p] * z[up];
      z[p] = t * inv[p];
    }
  }
};

}  // namespace detail

// Solve Laplace's equation in Omega ∩ U with u = F on dK and u = 0 on the
// free boundary (ghost-node treatment on both boundaries). `warm_start`, when
// given on the same grid, seeds the conjugate-gradient iteration.
inline HeightField solve_dirichlet(const SupportMask& support, double F, double tol = 1e-8,
                                   const HeightField* warm_start = nullptr, int max_iterations = 0) {
  if (!(F > 0.0)) throw PreconditionError("boundary height F must be positive");
  const Grid& g = *support.grid;
  const LaplaceStencil A(support);
  const std::size_t n = A.size();
  HeightField out{support.grid, support, F, std::vector<double>(g.size(), 0.0), {}, false};
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.solid_levels()[k] < 0.0) out.u[k] = F;
  if (n == 0) {
    out.solved = true;
    return out;
  }
  std::vector<double> b(n), x(n, 0.0);
  for (std::size_t p = 0; p < n; ++p) b[p] = F * A.solid_weight[p];
  if (warm_start != nullptr && warm_start->grid->same_layout(g)) {
    const double scale = warm_start->F > 0.0 ? F / warm_start->F : 1.0;
    for (std::size_t p = 0; p < n; ++p) x[p] = std::clamp(scale * warm_start->u[A.node_of[p]], 0.0, F);
  }
  double bnorm = 0.0;
  for (double v : b) bnorm += v * v;
  bnorm = std::sqrt(bnorm);
  if (bnorm == 0.0) {
    out.solved = true;
    return out;
  }
  const detail::MicPreconditioner M(A);
  std::vector<double> r(n), z(n), q(n), p(n), Ap(n);
  A.apply(x, Ap);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - Ap[k];
  auto norm2 = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
  };
  double rn = norm2(r);
  if (max_iterations <= 0) max_iterations = 20000;
  int it = 0;
  if (rn > tol * bnorm) {
    M.apply(A, r, z, q);
    p = z;
    double rz = 0.0;
    for (std::size_t k = 0; k < n; ++k) rz += r[k] * z[k];
    for (it = 1; it <= max_iterations; ++it) {
      A.apply(p, Ap);
      double pAp = 0.0;
      for (std::size_t k = 0; k < n; ++k) pAp += p[k] * Ap[k];
      const double alpha = rz / pAp;
      for (std::size_t k = 0; k < n; ++k) {
        x[k] += alpha * p[k];
        r[k] -= alpha * Ap[k];
      }
      rn = norm2(r);
      if (rn <= tol * bnorm) break;
      M.apply(A, r, z, q);
      double rz_new = 0.0;
      for (std::size_t k = 0; k < n; ++k) rz_new += r[k] * z[k];
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    if (it > max_iterations)
      throw NonConvergenceError("Dirichlet solve did not converge", rn / bnorm);
  }
  for (std::size_t k = 0; k < n; ++k) out.u[A.node_of[k]] = x[k];
  out.stats = {it, rn / bnorm};
  out.solved = true;
  return out;
}

inline HeightField solve_dirichlet(const Grid& grid, const SupportMask& support, double F, double tol = 1e-8) {
  require_same_grid(grid, *support.grid);
  return solve_dirichlet(support, F, tol);
}

// Largest |A u - b| over unknowns, scaled by 1/h^2 (a discrete Laplacian).
inline double laplacian_residual(const HeightField& f) {
  const LaplaceStencil A(f.support);
  double worst = 0.0;
  const double h2 = f.grid->h() * f.grid->h();
  for (std::size_t p = 0; p < A.size(); ++p) {
    double s = A.diag[p] * f.u[A.node_of[p]] - f.F * A.solid_weight[p];
    for (int q : A.nbr[p])
      if (q >= 0) s -= f.u[A.node_of[q]];
    worst = std::max(worst, std::abs(s) / h2);
  }
  return worst;
}

// ---------------------------------------------------------------------------

struct SlopeSample {
  Vec2 point;       // interface crossing on a grid edge
  double slope;     // |grad u| at the crossing
  Vec2 normal;      // outward unit normal of Omega
};

using SlopeSamples = std::vector<SlopeSample>;

// |grad u| at every edge crossing of the free boundary. The component along the
// edge axis is a one-sided difference from the crossing to the first wet node
// at least h/2 inside; the transverse component is a difference across that
// node, ending on the free boundary or on dK where those cut its edges.
// Crossings whose gradient makes more than 60 degrees with the axis are skipped.
inline SlopeSamples interface_slope(const HeightField& f) {
  if (!f.solved) throw PreconditionError("interface slope of an unsolved field");
  const Grid& g = *f.grid;
  const SupportMask& s = f.support;
  const double h = g.h();
  auto wet_free = [&](int i, int j) { return s.wet(g.index(i, j)) && !g.solid(i, j); };
  // value and signed offset of the end point reached from (i, j) one step along (di, dj)
  auto reach = [&](int i, int j, int di, int dj, double& value, double& offset) {
    const int qi = i + di, qj = j + dj;
    if (!g.inside(qi, qj)) return false;
    const std::size_t k = g.index(i, j), q = g.index(qi, qj);
    if (g.solid(qi, qj)) {
      value = f.F;
      offset = LaplaceStencil::fraction(-g.solid_level(i, j), -g.solid_level(qi, qj)) * h;
    } else if (!s.wet(q)) {
      value = 0.0;
      offset = LaplaceStencil::fraction(s.level[k], s.level[q]) * h;
    } else {
      value = f.u[q];
      offset = h;
    }
    return true;
  };
  SlopeSamples out;
  for (int j = 1; j + 1 < g.ny(); ++j) {
    for (int i = 1; i + 1 < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      if (!wet_free(i, j)) continue;
      for (int d = 0; d < 4; ++d) {
        const int di = LaplaceStencil::kDir[d][0], dj = LaplaceStencil::kDir[d][1];
        if (g.solid(i + di, j + dj) || s.wet(g.index(i + di, j + dj))) continue;
        const double a = s.level[k], b = s.level[g.index(i + di, j + dj)];
        const double theta = std::clamp(a / (a - b), 1e-9, 1.0);
        const Vec2 x = g.node(i, j) + theta * h * Vec2{static_cast<double>(di), static_cast<double>(dj)};
        int mi = i, mj = j;
        double dist = theta * h;
        if (dist < 0.5 * h && g.inside(i - di, j - dj) && wet_free(i - di, j - dj)) {
          mi = i - di;
          mj = j - dj;
          dist += h;
        } else if (theta < kThetaFloor) {
          continue;  // crossing on the node itself: u there is the solver's floor value
        }
        const double along = f.u[g.index(mi, mj)] / dist;  // -du/de at the crossing
        // transverse axis
        const int ti = dj != 0 ? 1 : 0, tj = di != 0 ? 1 : 0;
        double vp = 0.0, op = 0.0, vm = 0.0, om = 0.0;
        const bool hp = reach(mi, mj, ti, tj, vp, op);
        const bool hm = reach(mi, mj, -ti, -tj, vm, om);
        const double um = f.u[g.index(mi, mj)];
        double across = 0.0;
        if (hp && hm) across = (op * op * (um - vm) + om * om * (vp - um)) / (op * om * (op + om));
        else if (hp) across = (vp - um) / op;
        else if (hm) across = (um - vm) / om;
        const double slope = std::hypot(along, across);
        if (!(slope > 0.0) || along < 0.5 * slope) continue;
        // outward normal of Omega is -grad u / |grad u|
        const Vec2 e{static_cast<double>(di), static_cast<double>(dj)};
        const Vec2 et{static_cast<double>(ti), static_cast<double>(tj)};
        const Vec2 n = (1.0 / slope) * (along * e - across * et);
        out.push_back({x, slope, n});
      }
    }
  }
  return out;
}

// P = integral over dU of du/dn, normal pointing out of the fluid into K:
// the discrete flux through the solid-boundary edges of the stencil.
inline double pressure(const HeightField& f) {
  if (!f.solved) throw PreconditionError("pressure of an unsolved field");
  const LaplaceStencil A(f.support);
  double P = 0.0;
  A.for_each_edge(f.support, [&](LaplaceStencil::EdgeKind kind, std::size_t p, int, double th) {
    if (kind == LaplaceStencil::EdgeKind::solid) P += (f.F - f.u[A.node_of[p]]) / th;
  });
  return P;
}

// Flux of -du/dn across the free boundary (outward normal of Omega).
inline double free_boundary_flux(const HeightField& f) {
  const LaplaceStencil A(f.support);
  double Q = 0.0;
  A.for_each_edge(f.support, [&](LaplaceStencil::EdgeKind kind, std::size_t p, int, double th) {
    if (kind == LaplaceStencil::EdgeKind::free_boundary) Q += f.u[A.node_of[p]] / th;
  });
  return Q;
}

// ---------------------------------------------------------------------------
// Plain-text field dump: header "nx ny h ox oy", then ny rows of nx values.

inline void write_field(std::ostream& os, const Grid& g, std::span<const double> values) {
  os << std::setprecision(17) << g.nx() << ' ' << g.ny() << ' ' << g.h() << ' ' << g.origin().x << ' '
     << g.origin().y << '\n';
  os << std::setprecision(12);
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) os << (i ? " " : "") << values[g.index(i, j)];
    os << '\n';
  }
}

struct FieldDump {
  int nx = 0, ny = 0;
  double h = 0.0;
  Vec2 origin;
  std::vector<double> values;
};

inline FieldDump read_field(std::istream& is) {
  FieldDump d;
  if (!(is >> d.nx >> d.ny >> d.h >> d.origin.x >> d.origin.y)) throw Error("field dump: bad header");
  d.values.resize(static_cast<std::size_t>(d.nx) * d.ny);
  for (double& v : d.values)
    if (!(is >> v)) throw Error("field dump: truncated data");
  return d;
}

}  // namespace droplet
