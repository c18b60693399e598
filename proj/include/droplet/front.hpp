#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <limits>
#include <vector>

#include "droplet/geometry.hpp"
#include "droplet/harmonic.hpp"

namespace droplet {

// Knobs of the pseudo-time front relaxation shared by the obstacle driver and
// the minimizing-movements step.
struct RelaxOptions {
  double eps_stop = 0.0;        // stop when max |V_n| < eps_stop; <= 0 means 1e-3 * q_adv
  int max_steps = 100000;       // advection steps per call
  int reinit_every = 10;
  double cfl = 0.5;             // front moves at most cfl * h per step
  double min_speed = 0.05;      // dtau = cfl * h / max(max|V|, min_speed)
  int band_cells = 5;           // velocity extension band
  double smooth_radius_cells = 2.5;  // slope averaging along the front
  double smooth_sigma_cells = 1.5;
  double solver_tol = 1e-8;
  int box_margin_cells = 2;
};

// Gaussian-weighted average of slope samples within `radius` of each other.
// Removes the grid-scale scatter of edge-wise slope estimates before they
// drive the front.
inline SlopeSamples smooth_slopes(const SlopeSamples& samples, double radius, double sigma) {
  if (samples.empty() || !(radius > 0.0)) return samples;
  double x0 = samples[0].point.x, y0 = samples[0].point.y;
  for (const auto& s : samples) x0 = std::min(x0, s.point.x), y0 = std::min(y0, s.point.y);
  auto key = [&](int a, int b) { return (static_cast<std::int64_t>(a) << 32) ^ static_cast<std::uint32_t>(b); };
  auto cell = [&](Vec2 p) {
    return std::pair<int, int>{static_cast<int>((p.x - x0) / radius), static_cast<int>((p.y - y0) / radius)};
  };
  std::unordered_map<std::int64_t, std::vector<std::size_t>> bins;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [a, b] = cell(samples[i].point);
    bins[key(a, b)].push_back(i);
  }
  SlopeSamples out = samples;
  const double r2 = radius * radius, s2 = sigma * sigma;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [a, b] = cell(samples[i].point);
    double w = 0.0, acc = 0.0;
    for (int da = -1; da <= 1; ++da)
      for (int db = -1; db <= 1; ++db) {
        auto it = bins.find(key(a + da, b + db));
        if (it == bins.end()) continue;
        for (std::size_t j : it->second) {
          const Vec2 d = samples[j].point - samples[i].point;
          const double d2 = dot(d, d);
          if (d2 > r2) continue;
          const double wj = std::exp(-d2 / s2);
          w += wj;
          acc += wj * samples[j].slope;
        }
      }
    out[i].slope = acc / w;
  }
  return out;
}

// Extension of interface velocities to the nodes within band_cells of a
// sample: Gaussian-weighted average of the samples within two cells of the
// node, falling back to the nearest sample farther out.
inline std::vector<double> extend_velocity(const Grid& g, const SlopeSamples& samples, std::span<const double> v,
                                           int band_cells, double sigma_cells = 1.0) {
  const double h = g.h();
  const double band = band_cells * h;
  const double near2 = 4.0 * h * h, s2 = sigma_cells * sigma_cells * h * h;
  std::vector<double> ext(g.size(), 0.0), wsum(g.size(), 0.0);
  std::vector<double> best(g.size(), band * band * (1.0 + 1e-12));
  std::vector<double> nearest(g.size(), 0.0);
  const Vec2 o = g.origin();
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const Vec2 p = samples[s].point;
    const int i0 = std::max(0, static_cast<int>(std::floor((p.x - band - o.x) / h)));
    const int i1 = std::min(g.nx() - 1, static_cast<int>(std::ceil((p.x + band - o.x) / h)));
    const int j0 = std::max(0, static_cast<int>(std::floor((p.y - band - o.y) / h)));
    const int j1 = std::min(g.ny() - 1, static_cast<int>(std::ceil((p.y + band - o.y) / h)));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        const Vec2 d = g.node(i, j) - p;
        const double d2 = dot(d, d);
        const std::size_t k = g.index(i, j);
        if (d2 < best[k]) {
          best[k] = d2;
          nearest[k] = v[s];
        }
        if (d2 <= near2) {
          const double w = std::exp(-d2 / s2);
          ext[k] += w * v[s];
          wsum[k] += w;
        }
      }
  }
  for (std::size_t k = 0; k < ext.size(); ++k) ext[k] = wsum[k] > 0.0 ? ext[k] / wsum[k] : nearest[k];
  return ext;
}

// One explicit Godunov step of phi_t + V |grad phi| = 0 (V > 0 moves the front outward).
inline void advect(LevelSetField& phi, const std::vector<double>& V, double dt) {
  const Grid& g = *phi.grid;
  const double h = g.h();
  const std::vector<double> old = phi.phi;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const double v = V[k];
      if (v == 0.0) continue;
      const double c = old[k];
      const double dxm = i > 0 ? (c - old[k - 1]) / h : 0.0;
      const double dxp = i + 1 < g.nx() ? (old[k + 1] - c) / h : 0.0;
      const double dym = j > 0 ? (c - old[k - g.nx()]) / h : 0.0;
      const double dyp = j + 1 < g.ny() ? (old[k + g.nx()] - c) / h : 0.0;
      double grad2;
      if (v > 0.0) {
        grad2 = std::pow(std::max(dxm, 0.0), 2) + std::pow(std::min(dxp, 0.0), 2) + std::pow(std::max(dym, 0.0), 2) +
                std::pow(std::min(dyp, 0.0), 2);
      } else {
        grad2 = std::pow(std::min(dxm, 0.0), 2) + std::pow(std::max(dxp, 0.0), 2) + std::pow(std::min(dym, 0.0), 2) +
                std::pow(std::max(dyp, 0.0), 2);
      }
      phi.phi[k] = c - dt * v * std::sqrt(grad2);
    }
  }
}

// Keep the solid K inside the wet set.
inline void cover_solid(LevelSetField& phi) {
  const auto solid = phi.grid->solid_levels();
  for (std::size_t k = 0; k < phi.phi.size(); ++k) phi.phi[k] = std::min(phi.phi[k], solid[k]);
}

inline void check_box_margin(const SupportMask& s, int cells) {
  const Grid& g = *s.grid;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if ((i < cells || j < cells || i >= g.nx() - cells || j >= g.ny() - cells) && s.wet(g.index(i, j)))
        throw BoxReachedError("wet region reached the computational box");
}

}  // namespace droplet
