#pragma once

#include "droplet/geometry.hpp"
#include "droplet/harmonic.hpp"
#include "droplet/pinning.hpp"

namespace droplet {

// Discrete Dirichlet energy of u over U: the quadratic form whose minimiser is
// the ghost-node solve. Interface edges of length theta*h contribute
// (jump)^2 / theta, interior edges (u_p - u_q)^2.
inline double dirichlet_energy(const HeightField& f) {
  const LaplaceStencil A(f.support);
  double E = 0.0;
  A.for_each_edge(f.support, [&](LaplaceStencil::EdgeKind kind, std::size_t p, int q, double th) {
    const double up = f.u[A.node_of[p]];
    switch (kind) {
      case LaplaceStencil::EdgeKind::interior: {
        const double d = up - f.u[A.node_of[static_cast<std::size_t>(q)]];
        E += d * d;
        break;
      }
      case LaplaceStencil::EdgeKind::free_boundary: E += up * up / th; break;
      case LaplaceStencil::EdgeKind::solid: E += (f.F - up) * (f.F - up) / th; break;
    }
  });
  return E;
}

// J(u) = int_U |grad u|^2 + 1_{u > 0}.
inline double energy_J(const HeightField& f) { return dirichlet_energy(f) + measure(f.support); }

// Diss(old -> new) = mu_plus |new \ old| + mu_minus |old \ new|.
inline double dissipation(const SupportMask& new_support, const SupportMask& old_support, const PinningInterval& p) {
  const auto [gained, lost] = set_difference_measures(new_support, old_support);
  return p.mu_plus * gained + p.mu_minus * lost;
}

}  // namespace droplet
