#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "droplet/evolution.hpp"
#include "droplet/forcing.hpp"
#include "droplet/report.hpp"

namespace droplet {

inline double default_slope_tol(double h) { return 5.0 * std::sqrt(h); }

// Every interface slope sample lies in [q_rec - tol, q_adv + tol]. The margin is
// max(s - q_adv, q_rec - s) over the samples.
inline CheckReport slope_bounds_check(const DropletState& state, const PinningInterval& p, double tol) {
  CheckReport rep;
  rep.check = "slope_bounds";
  rep.tolerance = tol;
  rep.t = state.t;
  for (const auto& s : interface_slope(state.field))
    rep.offer(std::max(s.slope - p.q_adv(), p.q_rec() - s.slope), state.t, s.point);
  if (!std::isfinite(rep.margin)) rep.margin = 0.0;
  return rep.finish();
}

inline CheckReport slope_bounds_check(const EvolutionTrace& trace, double tol) {
  CheckReport rep;
  rep.check = "slope_bounds";
  rep.tolerance = tol;
  for (const auto& e : trace.entries) {
    const CheckReport r = slope_bounds_check(e.state, trace.pinning, tol);
    rep.offer(r.margin, r.t, r.where);
  }
  if (!std::isfinite(rep.margin)) rep.margin = 0.0;
  return rep.finish();
}

// Points of each later boundary lying more than move_threshold outside the
// earlier support must sit at q_adv; more than move_threshold inside, at q_rec.
inline CheckReport dynamic_slope_check(const EvolutionTrace& trace, const PinningInterval& p, double tol,
                                       double move_threshold = -1.0) {
  CheckReport rep;
  rep.check = "dynamic_slope";
  rep.tolerance = tol;
  if (trace.entries.empty()) {
    rep.margin = 0.0;
    return rep.finish();
  }
  if (move_threshold < 0.0) move_threshold = 2.0 * trace.h();
  int advanced = 0, receded = 0;
  for (std::size_t i = 1; i < trace.entries.size(); ++i) {
    const TraceEntry& a = trace.entries[i - 1];
    const TraceEntry& b = trace.entries[i];
    const LevelSetField phi_a = signed_distance(a.state.support());
    for (const auto& s : interface_slope(b.state.field)) {
      const double d = phi_a(s.point);
      if (d > move_threshold) {
        rep.offer(std::abs(s.slope - p.q_adv()), b.t, s.point);
        ++advanced;
      } else if (d < -move_threshold) {
        rep.offer(std::abs(s.slope - p.q_rec()), b.t, s.point);
        ++receded;
      }
    }
  }
  if (!std::isfinite(rep.margin)) rep.margin = 0.0;
  rep.note = "advanced samples: " + std::to_string(advanced) + ", receded samples: " + std::to_string(receded);
  return rep.finish();
}

// Omega_a(t) inside Omega_b(t) dilated by one cell at every common output
// time. The margin is the largest signed distance from Omega_b of a node wet
// in Omega_a; tolerance h.
inline CheckReport ordering_check(const EvolutionTrace& trace_a, const EvolutionTrace& trace_b) {
  if (trace_a.entries.empty() || trace_b.entries.empty()) throw PreconditionError("ordering_check needs two non-empty traces");
  const Grid& g = *trace_a.entries.front().state.grid();
  require_same_grid(g, *trace_b.entries.front().state.grid());
  const double h = g.h();
  CheckReport rep;
  rep.check = "ordering";
  rep.tolerance = h;

  std::vector<std::pair<const TraceEntry*, const TraceEntry*>> pairs;
  std::size_t j = 0;
  for (const auto& ea : trace_a.entries) {
    if (ea.refined) continue;
    while (j < trace_b.entries.size() && (trace_b.entries[j].refined || trace_b.entries[j].t < ea.t - 1e-9)) ++j;
    if (j < trace_b.entries.size() && std::abs(trace_b.entries[j].t - ea.t) <= 1e-9) pairs.push_back({&ea, &trace_b.entries[j]});
  }
  if (pairs.empty()) throw PreconditionError("traces share no output times");
  for (auto [a, b] : pairs)
    if (a->F > b->F * (1.0 + 1e-12)) throw PreconditionError("forcings are not ordered (F_a > F_b)");

  auto check_pair = [&](const TraceEntry& a, const TraceEntry& b) {
    const LevelSetField phi_b = signed_distance(b.state.support());
    const SupportMask& sa = a.state.support();
    double worst = -std::numeric_limits<double>::infinity();
    Vec2 at{0.0, 0.0};
    for (int jj = 0; jj < g.ny(); ++jj)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t k = g.index(i, jj);
        if (sa.wet(k) && phi_b.phi[k] > worst) worst = phi_b.phi[k], at = g.node(i, jj);
      }
    return std::pair{worst, at};
  };
  const auto [m0, p0] = check_pair(*pairs.front().first, *pairs.front().second);
  if (m0 > h) throw PreconditionError("initial supports are not ordered");
  for (auto [a, b] : pairs) {
    const auto [m, at] = check_pair(*a, *b);
    rep.offer(m, a->t, at);
  }
  return rep.finish();
}

namespace detail {

inline std::set<std::size_t> jump_indices(const EvolutionTrace& trace) {
  std::set<std::size_t> out;
  for (const auto& j : detect_jumps(trace)) out.insert(j.index);
  return out;
}

// Entries kept for regularity checks: refined brackets dropped, with a flag
// marking pairs that straddle a detected jump.
struct Regular {
  std::vector<const TraceEntry*> entries;
  std::vector<bool> jump_after;  // jump between entries[i] and entries[i+1]
};

inline Regular regular_entries(const EvolutionTrace& trace) {
  const auto jumps = jump_indices(trace);
  Regular r;
  bool pending = false;
  for (std::size_t i = 0; i < trace.entries.size(); ++i) {
    if (jumps.count(i)) pending = true;
    if (trace.entries[i].refined) continue;
    if (!r.entries.empty()) r.jump_after.push_back(pending);
    pending = false;
    r.entries.push_back(&trace.entries[i]);
  }
  return r;
}

inline double sup_difference(const HeightField& a, const HeightField& b, Vec2* where) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.u.size(); ++k) {
    const double d = std::abs(a.u[k] - b.u[k]);
    if (d > worst) {
      worst = d;
      if (where) *where = a.grid->node(static_cast<int>(k % a.grid->nx()), static_cast<int>(k / a.grid->nx()));
    }
  }
  return worst;
}

}  // namespace detail

// C_est = max over consecutive jump-free pairs of sup|du| / (|F'|_inf dt),
// recomputed on every other output. Passes when the two estimates agree
// within a factor 2; the margin is |log2(ratio)| against tolerance 1.
inline CheckReport time_lipschitz_check(const EvolutionTrace& trace, const Forcing& f) {
  CheckReport rep;
  rep.check = "time_lipschitz";
  rep.tolerance = 1.0;
  const double L = f.lipschitz();
  const detail::Regular r = detail::regular_entries(trace);
  auto estimate = [&](std::size_t stride, double* t_at, Vec2* x_at) {
    double c = 0.0;
    for (std::size_t i = 0; i + stride < r.entries.size(); i += stride) {
      bool jump = false;
      for (std::size_t s = i; s < i + stride; ++s) jump = jump || r.jump_after[s];
      if (jump) continue;
      const TraceEntry& a = *r.entries[i];
      const TraceEntry& b = *r.entries[i + stride];
      if (!(b.t > a.t)) continue;
      Vec2 where{0.0, 0.0};
      const double du = detail::sup_difference(a.state.field, b.state.field, &where);
      const double ci = L > 0.0 ? du / (L * (b.t - a.t)) : 0.0;
      if (ci > c) {
        c = ci;
        if (t_at) *t_at = b.t;
        if (x_at) *x_at = where;
      }
    }
    return c;
  };
  double t_at = 0.0;
  Vec2 x_at{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  const double c1 = estimate(1, &t_at, &x_at);
  const double c2 = estimate(2, nullptr, nullptr);
  rep.value = c1;
  rep.t = t_at;
  rep.where = x_at;
  if (c1 == 0.0 && c2 == 0.0) rep.margin = 0.0;
  else if (c1 == 0.0 || c2 == 0.0) rep.margin = std::numeric_limits<double>::infinity();
  else rep.margin = std::abs(std::log2(c1 / c2));
  rep.note = "C_est at doubled interval: " + std::to_string(c2);
  return rep.finish();
}

// Consecutive jump-free outputs satisfy d_H <= C_H dt + 2h, with C_H twice the
// largest rate d_H / dt seen over the first half of the trace, tested on the
// second half.
inline CheckReport hausdorff_lipschitz_check(const EvolutionTrace& trace) {
  CheckReport rep;
  rep.check = "hausdorff_lipschitz";
  rep.tolerance = 0.0;
  const double h = trace.h();
  const detail::Regular r = detail::regular_entries(trace);
  if (r.entries.size() < 2) {
    rep.margin = 0.0;
    return rep.finish();
  }
  const double t_mid = 0.5 * (r.entries.front()->t + r.entries.back()->t);
  int skipped = 0;
  double rate = 0.0;
  struct Pair {
    double t, dt, d;
  };
  std::vector<Pair> late;
  for (std::size_t i = 0; i + 1 < r.entries.size(); ++i) {
    if (r.jump_after[i]) {
      ++skipped;
      continue;
    }
    const TraceEntry& a = *r.entries[i];
    const TraceEntry& b = *r.entries[i + 1];
    const double dt = b.t - a.t;
    if (!(dt > 0.0)) continue;
    const double d = hausdorff_distance(a.boundary, b.boundary, 8.0 * h);
    if (b.t <= t_mid + 1e-12) rate = std::max(rate, d / dt);
    else late.push_back({b.t, dt, d});
  }
  const double C_H = 2.0 * rate;
  rep.value = C_H;
  for (const auto& q : late) rep.offer(q.d - C_H * q.dt - 2.0 * h, q.t, {std::numeric_limits<double>::quiet_NaN(), 0.0});
  if (!std::isfinite(rep.margin)) rep.margin = 0.0;
  rep.where = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  rep.note = "pairs skipped across jumps: " + std::to_string(skipped);
  return rep.finish();
}

// sup of u over B_r(x) is at least c0 r at every boundary vertex x and every r
// in r_list whose ball stays inside the box. The sup is taken over the nodes in
// the ball and 32 bilinear samples on its rim. The margin is c0 r - sup.
inline CheckReport nondegeneracy_check(const DropletState& state, const std::vector<double>& r_list, double c0) {
  const Grid& g = *state.grid();
  const double h = g.h();
  CheckReport rep;
  rep.check = "nondegeneracy";
  rep.tolerance = 0.0;
  rep.t = state.t;
  const Vec2 lo = g.origin();
  const Vec2 hi = g.node(g.nx() - 1, g.ny() - 1);
  for (const auto& c : extract_boundary(state.support()))
    for (Vec2 x : c.points)
      for (double r : r_list) {
        if (x.x - r < lo.x || x.y - r < lo.y || x.x + r > hi.x || x.y + r > hi.y) continue;
        const int i0 = std::max(0, static_cast<int>(std::floor((x.x - r - lo.x) / h)));
        const int i1 = std::min(g.nx() - 1, static_cast<int>(std::ceil((x.x + r - lo.x) / h)));
        const int j0 = std::max(0, static_cast<int>(std::floor((x.y - r - lo.y) / h)));
        const int j1 = std::min(g.ny() - 1, static_cast<int>(std::ceil((x.y + r - lo.y) / h)));
        double sup = 0.0;
        for (int j = j0; j <= j1; ++j)
          for (int i = i0; i <= i1; ++i)
            if (distance(g.node(i, j), x) <= r) sup = std::max(sup, state.field.at(i, j));
        for (int k = 0; k < 32; ++k) {
          const double a = 2.0 * M_PI * k / 32.0;
          sup = std::max(sup, g.interpolate(state.field.u, x + r * Vec2{std::cos(a), std::sin(a)}));
        }
        rep.offer(c0 * r - sup, state.t, x);
      }
  if (!std::isfinite(rep.margin)) rep.margin = 0.0;
  return rep.finish();
}

inline std::vector<double> default_nondegeneracy_radii(double h) { return {2.0 * h, 4.0 * h, 8.0 * h}; }

}  // namespace droplet
