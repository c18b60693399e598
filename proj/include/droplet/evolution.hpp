#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "droplet/energy.hpp"
#include "droplet/forcing.hpp"
#include "droplet/front.hpp"
#include "droplet/geometry.hpp"
#include "droplet/harmonic.hpp"
#include "droplet/pinning.hpp"
#include "droplet/report.hpp"

namespace droplet {

// Solved height field at time t; the support's level values double as the
// level-set function phi of the free boundary.
struct DropletState {
  double t = 0.0;
  HeightField field;
  int relax_steps = 0;

  double F() const { return field.F; }
  const GridPtr& grid() const { return field.grid; }
  const SupportMask& support() const { return field.support; }
  LevelSetField phi() const { return {field.grid, field.support.level}; }
};

inline DropletState make_state(LevelSetField phi, double F, double t = 0.0, double tol = 1e-8) {
  cover_solid(phi);
  DropletState s;
  s.t = t;
  s.field = solve_dirichlet(phi.support(), F, tol);
  return s;
}

// Initial droplet from a shape: signed distance to its boundary, solid covered.
inline DropletState make_state(const GridPtr& g, const Shape& wet, double F, double t = 0.0, double tol = 1e-8) {
  LevelSetField phi{g, SupportMask::from_shape(g, wet).level};
  cover_solid(phi);
  return make_state(signed_distance(phi.support()), F, t, tol);
}

// Reinitialize without changing which nodes are wet.
inline void reinitialize_keep_mask(LevelSetField& phi) {
  LevelSetField r = reinitialize(phi);
  for (std::size_t k = 0; k < r.phi.size(); ++k)
    if ((r.phi[k] < 0.0) != (phi.phi[k] < 0.0)) r.phi[k] = phi.phi[k];
  phi.phi = std::move(r.phi);
}

struct SlopeExcess {
  double excess = -std::numeric_limits<double>::infinity();  // max(s - q_adv, q_rec - s)
  Vec2 where{0.0, 0.0};
  double slope = 0.0;
};

inline SlopeExcess slope_band_excess(const SlopeSamples& samples, const PinningInterval& p) {
  SlopeExcess out;
  for (const auto& s : samples) {
    const double e = std::max(s.slope - p.q_adv(), p.q_rec() - s.slope);
    if (e > out.excess) out = {e, s.point, s.slope};
  }
  return out;
}

struct RelaxOutcome {
  LevelSetField phi;
  HeightField field;
  int steps = 0;
  double max_speed = 0.0;
};

// Pseudo-time relaxation of the free boundary at fixed boundary height F:
// solve, sample slopes, move the front with law(sample), project with
// constrain(phi), until max |V| < eps.
template <class Law, class Constrain>
RelaxOutcome relax_front(LevelSetField phi, double F, Law&& law, Constrain&& constrain, double eps,
                         const RelaxOptions& opt, const HeightField* warm = nullptr) {
  const Grid& g = *phi.grid;
  const double h = g.h();
  constrain(phi);
  cover_solid(phi);
  HeightField field;
  const HeightField* seed = warm;
  std::vector<double> v;
  for (int step = 0;; ++step) {
    const SupportMask support = phi.support();
    check_box_margin(support, opt.box_margin_cells);
    field = solve_dirichlet(support, F, opt.solver_tol, seed);
    seed = &field;
    const SlopeSamples samples =
        smooth_slopes(interface_slope(field), opt.smooth_radius_cells * h, opt.smooth_sigma_cells * h);
    v.resize(samples.size());
    double vmax = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      v[s] = law(samples[s]);
      vmax = std::max(vmax, std::abs(v[s]));
    }
    if (vmax < eps) return {std::move(phi), std::move(field), step, vmax};
    if (step >= opt.max_steps)
      throw NonConvergenceError("front relaxation hit the step cap", vmax);
    const std::vector<double> ext = extend_velocity(g, samples, v, opt.band_cells);
    const double dt = opt.cfl * h / std::max(vmax, opt.min_speed);
    advect(phi, ext, dt);
    constrain(phi);
    cover_solid(phi);
    if ((step + 1) % opt.reinit_every == 0) {
      reinitialize_keep_mask(phi);
      constrain(phi);
      cover_solid(phi);
    }
  }
}

inline double default_eps(const RelaxOptions& opt, const PinningInterval& p) {
  return opt.eps_stop > 0.0 ? opt.eps_stop : 1e-3 * p.q_adv();
}

// Obstacle relaxation at boundary height F_target. Increasing: the front only
// advances (V = max(s - q_adv, 0)) and never drops below the start support.
// Decreasing: it only recedes (V = min(s - q_rec, 0)) inside the start support.
inline DropletState relax_monotone(const DropletState& state, double F_target, Direction dir,
                                   const PinningInterval& p, const RelaxOptions& opt = {}) {
  const double dF = F_target - state.F();
  if ((dir == Direction::increasing && dF < 0.0) || (dir == Direction::decreasing && dF > 0.0) ||
      (dir == Direction::constant && dF != 0.0))
    throw PreconditionError("relaxation direction does not match the change in F");
  const double eps = default_eps(opt, p);
  if (!(eps > 0.0)) throw PreconditionError("stop tolerance must be positive");
  const std::vector<double> anchor = state.support().level;
  const double qa = p.q_adv(), qr = p.q_rec();
  RelaxOutcome r;
  if (dir == Direction::decreasing) {
    r = relax_front(
        state.phi(), F_target, [&](const SlopeSample& s) { return std::min(s.slope - qr, 0.0); },
        [&](LevelSetField& phi) {
          for (std::size_t k = 0; k < phi.phi.size(); ++k) phi.phi[k] = std::max(phi.phi[k], anchor[k]);
        },
        eps, opt, &state.field);
  } else {
    r = relax_front(
        state.phi(), F_target, [&](const SlopeSample& s) { return std::max(s.slope - qa, 0.0); },
        [&](LevelSetField& phi) {
          for (std::size_t k = 0; k < phi.phi.size(); ++k) phi.phi[k] = std::min(phi.phi[k], anchor[k]);
        },
        eps, opt, &state.field);
  }
  DropletState out;
  out.t = state.t;
  out.relax_steps = r.steps;
  if (r.steps == 0) {
    out.field = std::move(r.field);
    return out;
  }
  reinitialize_keep_mask(r.phi);
  out.field = solve_dirichlet(r.phi.support(), F_target, opt.solver_tol, &r.field);
  return out;
}

// ---------------------------------------------------------------------------

struct TraceEntry {
  double t = 0.0;
  double F = 0.0;
  double area = 0.0;
  double energy_J = 0.0;
  double diss_cum = 0.0;
  double pressure = 0.0;
  int n_components = 0;
  double hausdorff_step = 0.0;
  bool refined = false;  // inserted while bracketing a topology change
  // minimizing-movements only
  int k = -1;
  double delta = 0.0;
  int mm_inner_iters = 0;
  double descent_margin = 0.0;

  DropletState state;
  Boundary boundary;
};

struct EvolutionTrace {
  std::string scheme = "relaxation";
  PinningInterval pinning;
  std::vector<TraceEntry> entries;

  double h() const { return entries.empty() ? 0.0 : entries.front().state.grid()->h(); }
};

inline TraceEntry make_entry(DropletState s, const TraceEntry* prev, const PinningInterval& p) {
  TraceEntry e;
  e.t = s.t;
  e.F = s.F();
  e.area = measure(s.support());
  e.energy_J = energy_J(s.field);
  e.pressure = pressure(s.field);
  e.n_components = connected_components(s.support());
  e.boundary = extract_boundary(s.support());
  if (prev != nullptr) {
    e.hausdorff_step = hausdorff_distance(e.boundary, prev->boundary, 8.0 * s.grid()->h());
    e.diss_cum = prev->diss_cum + dissipation(s.support(), prev->state.support(), p);
  }
  e.state = std::move(s);
  return e;
}

struct EvolveOptions {
  RelaxOptions relax;
  double initial_slope_tol = -1.0;  // < 0 means 5 sqrt(h)
  bool refine_jumps = true;
  int refine_levels = 10;
  double refine_gap_cells = 1.5;    // stop bracketing a merge once the gap is below this many cells
  double refine_min_dt = 1e-6;
};

// Obstacle evolution sampled at output_times. Monotonicity changes of F are
// visited even when they are not outputs; each output is the relaxation limit
// from the preceding state, clamped against it. A change in the number of wet
// components between outputs is bracketed by bisection in time and the last
// state before the change is inserted as a refined entry.
inline EvolutionTrace evolve(const DropletState& initial, const Forcing& f, std::vector<double> output_times,
                             const PinningInterval& p, const EvolveOptions& opt = {}) {
  const double h = initial.grid()->h();
  const double tol = opt.initial_slope_tol >= 0.0 ? opt.initial_slope_tol : 5.0 * std::sqrt(h);
  const SlopeExcess ex = slope_band_excess(interface_slope(initial.field), p);
  if (ex.excess > tol) throw PreconditionError("initial state violates the local stability condition");
  std::sort(output_times.begin(), output_times.end());
  const double t0 = f.t_begin();
  if (!output_times.empty() && (output_times.front() < t0 - 1e-12 || output_times.back() > f.t_end() + 1e-12))
    throw PreconditionError("output times outside the forcing range");

  EvolutionTrace trace;
  trace.pinning = p;
  DropletState start = initial;
  start.t = t0;
  if (std::abs(start.F() - f.eval(t0)) > 1e-12 * f.eval(t0))
    start.field = solve_dirichlet(start.support(), f.eval(t0), opt.relax.solver_tol, &start.field);
  trace.entries.push_back(make_entry(start, nullptr, p));

  struct Event {
    double t;
    bool output;
  };
  std::vector<Event> events;
  for (double t : output_times)
    if (t > t0 + 1e-12) events.push_back({t, true});
  for (const auto& iv : f.monotonicity_partition())
    if (iv.t1 > t0 + 1e-12) events.push_back({iv.t1, false});
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });

  const auto partition = f.monotonicity_partition();
  auto direction_at = [&](double ta, double tb) {
    const double mid = 0.5 * (ta + tb);
    for (const auto& iv : partition)
      if (mid >= iv.t0 && mid <= iv.t1) return iv.direction;
    return Direction::constant;
  };
  auto advance = [&](const DropletState& from, double t) {
    const Direction dir = direction_at(from.t, t);
    const double F = f.eval(t);
    DropletState next;
    if (dir == Direction::constant || F == from.F()) {
      next = from;
    } else {
      next = relax_monotone(from, F, dir, p, opt.relax);
    }
    next.t = t;
    return next;
  };

  DropletState current = start;
  for (std::size_t e = 0; e < events.size(); ++e) {
    const double te = events[e].t;
    if (te <= current.t + 1e-12) {
      if (events[e].output && trace.entries.back().t < te - 1e-12)
        trace.entries.push_back(make_entry(current, &trace.entries.back(), p));
      continue;
    }
    DropletState next = advance(current, te);
    if (events[e].output) {
      const int before = trace.entries.back().n_components;
      const int after = connected_components(next.support());
      if (opt.refine_jumps && before != after && trace.entries.back().t >= current.t - 1e-12) {
        DropletState lo = current;
        double hi_t = te;
        for (int level = 0; level < opt.refine_levels; ++level) {
          if (before > after && component_gap(lo.support()) < opt.refine_gap_cells * h) break;
          if (hi_t - lo.t < opt.refine_min_dt) break;
          const double tm = 0.5 * (lo.t + hi_t);
          DropletState mid = advance(lo, tm);
          if (connected_components(mid.support()) == before) {
            lo = std::move(mid);
            TraceEntry entry = make_entry(lo, &trace.entries.back(), p);
            entry.refined = true;
            trace.entries.push_back(std::move(entry));
          } else {
            hi_t = tm;
          }
        }
      }
      trace.entries.push_back(make_entry(next, &trace.entries.back(), p));
    }
    current = std::move(next);
  }
  return trace;
}

// ---------------------------------------------------------------------------

struct JumpEvent {
  double t = 0.0;         // first output after the jump
  double t_before = 0.0;  // last output before it
  double hausdorff_jump = 0.0;
  double threshold = 0.0;
  int component_count_before = 0;
  int component_count_after = 0;
  std::size_t index = 0;  // entry index of the post-jump output
};

inline double boundary_diameter(const Boundary& b) {
  std::vector<Vec2> pts;
  for (const auto& c : b) pts.insert(pts.end(), c.points.begin(), c.points.end());
  const auto hull = convex_hull(std::move(pts));
  double d = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j) d = std::max(d, distance(hull[i], hull[j]));
  return d;
}

// Consecutive outputs whose boundaries move farther than
// theta_jump * (|dF| / min F) * diam(Omega) (never less than 2h), or whose
// component count differs.
inline std::vector<JumpEvent> detect_jumps(const EvolutionTrace& trace, double theta_jump = 5.0) {
  std::vector<JumpEvent> out;
  const double h = trace.h();
  for (std::size_t i = 1; i < trace.entries.size(); ++i) {
    const TraceEntry& a = trace.entries[i - 1];
    const TraceEntry& b = trace.entries[i];
    const double diam = std::max(boundary_diameter(a.boundary), boundary_diameter(b.boundary));
    const double thr = std::max(theta_jump * std::abs(b.F - a.F) / std::min(a.F, b.F) * diam, 2.0 * h);
    if (b.hausdorff_step > thr || a.n_components != b.n_components)
      out.push_back({b.t, a.t, b.hausdorff_step, thr, a.n_components, b.n_components, i});
  }
  return out;
}

// Obstacle-Bernoulli conditions of state_t relative to its anchor state_s.
// Increasing: Omega(s) inside Omega(t); points of dOmega(t) more than
// move_threshold outside Omega(s) carry slope q_adv; the rest at most q_adv.
// Decreasing mirrors this with q_rec. The margin is the worst slope deviation
// (or, for a containment failure, the distance by which it fails).
inline CheckReport verify_ovs(const DropletState& state_t, const DropletState& state_s, Direction dir,
                              const PinningInterval& p, double tol, double move_threshold = -1.0) {
  require_same_grid(*state_t.grid(), *state_s.grid());
  const Grid& g = *state_t.grid();
  if (move_threshold < 0.0) move_threshold = 2.0 * g.h();
  CheckReport rep;
  rep.check = "verify_ovs";
  rep.tolerance = tol;
  rep.t = state_t.t;
  const auto& lt = state_t.support().level;
  const auto& ls = state_s.support().level;
  int moved = 0;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const bool bad = dir == Direction::decreasing ? (lt[k] < 0.0 && ls[k] >= 0.0) : (ls[k] < 0.0 && lt[k] >= 0.0);
      if (bad) rep.offer(tol + g.h(), state_t.t, g.node(i, j));
    }
  const LevelSetField phi_s = signed_distance(state_s.support());
  for (const auto& s : interface_slope(state_t.field)) {
    const double d = phi_s(s.point);
    double m;
    if (dir == Direction::decreasing) {
      if (d < -move_threshold) {
        m = std::abs(s.slope - p.q_rec());
        ++moved;
      } else {
        m = p.q_rec() - s.slope;
      }
    } else {
      if (d > move_threshold) {
        m = std::abs(s.slope - p.q_adv());
        ++moved;
      } else {
        m = s.slope - p.q_adv();
      }
    }
    rep.offer(m, state_t.t, s.point);
  }
  rep.note = "moved samples: " + std::to_string(moved);
  return rep.finish();
}

}  // namespace droplet
