#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "droplet/energy.hpp"
#include "droplet/evolution.hpp"
#include "droplet/forcing.hpp"
#include "droplet/report.hpp"

namespace droplet {

struct MMOptions {
  RelaxOptions relax;
  int max_rejections = 8;  // successive step halvings before the step is declared stationary
};

struct MMStepResult {
  DropletState state;
  int inner_iters = 0;
  int rejections = 0;
  double objective = 0.0;       // J(out) + Diss(prev, out)
  double descent_margin = 0.0;  // J(prev support at F_k) - objective
};

inline double mm_objective(const HeightField& f, const SupportMask& prev, const PinningInterval& p) {
  return energy_J(f) + dissipation(f.support, prev, p);
}

// One incremental minimization of J(w) + Diss(prev, w) with w = F_k on dK.
// The support follows the stationarity law of the incremental problem:
// V = s - q_adv outside the previous support, s - q_rec inside it, and the
// pinned law max(s - q_adv, 0) + min(s - q_rec, 0) on its boundary (within
// h/4). With the support fixed, w is the harmonic solve. A pseudo-step that
// increases the objective is retried at half length.
inline MMStepResult mm_step(const DropletState& prev, double F_k, const PinningInterval& p, const MMOptions& opt = {}) {
  if (!prev.field.solved) throw PreconditionError("minimizing-movements step from an unsolved state");
  const Grid& g = *prev.grid();
  const double h = g.h();
  const RelaxOptions& ro = opt.relax;
  const double eps = default_eps(ro, p);
  const double qa = p.q_adv(), qr = p.q_rec();
  const SupportMask& prev_support = prev.support();
  const std::vector<double> prev_dist = signed_distance(prev_support).phi;

  LevelSetField phi = prev.phi();
  HeightField field = solve_dirichlet(phi.support(), F_k, ro.solver_tol, &prev.field);
  double G = mm_objective(field, prev_support, p);
  const double G0 = G;
  MMStepResult out;
  double scale = 1.0;
  int streak = 0;
  for (int step = 0;; ++step) {
    const SlopeSamples samples =
        smooth_slopes(interface_slope(field), ro.smooth_radius_cells * h, ro.smooth_sigma_cells * h);
    std::vector<double> v(samples.size());
    double vmax = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const double d = g.interpolate(prev_dist, samples[s].point);
      const double sl = samples[s].slope;
      if (d > 0.25 * h) v[s] = sl - qa;
      else if (d < -0.25 * h) v[s] = sl - qr;
      else v[s] = std::max(sl - qa, 0.0) + std::min(sl - qr, 0.0);
      vmax = std::max(vmax, std::abs(v[s]));
    }
    if (vmax < eps || streak >= opt.max_rejections) break;
    if (out.inner_iters >= ro.max_steps) throw NonConvergenceError("minimizing-movements step hit the step cap", vmax);
    ++out.inner_iters;
    const std::vector<double> ext = extend_velocity(g, samples, v, ro.band_cells);
    LevelSetField trial = phi;
    advect(trial, ext, scale * ro.cfl * h / std::max(vmax, ro.min_speed));
    cover_solid(trial);
    if (step % ro.reinit_every == ro.reinit_every - 1) reinitialize_keep_mask(trial);
    const SupportMask ts = trial.support();
    check_box_margin(ts, ro.box_margin_cells);
    HeightField tf = solve_dirichlet(ts, F_k, ro.solver_tol, &field);
    const double Gt = mm_objective(tf, prev_support, p);
    if (Gt <= G) {
      phi = std::move(trial);
      field = std::move(tf);
      G = Gt;
      scale = std::min(1.0, 2.0 * scale);
      streak = 0;
    } else {
      scale *= 0.5;
      ++streak;
      ++out.rejections;
    }
  }
  out.state.t = prev.t;
  out.state.field = std::move(field);
  out.state.relax_steps = out.inner_iters;
  out.objective = G;
  out.descent_margin = G0 - G;
  return out;
}

struct MMTrace : EvolutionTrace {
  double delta = 0.0;
};

// u_delta^k at t = t0 + k delta, k = 0 .. floor((T - t0) / delta).
inline MMTrace mm_evolve(const DropletState& initial, const Forcing& f, double delta, const PinningInterval& p,
                         const MMOptions& opt = {}) {
  if (!(delta > 0.0)) throw PreconditionError("time step must be positive");
  MMTrace trace;
  trace.scheme = "minimizing_movements";
  trace.pinning = p;
  trace.delta = delta;
  const double t0 = f.t_begin();
  DropletState cur = initial;
  cur.t = t0;
  if (std::abs(cur.F() - f.eval(t0)) > 1e-12 * f.eval(t0))
    cur.field = solve_dirichlet(cur.support(), f.eval(t0), opt.relax.solver_tol, &cur.field);
  TraceEntry first = make_entry(cur, nullptr, p);
  first.k = 0;
  first.delta = delta;
  trace.entries.push_back(std::move(first));
  const int K = static_cast<int>(std::floor((f.t_end() - t0) / delta + 1e-9));
  for (int k = 1; k <= K; ++k) {
    const double t = t0 + k * delta;
    MMStepResult r = mm_step(cur, f.eval(t), p, opt);
    r.state.t = t;
    TraceEntry e = make_entry(r.state, &trace.entries.back(), p);
    e.k = k;
    e.delta = delta;
    e.mm_inner_iters = r.inner_iters;
    e.descent_margin = r.descent_margin;
    trace.entries.push_back(std::move(e));
    cur = std::move(r.state);
  }
  return trace;
}

// ---------------------------------------------------------------------------

struct Competitor {
  std::string kind;  // identity | add | remove | bridge
  Vec2 centre{0.0, 0.0};
  double radius = 0.0;
  double margin = 0.0;  // J(u') + Diss(u, u') - J(u)
};

struct StabilityReport {
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_bridge_margin = std::numeric_limits<double>::infinity();
  Competitor worst;
  std::vector<Competitor> competitors;
  std::uint64_t seed = 0;
};

namespace detail {

// Closest pair of boundary points that belong to different wet components.
inline std::optional<std::pair<Vec2, Vec2>> closest_component_points(const SupportMask& s) {
  const ComponentLabels labels = label_components(s);
  if (labels.count < 2) return std::nullopt;
  const Boundary curves = extract_boundary(*s.grid, s.level);
  std::vector<std::pair<Vec2, int>> pts;
  for (const auto& c : curves) {
    std::map<int, int> votes;
    for (Vec2 p : c.points) ++votes[component_at(*s.grid, labels, p)];
    int best = -1, bv = -1;
    for (auto [l, v] : votes)
      if (v > bv) best = l, bv = v;
    for (Vec2 p : c.points) pts.push_back({p, best});
  }
  double bd = std::numeric_limits<double>::infinity();
  std::pair<Vec2, Vec2> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[i].second == pts[j].second) continue;
      const double d = distance(pts[i].first, pts[j].first);
      if (d < bd) bd = d, out = {pts[i].first, pts[j].first};
    }
  return out;
}

}  // namespace detail

// Samples competitors u' (the harmonic replacement on a perturbed support) and
// returns the smallest J(u') + Diss(u, u') - J(u). Perturbations: disks of
// radius 2h, 4h or 8h added to or removed from the support at random boundary
// points; for disconnected supports, disks bridging the two closest boundary
// points; and u' = u itself.
inline StabilityReport global_stability_check(const DropletState& u, const PinningInterval& p, int n_samples,
                                              std::uint64_t seed = 20240601, double tol = 1e-8) {
  const Grid& g = *u.grid();
  const double h = g.h();
  const double J0 = energy_J(u.field);
  const SupportMask& base = u.support();
  const auto solid = g.solid_levels();
  StabilityReport rep;
  rep.seed = seed;
  auto evaluate = [&](Competitor c) {
    SupportMask s = base;
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const std::size_t k = g.index(i, j);
        const double d = distance(g.node(i, j), c.centre) - c.radius;
        if (c.kind == "remove") s.level[k] = std::min(std::max(s.level[k], -d), solid[k]);
        else if (c.kind != "identity") s.level[k] = std::min(s.level[k], d);
      }
    const HeightField f = solve_dirichlet(s, u.F(), tol, &u.field);
    c.margin = energy_J(f) + dissipation(s, base, p) - J0;
    if (c.margin < rep.worst_margin) {
      rep.worst_margin = c.margin;
      rep.worst = c;
    }
    if (c.kind == "bridge") rep.worst_bridge_margin = std::min(rep.worst_bridge_margin, c.margin);
    rep.competitors.push_back(c);
  };
  Competitor id;
  id.kind = "identity";
  id.margin = 0.0;
  rep.competitors.push_back(id);
  rep.worst_margin = 0.0;
  rep.worst = id;
  const double radii[3] = {2.0 * h, 4.0 * h, 8.0 * h};
  if (auto pair = detail::closest_component_points(base)) {
    const Vec2 mid = 0.5 * (pair->first + pair->second);
    for (double r : radii) evaluate({"bridge", mid, std::max(r, 0.5 * distance(pair->first, pair->second) + h), 0.0});
  }
  std::vector<Vec2> pts;
  for (const auto& c : extract_boundary(base)) pts.insert(pts.end(), c.points.begin(), c.points.end());
  std::mt19937_64 rng(seed);
  for (int n = 0; n < n_samples && !pts.empty(); ++n) {
    const Vec2 c = pts[rng() % pts.size()];
    const double r = radii[rng() % 3];
    evaluate({(rng() & 1u) ? "add" : "remove", c, r, 0.0});
  }
  return rep;
}

// J(t0) - J(t1) + int 2 F'(t) P(t) dt - Diss(t0, t1) over consecutive recorded
// pairs; F' is the exact segment slope and P is linear between records. The
// margin is the worst -(residual) - quadrature allowance, where the allowance
// is |dF| |second difference of P| / 6 at the pair.
inline CheckReport dissipation_inequality_check(const EvolutionTrace& trace, const Forcing& f, double tolerance = -1.0) {
  CheckReport rep;
  rep.check = "dissipation_inequality";
  rep.tolerance = tolerance >= 0.0 ? tolerance : 5.0 * trace.h();
  const auto& E = trace.entries;
  const PinningInterval& p = trace.pinning;
  double worst_residual = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < E.size(); ++i) {
    const TraceEntry& a = E[i];
    const TraceEntry& b = E[i + 1];
    std::vector<double> cuts{a.t};
    for (const auto& bp : f.breakpoints())
      if (bp.t > a.t && bp.t < b.t) cuts.push_back(bp.t);
    cuts.push_back(b.t);
    auto P_at = [&](double t) { return b.t > a.t ? a.pressure + (b.pressure - a.pressure) * (t - a.t) / (b.t - a.t) : a.pressure; };
    double work = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double t0 = cuts[c], t1 = cuts[c + 1];
      const double Fdot = (f.eval(t1) - f.eval(t0)) / (t1 - t0);
      work += 2.0 * Fdot * 0.5 * (P_at(t0) + P_at(t1)) * (t1 - t0);
    }
    const double diss = dissipation(b.state.support(), a.state.support(), p);
    const double residual = a.energy_J - b.energy_J + work - diss;
    double curv = 0.0;
    if (i > 0) curv = std::max(curv, std::abs(b.pressure - 2.0 * a.pressure + E[i - 1].pressure));
    if (i + 2 < E.size()) curv = std::max(curv, std::abs(E[i + 2].pressure - 2.0 * b.pressure + a.pressure));
    const double allowance = std::abs(b.F - a.F) * curv / 6.0;
    worst_residual = std::min(worst_residual, residual);
    rep.offer(-residual - allowance, b.t, {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()});
  }
  if (E.size() < 2) rep.margin = 0.0;
  rep.value = E.size() < 2 ? 0.0 : worst_residual;
  return rep.finish();
}

// mu_plus = max (s^2 - 1), mu_minus = max (1 - s^2) over the (front-averaged)
// slope samples of a state; both must come out positive.
inline PinningInterval compute_pinning_from_state(const DropletState& u, const RelaxOptions& opt = {}) {
  const double h = u.grid()->h();
  const SlopeSamples s = smooth_slopes(interface_slope(u.field), opt.smooth_radius_cells * h, opt.smooth_sigma_cells * h);
  if (s.empty()) throw PreconditionError("state has no free boundary");
  double smax = 0.0, smin = std::numeric_limits<double>::infinity();
  for (const auto& x : s) smax = std::max(smax, x.slope), smin = std::min(smin, x.slope);
  const double mu_p = smax * smax - 1.0, mu_m = 1.0 - smin * smin;
  if (!(mu_p > 0.0) || !(mu_m > 0.0))
    throw PreconditionError("slope spread does not straddle 1: both pinning widths must be positive");
  return PinningInterval(mu_p, mu_m);
}

}  // namespace droplet
