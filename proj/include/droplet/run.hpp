#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "droplet/config.hpp"
#include "droplet/energetics.hpp"
#include "droplet/radial_oracle.hpp"
#include "droplet/verify.hpp"

namespace droplet {

struct ConvexityLoss {
  bool flag = false;             // deficit above threshold and e2-normal arcs at two heights
  double first_t = std::numeric_limits<double>::quiet_NaN();
  double worst_deficit = 0.0;
  double threshold = 0.0;        // 5 h^2 per boundary curve
};

// Heights of the arcs of a closed curve whose outward normal is within 5
// degrees of +e2. Curves keep the wet side on the left, so the outward normal
// is the right-hand normal; tangents span four vertices on either side.
inline std::vector<double> upward_arc_heights(const Polyline& c) {
  std::vector<double> out;
  const std::size_t n = c.points.size();
  if (!c.closed || n < 16) return out;
  std::vector<char> up(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 t = c.points[(i + 4) % n] - c.points[(i + n - 4) % n];
    const double L = norm(t);
    up[i] = L > 0.0 && -t.x / L > std::cos(M_PI / 36.0);
  }
  std::size_t start = 0;
  while (start < n && up[start]) ++start;
  if (start == n) return out;
  std::size_t k = 1;
  while (k <= n) {
    if (!up[(start + k) % n]) {
      ++k;
      continue;
    }
    double sum = 0.0;
    int cnt = 0;
    for (; k <= n && up[(start + k) % n]; ++k, ++cnt) sum += c.points[(start + k) % n].y;
    out.push_back(sum / cnt);
  }
  return out;
}

inline bool has_two_upward_heights(const Boundary& b, double h) {
  for (const auto& c : b) {
    const auto hs = upward_arc_heights(c);
    for (std::size_t i = 0; i < hs.size(); ++i)
      for (std::size_t j = i + 1; j < hs.size(); ++j)
        if (std::abs(hs[i] - hs[j]) > 0.5 * h) return true;
  }
  return false;
}

inline ConvexityLoss convexity_loss(const EvolutionTrace& trace) {
  ConvexityLoss out;
  const double h = trace.h();
  for (const auto& e : trace.entries) {
    const double thr = 5.0 * h * h * static_cast<double>(e.boundary.size());
    const double def = convexity_deficit(e.boundary);
    if (def > out.worst_deficit) out.worst_deficit = def, out.threshold = thr;
    if (def > thr && has_two_upward_heights(e.boundary, h) && !out.flag) {
      out.flag = true;
      out.first_t = e.t;
      out.threshold = thr;
    }
  }
  if (out.threshold == 0.0 && !trace.entries.empty()) out.threshold = 5.0 * h * h * trace.entries.front().boundary.size();
  return out;
}

struct StabilitySummary {
  double t = 0.0;
  double worst_margin = 0.0;
  double worst_bridge_margin = std::numeric_limits<double>::infinity();
  std::string worst_kind;
};

struct RunResult {
  RunConfig config;
  PinningInterval pinning;
  GridPtr grid;
  EvolutionTrace trace;
  double delta = 0.0;
  std::optional<EvolutionTrace> companion;
  std::optional<radial::OracleTrace> oracle;
  std::vector<JumpEvent> jumps;
  std::vector<CheckReport> reports;
  ConvexityLoss convexity;
  std::vector<StabilitySummary> stability;
  double max_star_defect = 0.0;
  double wall_seconds = 0.0;
};

inline GridPtr make_grid(const RunConfig& c) { return Grid::box(c.box_lo, c.box_hi, c.h, &c.solid); }

inline PinningInterval resolve_pinning(const RunConfig& c, const DropletState& initial) {
  if (c.pinning_from_initial) return compute_pinning_from_state(initial);
  return PinningInterval(c.mu_plus, c.mu_minus);
}

// Largest |r - R(t)| over free-boundary vertices, r measured from the solid centre.
inline CheckReport oracle_radius_check(const EvolutionTrace& trace, const radial::OracleTrace& oracle, Vec2 centre,
                                       double tol) {
  CheckReport rep;
  rep.check = "oracle_radius";
  rep.tolerance = tol;
  const std::size_t n = std::min(trace.entries.size(), oracle.rows.size());
  std::size_t row = 0;
  for (const auto& e : trace.entries) {
    if (e.refined) continue;
    while (row < n && oracle.rows[row].t < e.t - 1e-9) ++row;
    if (row >= oracle.rows.size() || std::abs(oracle.rows[row].t - e.t) > 1e-9) continue;
    for (const auto& c : e.boundary)
      for (Vec2 q : c.points) rep.offer(std::abs(distance(q, centre) - oracle.rows[row].R), e.t, q);
  }
  if (!std::isfinite(rep.margin)) rep.margin = 0.0;
  return rep.finish();
}

inline CheckReport star_shape_check(const EvolutionTrace& trace, double rho, Vec2 centre, double tol, double* worst = nullptr) {
  CheckReport rep;
  rep.check = "star_shape";
  rep.tolerance = tol;
  for (const auto& e : trace.entries) rep.offer(star_shape_defect(e.state.support(), rho, centre), e.t, centre);
  if (!std::isfinite(rep.margin)) rep.margin = 0.0;
  if (worst) *worst = rep.margin;
  return rep.finish();
}

inline CheckReport mm_descent_check(const EvolutionTrace& trace, double solver_tol) {
  CheckReport rep;
  rep.check = "mm_descent";
  rep.tolerance = 2.0 * solver_tol;
  for (const auto& e : trace.entries)
    if (e.k > 0) rep.offer(-e.descent_margin, e.t, {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()});
  if (!std::isfinite(rep.margin)) rep.margin = 0.0;
  return rep.finish();
}

inline Vec2 star_centre(const RunConfig& c) {
  if (const auto* d = std::get_if<Disk>(&c.solid.geometry)) return d->center;
  return {0.0, 0.0};
}

// The checks of the verify module over a finished trace.
inline std::vector<CheckReport> run_checks(const RunConfig& c, const EvolutionTrace& trace, const Forcing& f,
                                           const EvolutionTrace* companion, double* star_worst = nullptr) {
  std::vector<CheckReport> out;
  const PinningInterval& p = trace.pinning;
  const double h = c.h;
  out.push_back(slope_bounds_check(trace, c.slope_tol()));
  out.push_back(dynamic_slope_check(trace, p, c.slope_tol(), c.length_tol()));
  out.push_back(dissipation_inequality_check(trace, f, 5.0 * h));
  out.push_back(time_lipschitz_check(trace, f));
  out.push_back(hausdorff_lipschitz_check(trace));
  {
    const double c0 = c.c0 > 0.0 ? c.c0 : 0.5 * p.q_rec();
    CheckReport nd;
    nd.check = "nondegeneracy";
    for (const auto& e : trace.entries) {
      const CheckReport r = nondegeneracy_check(e.state, default_nondegeneracy_radii(h), c0);
      nd.offer(r.margin, r.t, r.where);
    }
    if (!std::isfinite(nd.margin)) nd.margin = 0.0;
    nd.finish();
    out.push_back(nd);
  }
  if (c.check_star) out.push_back(star_shape_check(trace, c.star_rho, star_centre(c), c.length_tol(), star_worst));
  if (trace.scheme == "minimizing_movements") out.push_back(mm_descent_check(trace, RelaxOptions{}.solver_tol));
  if (companion) {
    out.push_back(ordering_check(trace, *companion));
    for (auto r : run_checks(c, *companion, *c.companion_forcing, nullptr)) {
      r.check = "companion." + r.check;
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline EvolutionTrace run_scheme(const RunConfig& c, const DropletState& initial, const Forcing& f,
                                 const PinningInterval& p) {
  if (c.scheme == Scheme::minimizing_movements) return mm_evolve(initial, f, c.delta, p);
  return evolve(initial, f, c.output_times, p);
}

inline RunResult execute(const RunConfig& c) {
  const auto t_start = std::chrono::steady_clock::now();
  RunResult r;
  r.config = c;
  r.grid = make_grid(c);
  const double F0 = c.forcing.eval(c.forcing.t_begin());
  const auto radii = cfg::radial_radii(c);

  if (c.scheme == Scheme::radial_oracle) {
    r.pinning = PinningInterval(c.mu_plus, c.mu_minus);
    r.oracle = radial::radial_evolve({radii->first, radii->second, F0, 2}, c.forcing, r.pinning, c.output_times);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return r;
  }

  DropletState initial = make_state(r.grid, c.initial, F0, c.forcing.t_begin());
  r.pinning = resolve_pinning(c, initial);
  r.trace = run_scheme(c, initial, c.forcing, r.pinning);
  r.delta = c.delta;
  if (c.companion_initial) {
    DropletState ci = make_state(r.grid, *c.companion_initial, c.companion_forcing->eval(c.companion_forcing->t_begin()),
                                 c.companion_forcing->t_begin());
    r.companion = run_scheme(c, ci, *c.companion_forcing, r.pinning);
  }
  if (radii) r.oracle = radial::radial_evolve({radii->first, radii->second, F0, 2}, c.forcing, r.pinning, c.output_times);

  r.jumps = detect_jumps(r.trace);
  r.convexity = convexity_loss(r.trace);
  r.reports = run_checks(c, r.trace, c.forcing, r.companion ? &*r.companion : nullptr, &r.max_star_defect);
  if (r.oracle && c.scheme == Scheme::relaxation)
    r.reports.push_back(oracle_radius_check(r.trace, *r.oracle, std::get<Disk>(c.solid.geometry).center, c.length_tol()));

  // Global stability of the last state before each jump.
  for (const auto& j : r.jumps) {
    const TraceEntry& e = r.trace.entries[j.index - 1];
    const StabilityReport s = global_stability_check(e.state, r.pinning, c.stability_samples, c.seed);
    r.stability.push_back({e.t, s.worst_margin, s.worst_bridge_margin, s.worst.kind});
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return r;
}

inline bool all_passed(const RunResult& r) {
  for (const auto& x : r.reports)
    if (!x.pass) return false;
  return true;
}

}  // namespace droplet
