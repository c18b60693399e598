#pragma once

#include <cmath>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <vector>

#include "droplet/forcing.hpp"
#include "droplet/pinning.hpp"

namespace droplet::radial {

// Wet annulus R0 <= r <= R around the solid ball B_R0 in dimension d >= 2.
struct RadialState {
  double R0 = 1.0;
  double R = 2.0;
  double F = 1.0;
  int d = 2;
};

inline void check(const RadialState& s) {
  if (s.d < 2) throw PreconditionError("radial oracle needs d >= 2");
  if (!(s.R0 > 0.0) || !(s.R > s.R0)) throw PreconditionError("radial state needs R > R0 > 0");
  if (!(s.F > 0.0)) throw PreconditionError("radial state needs F > 0");
}

// Contact slope |u'(R)| of the radial harmonic profile.
inline double slope_at(double R0, double R, double F, int d) {
  if (d == 2) return F / (R * std::log(R / R0));
  const double p = 2.0 - d;
  return F * (d - 2) * std::pow(R, 1.0 - d) / (std::pow(R0, p) - std::pow(R, p));
}

struct Profile {
  std::function<double(double)> u;
  double slope_at_R;
};

inline Profile radial_profile(const RadialState& s) {
  check(s);
  Profile out;
  out.slope_at_R = slope_at(s.R0, s.R, s.F, s.d);
  if (s.d == 2) {
    const double denom = std::log(s.R / s.R0);
    out.u = [=](double r) { return r >= s.R ? 0.0 : (r <= s.R0 ? s.F : s.F * std::log(s.R / r) / denom); };
  } else {
    const double p = 2.0 - s.d;
    const double denom = std::pow(s.R0, p) - std::pow(s.R, p);
    out.u = [=](double r) {
      return r >= s.R ? 0.0 : (r <= s.R0 ? s.F : s.F * (std::pow(r, p) - std::pow(s.R, p)) / denom);
    };
  }
  return out;
}

// d = 2 closed forms: J = 2 pi b^2 log(R/R0) + pi (R^2 - R0^2), P = 2 pi b, b = F / log(R/R0).
inline double energy(const RadialState& s) {
  check(s);
  if (s.d != 2) throw PreconditionError("closed-form energy only for d = 2");
  const double L = std::log(s.R / s.R0);
  const double b = s.F / L;
  return 2.0 * std::numbers::pi * b * b * L + std::numbers::pi * (s.R * s.R - s.R0 * s.R0);
}

inline double pressure(const RadialState& s) {
  check(s);
  if (s.d != 2) throw PreconditionError("closed-form pressure only for d = 2");
  return 2.0 * std::numbers::pi * s.F / std::log(s.R / s.R0);
}

// Radius R' > R0 with slope_at(R') = q. R -> slope is strictly decreasing on
// (R0, inf), so bisection on a bracket grown by doubling from `start` converges.
inline std::optional<double> solve_radius(double R0, double F, int d, double q, double start) {
  auto f = [&](double R) { return slope_at(R0, R, F, d) - q; };
  double lo = R0, hi = std::max(start, R0 * (1.0 + 1e-6));
  // f(lo+) = +inf; find hi with f(hi) < 0
  int guard = 0;
  while (f(hi) > 0.0) {
    lo = hi;
    hi = R0 + 2.0 * (hi - R0);
    if (++guard > 200) return std::nullopt;
  }
  for (int it = 0; it < 400 && (hi - lo) > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct StepResult {
  RadialState state;
  bool collapsed = false;
};

// One quasi-static update to a new boundary height: pinned if the slope stays
// in [q_rec, q_adv], otherwise the radius moves to saturate the crossed threshold.
inline StepResult radial_step(const RadialState& s, double F_new, const PinningInterval& p) {
  check(s);
  if (!(F_new > 0.0)) return {s, true};
  RadialState next = s;
  next.F = F_new;
  const double sl = slope_at(s.R0, s.R, F_new, s.d);
  // saturated states sit on a threshold up to bisection roundoff
  constexpr double eps = 1e-10;
  if (sl > p.q_adv() * (1.0 + eps)) {
    auto R = solve_radius(s.R0, F_new, s.d, p.q_adv(), s.R);
    if (!R) return {s, true};
    next.R = std::max(*R, s.R);
  } else if (sl < p.q_rec() * (1.0 - eps)) {
    auto R = solve_radius(s.R0, F_new, s.d, p.q_rec(), s.R0 + 1e-9 * s.R0);
    if (!R || !(*R > s.R0)) return {s, true};
    next.R = std::min(*R, s.R);
  }
  return {next, false};
}

struct TraceRow {
  double t;
  double F;
  double R;
  double slope;
  double J;
  double P;
};

struct OracleTrace {
  std::vector<TraceRow> rows;
  bool collapsed = false;
  double collapse_time = 0.0;
};

// Exact evolution sampled at the output times. Forcing breakpoints (turning
// points) between outputs are visited so monotone stretches are respected.
inline OracleTrace radial_evolve(const RadialState& s0, const Forcing& f, const PinningInterval& p,
                                 const std::vector<double>& output_times) {
  check(s0);
  const double sl0 = slope_at(s0.R0, s0.R, s0.F, s0.d);
  if (sl0 > p.q_adv() * (1 + 1e-9) || sl0 < p.q_rec() * (1 - 1e-9))
    throw PreconditionError("initial radial state violates the stability band");
  OracleTrace tr;
  RadialState s = s0;
  double t_prev = f.t_begin();
  auto record = [&](double t) {
    tr.rows.push_back({t, s.F, s.R, slope_at(s.R0, s.R, s.F, s.d), s.d == 2 ? energy(s) : 0.0,
                       s.d == 2 ? pressure(s) : 0.0});
  };
  for (double t : output_times) {
    for (const auto& b : f.breakpoints()) {
      if (b.t > t_prev && b.t < t) {
        auto r = radial_step(s, b.F, p);
        if (r.collapsed) {
          tr.collapsed = true;
          tr.collapse_time = b.t;
          return tr;
        }
        s = r.state;
      }
    }
    auto r = radial_step(s, f.eval(t), p);
    if (r.collapsed) {
      tr.collapsed = true;
      tr.collapse_time = t;
      return tr;
    }
    s = r.state;
    record(t);
    t_prev = t;
  }
  return tr;
}

inline void write_oracle_csv(std::ostream& os, const OracleTrace& tr) {
  os << "t,F,R,slope,J,P\n" << std::setprecision(17);
  for (const auto& r : tr.rows) os << r.t << ',' << r.F << ',' << r.R << ',' << r.slope << ',' << r.J << ',' << r.P << '\n';
}

}  // namespace droplet::radial
