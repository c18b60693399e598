#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "droplet/error.hpp"

namespace droplet {

enum class Direction { increasing, decreasing, constant };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::increasing: return "increasing";
    case Direction::decreasing: return "decreasing";
    default: return "constant";
  }
}

struct MonotoneInterval {
  double t0;
  double t1;
  Direction direction;
};

// Piecewise-linear Dirichlet height F(t) > 0 on [t_first, t_last].
class Forcing {
 public:
  struct Breakpoint {
    double t;
    double F;
  };

  explicit Forcing(std::vector<Breakpoint> pts) : pts_(std::move(pts)) {
    if (pts_.empty()) throw PreconditionError("forcing needs at least one breakpoint");
    for (std::size_t k = 0; k < pts_.size(); ++k) {
      if (!(pts_[k].F > 0.0)) throw PreconditionError("forcing must stay positive");
      if (k > 0 && !(pts_[k].t > pts_[k - 1].t)) throw PreconditionError("forcing breakpoints must be strictly increasing in t");
    }
  }

  static Forcing constant(double F, double T) { return Forcing({{0.0, F}, {T, F}}); }

  const std::vector<Breakpoint>& breakpoints() const { return pts_; }
  double t_begin() const { return pts_.front().t; }
  double t_end() const { return pts_.back().t; }

  double eval(double t) const {
    const double span = std::max(1.0, std::abs(t_end()) + std::abs(t_begin()));
    if (t < t_begin() - 1e-12 * span || t > t_end() + 1e-12 * span) throw PreconditionError("forcing evaluated outside [0, T]");
    t = std::clamp(t, t_begin(), t_end());
    if (pts_.size() == 1) return pts_[0].F;
    auto it = std::upper_bound(pts_.begin(), pts_.end(), t, [](double x, const Breakpoint& b) { return x < b.t; });
    if (it == pts_.end()) return pts_.back().F;
    if (it == pts_.begin()) return pts_.front().F;
    const Breakpoint& b = *it;
    const Breakpoint& a = *(it - 1);
    if (t == a.t) return a.F;
    const double s = (t - a.t) / (b.t - a.t);
    return a.F + s * (b.F - a.F);
  }

  // Exact slope of the segment containing t (right-continuous; last segment at T).
  double slope(double t) const {
    if (pts_.size() < 2) return 0.0;
    std::size_t k = 0;
    while (k + 2 < pts_.size() && t >= pts_[k + 1].t) ++k;
    return (pts_[k + 1].F - pts_[k].F) / (pts_[k + 1].t - pts_[k].t);
  }

  // Maximal intervals of one direction. Adjacent segments with the same
  // direction are merged; constant segments form their own intervals.
  std::vector<MonotoneInterval> monotonicity_partition() const {
    std::vector<MonotoneInterval> out;
    if (pts_.size() == 1) {
      out.push_back({pts_[0].t, pts_[0].t, Direction::constant});
      return out;
    }
    for (std::size_t k = 0; k + 1 < pts_.size(); ++k) {
      const double dF = pts_[k + 1].F - pts_[k].F;
      const Direction d = dF > 0 ? Direction::increasing : (dF < 0 ? Direction::decreasing : Direction::constant);
      if (!out.empty() && out.back().direction == d) out.back().t1 = pts_[k + 1].t;
      else out.push_back({pts_[k].t, pts_[k + 1].t, d});
    }
    return out;
  }

  // Z: interior times where F switches between increasing and decreasing.
  // Constant stretches between opposite directions put the switch at the
  // start of the new direction.
  std::vector<double> monotonicity_changes() const {
    std::vector<double> z;
    Direction last = Direction::constant;
    for (const auto& iv : monotonicity_partition()) {
      if (iv.direction == Direction::constant) continue;
      if (last != Direction::constant && iv.direction != last) z.push_back(iv.t0);
      last = iv.direction;
    }
    return z;
  }

  // ||F'||_inf
  double lipschitz() const {
    double L = 0.0;
    for (std::size_t k = 0; k + 1 < pts_.size(); ++k)
      L = std::max(L, std::abs(pts_[k + 1].F - pts_[k].F) / (pts_[k + 1].t - pts_[k].t));
    return L;
  }

  // Upper bound for ||(log F)'||_inf: per segment |slope| / min endpoint value.
  double log_derivative_bound() const {
    double L = 0.0;
    for (std::size_t k = 0; k + 1 < pts_.size(); ++k) {
      const double s = std::abs(pts_[k + 1].F - pts_[k].F) / (pts_[k + 1].t - pts_[k].t);
      L = std::max(L, s / std::min(pts_[k].F, pts_[k + 1].F));
    }
    return L;
  }

  double max_value() const {
    double m = 0.0;
    for (const auto& b : pts_) m = std::max(m, b.F);
    return m;
  }
  double min_value() const {
    double m = pts_.front().F;
    for (const auto& b : pts_) m = std::min(m, b.F);
    return m;
  }

 private:
  std::vector<Breakpoint> pts_;
};

inline double eval(const Forcing& f, double t) { return f.eval(t); }
inline std::vector<MonotoneInterval> monotonicity_partition(const Forcing& f) { return f.monotonicity_partition(); }
inline double log_derivative_bound(const Forcing& f) { return f.log_derivative_bound(); }

}  // namespace droplet
