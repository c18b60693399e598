#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "droplet/grid.hpp"

namespace droplet {

// Outcome of one check. `margin` is the worst excess in the checked quantity's
// units; the check fails iff margin > tolerance.
struct CheckReport {
  std::string check;
  bool pass = true;
  double margin = -std::numeric_limits<double>::infinity();
  double t = 0.0;
  Vec2 where{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  double tolerance = 0.0;
  double value = std::numeric_limits<double>::quiet_NaN();  // fitted constant, when the check has one
  std::string note;

  void offer(double m, double time, Vec2 p) {
    if (m > margin) {
      margin = m;
      t = time;
      where = p;
    }
  }
  CheckReport& finish() {
    pass = !(margin > tolerance);
    return *this;
  }
};

namespace detail {
inline void json_number(std::ostream& os, double v) {
  if (std::isfinite(v)) os << v;
  else os << "null";
}
inline void json_string(std::ostream& os, const std::string& s) {
  os << '"';
  for (char c : s) {
    if (c == '"' || c == '\\') os << '\\' << c;
    else if (c == '\n') os << "\\n";
    else os << c;
  }
  os << '"';
}
}  // namespace detail

// One JSON object per line: {check, pass, margin, t, x, y, tolerance}.
inline void write_json_line(std::ostream& os, const CheckReport& r) {
  os << "{\"check\":";
  detail::json_string(os, r.check);
  os << ",\"pass\":" << (r.pass ? "true" : "false") << ",\"margin\":";
  detail::json_number(os, r.margin);
  os << ",\"t\":";
  detail::json_number(os, r.t);
  os << ",\"x\":";
  detail::json_number(os, r.where.x);
  os << ",\"y\":";
  detail::json_number(os, r.where.y);
  os << ",\"tolerance\":";
  detail::json_number(os, r.tolerance);
  if (std::isfinite(r.value)) {
    os << ",\"value\":" << r.value;
  }
  if (!r.note.empty()) {
    os << ",\"note\":";
    detail::json_string(os, r.note);
  }
  os << "}\n";
}

}  // namespace droplet
