#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "droplet/error.hpp"
#include "droplet/forcing.hpp"
#include "droplet/grid.hpp"
#include "droplet/pinning.hpp"

namespace droplet {

// Flat dotted-key configuration: one `key = value` per line, '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;

namespace cfg {

inline std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline KeyValues parse(std::istream& is) {
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline KeyValues parse(const std::string& text) {
  std::istringstream is(text);
  return parse(is);
}

inline KeyValues load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse(in);
}

// "key=value" from the command line.
inline void apply_override(KeyValues& kv, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like key=value: " + assignment);
  kv[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

inline double to_number(const std::string& key, const std::string& s) {
  std::string t = trim(s);
  if (auto slash = t.find('/'); slash != std::string::npos) {
    return to_number(key, t.substr(0, slash)) / to_number(key, t.substr(slash + 1));
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + s + "'");
  }
}

// Split on commas outside parentheses.
inline std::vector<std::string> split_top(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
  return out;
}

inline std::vector<double> numbers(const std::string& key, const std::string& s) {
  std::vector<double> v;
  for (const auto& part : split_top(s)) v.push_back(to_number(key, part));
  return v;
}

// disk(cx, cy, r) | ellipse(cx, cy, a, b) | stadium(cx, cy, a, b) |
// polygon(x1, y1, x2, y2, ...) | union(shape, shape, ...)
inline Shape parse_shape(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') throw ConfigError(key + ": malformed shape '" + s + "'");
  const std::string name = trim(s.substr(0, open));
  const std::string body = s.substr(open + 1, s.size() - open - 2);
  auto need = [&](const std::vector<double>& a, std::size_t n) {
    if (a.size() != n) throw ConfigError(key + ": " + name + " takes " + std::to_string(n) + " numbers");
  };
  if (name == "union") {
    ShapeUnion u;
    for (const auto& part : split_top(body)) u.parts.push_back(parse_shape(key, part));
    if (u.parts.empty()) throw ConfigError(key + ": empty union");
    return Shape{u};
  }
  const auto a = numbers(key, body);
  if (name == "disk") {
    need(a, 3);
    if (!(a[2] > 0.0)) throw ConfigError(key + ": disk radius must be positive");
    return Shape{Disk{{a[0], a[1]}, a[2]}};
  }
  if (name == "ellipse") {
    need(a, 4);
    if (!(a[2] > 0.0 && a[3] > 0.0)) throw ConfigError(key + ": ellipse semi-axes must be positive");
    return Shape{Ellipse{{a[0], a[1]}, a[2], a[3]}};
  }
  if (name == "stadium") {
    need(a, 4);
    if (!(a[2] > 0.0 && a[3] >= 0.0)) throw ConfigError(key + ": bad stadium size");
    return Shape{Stadium{{a[0], a[1]}, a[2], a[3]}};
  }
  if (name == "polygon") {
    if (a.size() < 6 || a.size() % 2) throw ConfigError(key + ": polygon needs at least 3 x, y pairs");
    Polygon p;
    for (std::size_t i = 0; i < a.size(); i += 2) p.vertices.push_back({a[i], a[i + 1]});
    return Shape{p};
  }
  throw ConfigError(key + ": unknown shape '" + name + "'");
}

inline std::string format_shape(const Shape& shape) {
  std::ostringstream os;
  os.precision(12);
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Disk>) {
          os << "disk(" << g.center.x << ", " << g.center.y << ", " << g.radius << ")";
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          os << "ellipse(" << g.center.x << ", " << g.center.y << ", " << g.semi_x << ", " << g.semi_y << ")";
        } else if constexpr (std::is_same_v<T, Stadium>) {
          os << "stadium(" << g.center.x << ", " << g.center.y << ", " << g.half_width << ", " << g.half_length << ")";
        } else if constexpr (std::is_same_v<T, Polygon>) {
          os << "polygon(";
          for (std::size_t i = 0; i < g.vertices.size(); ++i) os << (i ? ", " : "") << g.vertices[i].x << ", " << g.vertices[i].y;
          os << ")";
        } else {
          os << "union(";
          for (std::size_t i = 0; i < g.parts.size(); ++i) os << (i ? ", " : "") << format_shape(g.parts[i]);
          os << ")";
        }
      },
      shape.geometry);
  return os.str();
}

// "t0:F0, t1:F1, ..."
inline Forcing parse_forcing(const std::string& key, const std::string& text) {
  std::vector<Forcing::Breakpoint> pts;
  for (const auto& part : split_top(text)) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw ConfigError(key + ": breakpoints look like t:F");
    pts.push_back({to_number(key, part.substr(0, colon)), to_number(key, part.substr(colon + 1))});
  }
  try {
    return Forcing(pts);
  } catch (const Error& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

// "a:step:b" or an explicit list.
inline std::vector<double> parse_times(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s.find(':') != std::string::npos && s.find(',') == std::string::npos) {
    std::vector<double> r;
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError(key + ": range must be start:step:end");
    const double a = to_number(key, parts[0]), st = to_number(key, parts[1]), b = to_number(key, parts[2]);
    if (!(st > 0.0) || b < a) throw ConfigError(key + ": bad time range");
    const long n = std::lround((b - a) / st);
    for (long k = 0; k <= n; ++k) r.push_back(std::min(b, a + k * st));
    return r;
  }
  return numbers(key, s);
}

inline bool to_bool(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key + ": expected true or false");
}

}  // namespace cfg

enum class Scheme { relaxation, minimizing_movements, radial_oracle };

inline const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::relaxation: return "relaxation";
    case Scheme::minimizing_movements: return "minimizing_movements";
    default: return "radial_oracle";
  }
}

struct RunConfig {
  std::string scenario;
  Scheme scheme = Scheme::relaxation;
  Vec2 box_lo{-4.0, -4.0}, box_hi{4.0, 4.0};
  double h = 1.0 / 32.0;
  Shape solid;
  Shape initial;
  Forcing forcing = Forcing::constant(1.0, 1.0);
  bool pinning_from_initial = false;
  double mu_plus = 0.0, mu_minus = 0.0;
  double delta = 0.0;
  std::vector<double> output_times;
  double tol_slope = -1.0;   // <= 0: 5 sqrt(h)
  double tol_length = -1.0;  // <= 0: 2h
  double star_rho = 0.5;
  bool check_star = false;
  double c0 = -1.0;  // <= 0: 0.5 q_rec
  int stability_samples = 200;
  std::uint64_t seed = 20240601;
  std::string output_dir;
  std::optional<Shape> companion_initial;
  std::optional<Forcing> companion_forcing;
  KeyValues raw;

  double slope_tol() const { return tol_slope > 0.0 ? tol_slope : 5.0 * std::sqrt(h); }
  double length_tol() const { return tol_length > 0.0 ? tol_length : 2.0 * h; }
};

namespace cfg {

// Solid and initial support as concentric disks: the radial oracle applies.
inline std::optional<std::pair<double, double>> radial_radii(const RunConfig& c) {
  const auto* k = std::get_if<Disk>(&c.solid.geometry);
  const auto* w = std::get_if<Disk>(&c.initial.geometry);
  if (!k || !w || !(k->center == w->center) || !(w->radius > k->radius)) return std::nullopt;
  return std::pair{k->radius, w->radius};
}

}  // namespace cfg

inline RunConfig make_run_config(const KeyValues& kv) {
  RunConfig c;
  c.raw = kv;
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    return it->second;
  };
  auto require = [&](const std::string& k) {
    auto v = get(k);
    if (!v) throw ConfigError("missing key " + k);
    return *v;
  };
  auto num = [&](const std::string& k, double def) { auto v = get(k); return v ? cfg::to_number(k, *v) : def; };

  static const std::set<std::string> known = {
      "scenario",        "scheme",           "grid.box",         "grid.h",           "solid",
      "initial",         "forcing",          "pinning.mu_plus",  "pinning.mu_minus", "pinning.from_initial",
      "mm.delta",        "output.times",     "output.dir",       "tolerance.slope",  "tolerance.length",
      "verify.star_rho", "verify.star",      "verify.c0",        "verify.stability_samples",
      "seed",            "companion.initial", "companion.forcing"};
  for (const auto& [k, v] : kv)
    if (!known.count(k)) throw ConfigError("unknown key " + k);

  c.scenario = get("scenario").value_or("");
  const std::string scheme = get("scheme").value_or("relaxation");
  if (scheme == "relaxation") c.scheme = Scheme::relaxation;
  else if (scheme == "minimizing_movements") c.scheme = Scheme::minimizing_movements;
  else if (scheme == "radial_oracle") c.scheme = Scheme::radial_oracle;
  else throw ConfigError("scheme: unknown scheme '" + scheme + "'");

  const auto box = cfg::numbers("grid.box", require("grid.box"));
  if (box.size() != 4 || !(box[2] > box[0]) || !(box[3] > box[1])) throw ConfigError("grid.box: expected xmin, ymin, xmax, ymax");
  c.box_lo = {box[0], box[1]};
  c.box_hi = {box[2], box[3]};
  c.h = cfg::to_number("grid.h", require("grid.h"));
  if (!(c.h > 0.0)) throw ConfigError("grid.h must be positive");
  c.solid = cfg::parse_shape("solid", require("solid"));
  c.initial = cfg::parse_shape("initial", require("initial"));
  c.forcing = cfg::parse_forcing("forcing", require("forcing"));

  c.pinning_from_initial = get("pinning.from_initial") ? cfg::to_bool("pinning.from_initial", *get("pinning.from_initial")) : false;
  if (!c.pinning_from_initial) {
    c.mu_plus = cfg::to_number("pinning.mu_plus", require("pinning.mu_plus"));
    c.mu_minus = cfg::to_number("pinning.mu_minus", require("pinning.mu_minus"));
    if (!(c.mu_plus > 0.0) || !(c.mu_minus > 0.0 && c.mu_minus < 1.0))
      throw ConfigError("pinning: need mu_plus > 0 and 0 < mu_minus < 1");
  }
  if (c.scheme == Scheme::minimizing_movements) {
    c.delta = cfg::to_number("mm.delta", require("mm.delta"));
    if (!(c.delta > 0.0)) throw ConfigError("mm.delta must be positive");
  }
  c.output_times = get("output.times") ? cfg::parse_times("output.times", *get("output.times"))
                                       : std::vector<double>{c.forcing.t_begin(), c.forcing.t_end()};
  for (double t : c.output_times)
    if (t < c.forcing.t_begin() - 1e-12 || t > c.forcing.t_end() + 1e-12) throw ConfigError("output.times outside the forcing range");
  c.output_dir = get("output.dir").value_or("");
  c.tol_slope = num("tolerance.slope", -1.0);
  c.tol_length = num("tolerance.length", -1.0);
  c.star_rho = num("verify.star_rho", 0.5);
  c.check_star = get("verify.star") ? cfg::to_bool("verify.star", *get("verify.star")) : false;
  c.c0 = num("verify.c0", -1.0);
  c.stability_samples = static_cast<int>(num("verify.stability_samples", 200));
  c.seed = static_cast<std::uint64_t>(num("seed", 20240601));
  if (get("companion.initial")) c.companion_initial = cfg::parse_shape("companion.initial", *get("companion.initial"));
  if (get("companion.forcing")) c.companion_forcing = cfg::parse_forcing("companion.forcing", *get("companion.forcing"));
  if (c.companion_initial.has_value() != c.companion_forcing.has_value())
    throw ConfigError("companion.initial and companion.forcing go together");

  // Solid inside the initial support, sampled on the grid nodes.
  const auto g = Grid::box(c.box_lo, c.box_hi, c.h, &c.solid);
  for (int j = 0; j < g->ny(); ++j)
    for (int i = 0; i < g->nx(); ++i)
      if (g->solid(i, j) && level(c.initial, g->node(i, j)) > 0.0)
        throw ConfigError("solid is not contained in the initial support");
  if (c.scheme == Scheme::radial_oracle && !cfg::radial_radii(c))
    throw ConfigError("radial_oracle needs a disk solid and a concentric larger disk initial support");
  return c;
}

}  // namespace droplet
