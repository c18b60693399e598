#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "droplet/run.hpp"

namespace droplet {

inline constexpr const char* kVersion = "1.0.0";

namespace fs = std::filesystem;

namespace io {

inline std::string index_name(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", i);
  return buf;
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  return os;
}

inline void write_trace_csv(std::ostream& os, const EvolutionTrace& trace) {
  const bool mm = trace.scheme == "minimizing_movements";
  os << "t,F,area,energy_J,diss_cum,pressure,n_components,hausdorff_step,refined";
  if (mm) os << ",k,delta,mm_inner_iters,descent_margin";
  os << '\n' << std::setprecision(17);
  for (const auto& e : trace.entries) {
    os << e.t << ',' << e.F << ',' << e.area << ',' << e.energy_J << ',' << e.diss_cum << ',' << e.pressure << ','
       << e.n_components << ',' << e.hausdorff_step << ',' << (e.refined ? 1 : 0);
    if (mm) os << ',' << e.k << ',' << e.delta << ',' << e.mm_inner_iters << ',' << e.descent_margin;
    os << '\n';
  }
}

struct TraceRecord {
  double t = 0.0, F = 0.0;
  bool refined = false;
  int k = -1;
  double delta = 0.0;
  int mm_inner_iters = 0;
  double descent_margin = 0.0;
};

inline std::vector<TraceRecord> read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error("trace CSV: empty file");
  std::vector<std::string> head;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) head.push_back(c);
  }
  auto col = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return static_cast<int>(i);
    return -1;
  };
  const int ct = col("t"), cF = col("F"), cr = col("refined"), ck = col("k"), cd = col("delta"), ci = col("mm_inner_iters"),
            cm = col("descent_margin");
  if (ct < 0 || cF < 0) throw Error("trace CSV: missing t or F column");
  std::vector<TraceRecord> out;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) f.push_back(c);
    TraceRecord r;
    r.t = std::stod(f.at(ct));
    r.F = std::stod(f.at(cF));
    if (cr >= 0) r.refined = f.at(cr) == "1";
    if (ck >= 0) r.k = std::stoi(f.at(ck));
    if (cd >= 0) r.delta = std::stod(f.at(cd));
    if (ci >= 0) r.mm_inner_iters = std::stoi(f.at(ci));
    if (cm >= 0) r.descent_margin = std::stod(f.at(cm));
    out.push_back(r);
  }
  return out;
}

inline void write_jumps_csv(std::ostream& os, const std::vector<JumpEvent>& jumps) {
  os << "t_before,t,hausdorff,threshold,components_before,components_after\n" << std::setprecision(17);
  for (const auto& j : jumps)
    os << j.t_before << ',' << j.t << ',' << j.hausdorff_jump << ',' << j.threshold << ',' << j.component_count_before << ','
       << j.component_count_after << '\n';
}

// Solid boundary dotted, initial boundary dashed, curves at evenly spaced F solid.
inline void write_svg(std::ostream& os, const Grid& g, const EvolutionTrace& trace, int levels = 8) {
  const double scale = 100.0;
  const Vec2 lo = g.origin(), hi = g.node(g.nx() - 1, g.ny() - 1);
  const double W = (hi.x - lo.x) * scale, H = (hi.y - lo.y) * scale;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  auto path = [&](const Boundary& b, const std::string& style) {
    for (const auto& c : b) {
      if (c.points.empty()) continue;
      os << "<path fill=\"none\" " << style << " d=\"";
      for (std::size_t i = 0; i < c.points.size(); ++i)
        os << (i ? 'L' : 'M') << (c.points[i].x - lo.x) * scale << ',' << (hi.y - c.points[i].y) * scale << ' ';
      if (c.closed) os << 'Z';
      os << "\"/>\n";
    }
  };
  if (g.has_solid()) path(extract_boundary(g, g.solid_levels()), "stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"1,4\" stroke-linecap=\"round\"");
  if (!trace.entries.empty()) {
    path(trace.entries.front().boundary, "stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"8,5\"");
    double fmin = trace.entries.front().F, fmax = fmin;
    for (const auto& e : trace.entries) fmin = std::min(fmin, e.F), fmax = std::max(fmax, e.F);
    std::vector<std::size_t> picks;
    for (int l = 1; l <= levels && fmax > fmin; ++l) {
      const double target = fmin + (fmax - fmin) * l / levels;
      std::size_t best = 0;
      for (std::size_t i = 1; i < trace.entries.size(); ++i)
        if (std::abs(trace.entries[i].F - target) < std::abs(trace.entries[best].F - target)) best = i;
      if (best > 0 && std::find(picks.begin(), picks.end(), best) == picks.end()) picks.push_back(best);
    }
    std::sort(picks.begin(), picks.end());
    for (std::size_t i : picks) path(trace.entries[i].boundary, "stroke=\"#1f4e9c\" stroke-width=\"1\"");
  }
  os << "</svg>\n";
}

inline void write_trace_dir(const fs::path& dir, const EvolutionTrace& trace) {
  fs::create_directories(dir / "boundaries");
  fs::create_directories(dir / "fields");
  {
    auto os = open_out(dir / "trace.csv");
    write_trace_csv(os, trace);
  }
  for (std::size_t i = 0; i < trace.entries.size(); ++i) {
    const auto& e = trace.entries[i];
    auto b = open_out(dir / "boundaries" / (index_name(i) + ".csv"));
    write_boundary_csv(b, e.boundary);
    auto f = open_out(dir / "fields" / ("phi_" + index_name(i) + ".txt"));
    write_field(f, *e.state.grid(), e.state.support().level);
  }
}

inline nlohmann::json report_json(const CheckReport& r) {
  std::ostringstream os;
  write_json_line(os, r);
  return nlohmann::json::parse(os.str());
}

}  // namespace io

inline nlohmann::json run_metadata(const RunResult& r) {
  using nlohmann::json;
  json m;
  m["version"] = kVersion;
  m["scenario"] = r.config.scenario;
  m["scheme"] = to_string(r.config.scheme);
  m["seed"] = r.config.seed;
  m["wall_seconds"] = r.wall_seconds;
  json cfg = json::object();
  for (const auto& [k, v] : r.config.raw) cfg[k] = v;
  m["config"] = cfg;
  m["grid"] = {{"nx", r.grid->nx()}, {"ny", r.grid->ny()}, {"h", r.grid->h()}};
  m["pinning"] = {{"mu_plus", r.pinning.mu_plus}, {"mu_minus", r.pinning.mu_minus}, {"q_adv", r.pinning.q_adv()}, {"q_rec", r.pinning.q_rec()}};
  if (r.config.scheme == Scheme::minimizing_movements) m["delta"] = r.delta;
  m["entries"] = r.trace.entries.size();
  json jumps = json::array();
  for (const auto& j : r.jumps)
    jumps.push_back({{"t_before", j.t_before}, {"t", j.t}, {"hausdorff", j.hausdorff_jump}, {"threshold", j.threshold},
                     {"components_before", j.component_count_before}, {"components_after", j.component_count_after}});
  m["jumps"] = jumps;
  m["convexity_loss"] = {{"flag", r.convexity.flag},
                         {"first_t", std::isfinite(r.convexity.first_t) ? json(r.convexity.first_t) : json(nullptr)},
                         {"worst_deficit", r.convexity.worst_deficit},
                         {"threshold", r.convexity.threshold}};
  json stab = json::array();
  for (const auto& s : r.stability)
    stab.push_back({{"t", s.t}, {"worst_margin", s.worst_margin},
                    {"worst_bridge_margin", std::isfinite(s.worst_bridge_margin) ? json(s.worst_bridge_margin) : json(nullptr)},
                    {"worst_kind", s.worst_kind}});
  m["global_stability_before_jumps"] = stab;
  if (r.config.check_star) m["max_star_defect"] = r.max_star_defect;
  m["checks_passed"] = all_passed(r);
  return m;
}

// Everything a run produces, under dir.
inline void write_artifacts(const fs::path& dir, const RunResult& r) {
  fs::create_directories(dir);
  {
    auto os = io::open_out(dir / "config.txt");
    for (const auto& [k, v] : r.config.raw) os << k << " = " << v << '\n';
  }
  if (r.oracle) {
    auto os = io::open_out(dir / "oracle.csv");
    radial::write_oracle_csv(os, *r.oracle);
  }
  if (r.config.scheme != Scheme::radial_oracle) {
    io::write_trace_dir(dir, r.trace);
    {
      auto os = io::open_out(dir / "jumps.csv");
      io::write_jumps_csv(os, r.jumps);
    }
    {
      auto os = io::open_out(dir / "snapshot.svg");
      io::write_svg(os, *r.grid, r.trace);
    }
    if (r.companion) {
      io::write_trace_dir(dir / "companion", *r.companion);
      auto os = io::open_out(dir / "companion" / "snapshot.svg");
      io::write_svg(os, *r.grid, *r.companion);
    }
    auto os = io::open_out(dir / "verify.jsonl");
    for (const auto& rep : r.reports) write_json_line(os, rep);
  }
  auto os = io::open_out(dir / "metadata.json");
  os << run_metadata(r).dump(2) << '\n';
}

// A stored trace rebuilt from its level sets: the height fields are re-solved.
inline EvolutionTrace load_trace_dir(const fs::path& dir, const GridPtr& grid, const PinningInterval& p,
                                     const std::string& scheme) {
  std::ifstream in(dir / "trace.csv");
  if (!in) throw Error("cannot read " + (dir / "trace.csv").string());
  const auto rows = io::read_trace_csv(in);
  EvolutionTrace trace;
  trace.scheme = scheme;
  trace.pinning = p;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::ifstream fin(dir / "fields" / ("phi_" + io::index_name(i) + ".txt"));
    if (!fin) throw Error("missing level set for entry " + std::to_string(i));
    const FieldDump d = read_field(fin);
    if (d.nx != grid->nx() || d.ny != grid->ny() || std::abs(d.h - grid->h()) > 1e-12 * grid->h())
      throw GridMismatchError("stored level set does not match the configured grid");
    DropletState s = make_state(LevelSetField{grid, d.values}, rows[i].F, rows[i].t);
    TraceEntry e = make_entry(std::move(s), trace.entries.empty() ? nullptr : &trace.entries.back(), p);
    e.refined = rows[i].refined;
    e.k = rows[i].k;
    e.delta = rows[i].delta;
    e.mm_inner_iters = rows[i].mm_inner_iters;
    e.descent_margin = rows[i].descent_margin;
    trace.entries.push_back(std::move(e));
  }
  return trace;
}

struct StoredRun {
  RunConfig config;
  PinningInterval pinning;
  GridPtr grid;
  EvolutionTrace trace;
  std::optional<EvolutionTrace> companion;
  double delta = 0.0;
};

inline StoredRun load_run(const fs::path& dir) {
  std::ifstream in(dir / "metadata.json");
  if (!in) throw Error("cannot read " + (dir / "metadata.json").string());
  const nlohmann::json m = nlohmann::json::parse(in);
  KeyValues kv;
  for (const auto& [k, v] : m.at("config").items()) kv[k] = v.get<std::string>();
  StoredRun s;
  s.config = make_run_config(kv);
  if (s.config.scheme == Scheme::radial_oracle) throw PreconditionError("radial_oracle runs store no grid trace");
  s.pinning = PinningInterval(m.at("pinning").at("mu_plus").get<double>(), m.at("pinning").at("mu_minus").get<double>());
  s.grid = make_grid(s.config);
  s.delta = m.contains("delta") ? m["delta"].get<double>() : 0.0;
  s.trace = load_trace_dir(dir, s.grid, s.pinning, to_string(s.config.scheme));
  if (s.config.companion_initial && fs::exists(dir / "companion" / "trace.csv"))
    s.companion = load_trace_dir(dir / "companion", s.grid, s.pinning, to_string(s.config.scheme));
  return s;
}

}  // namespace droplet
