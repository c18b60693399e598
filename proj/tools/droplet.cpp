#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "droplet/artifacts.hpp"
#include "droplet/scenarios.hpp"

using namespace droplet;

namespace {

enum Exit { kOk = 0, kConfig = 1, kSolver = 2, kVerify = 3 };

fs::path default_out(const RunConfig& c) {
  if (!c.output_dir.empty()) return c.output_dir;
  const char* root = std::getenv("DROPLET_OUT");
  const std::string name = c.scenario.empty() ? "run" : c.scenario;
  return fs::path(root && *root ? root : "droplet-out") / name;
}

void print_reports(const std::vector<CheckReport>& reps) {
  for (const auto& r : reps) write_json_line(std::cout, r);
}

int cmd_run(const std::string& scenario, const std::string& config, const std::vector<std::string>& sets,
            const std::string& out, bool strict) {
  KeyValues kv;
  if (!scenario.empty()) kv = scenario_keys(scenario);
  if (!config.empty())
    for (const auto& [k, v] : cfg::load(config)) kv[k] = v;
  if (scenario.empty() && config.empty()) throw ConfigError("run needs --scenario or --config");
  for (const auto& s : sets) cfg::apply_override(kv, s);
  const RunConfig c = make_run_config(kv);
  const fs::path dir = out.empty() ? default_out(c) : fs::path(out);

  const RunResult r = execute(c);
  write_artifacts(dir, r);

  std::cout << "scenario " << (c.scenario.empty() ? "-" : c.scenario) << ", scheme " << to_string(c.scheme) << ", "
            << (c.scheme == Scheme::radial_oracle ? r.oracle->rows.size() : r.trace.entries.size()) << " outputs, "
            << r.wall_seconds << " s\n";
  std::cout << "pinning mu+ " << r.pinning.mu_plus << ", mu- " << r.pinning.mu_minus << "\n";
  for (const auto& j : r.jumps)
    std::cout << "jump between t=" << j.t_before << " and t=" << j.t << ": components " << j.component_count_before << " -> "
              << j.component_count_after << ", Hausdorff " << j.hausdorff_jump << "\n";
  if (r.convexity.flag) std::cout << "convexity lost at t=" << r.convexity.first_t << "\n";
  print_reports(r.reports);
  std::cout << "artifacts in " << dir.string() << "\n";
  return strict && !all_passed(r) ? kVerify : kOk;
}

int cmd_verify(const std::string& dir, bool strict) {
  const StoredRun s = load_run(dir);
  auto reps = run_checks(s.config, s.trace, s.config.forcing, s.companion ? &*s.companion : nullptr);
  if (const auto radii = cfg::radial_radii(s.config); radii && s.config.scheme == Scheme::relaxation) {
    const auto orc = radial::radial_evolve({radii->first, radii->second, s.config.forcing.eval(s.config.forcing.t_begin()), 2},
                                           s.config.forcing, s.pinning, s.config.output_times);
    reps.push_back(oracle_radius_check(s.trace, orc, std::get<Disk>(s.config.solid.geometry).center, s.config.length_tol()));
  }
  print_reports(reps);
  bool ok = true;
  for (const auto& r : reps) ok = ok && r.pass;
  return strict && !ok ? kVerify : kOk;
}

double sup_gap(const TraceEntry& a, const TraceEntry& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.state.field.u.size(); ++k) m = std::max(m, std::abs(a.state.field.u[k] - b.state.field.u[k]));
  return m;
}

const TraceEntry* at_time(const EvolutionTrace& tr, double t) {
  for (const auto& e : tr.entries)
    if (!e.refined && std::abs(e.t - t) <= 1e-9) return &e;
  return nullptr;
}

int cmd_compare(const std::string& da, const std::string& db, const std::string& dref) {
  const StoredRun a = load_run(da), b = load_run(db);
  require_same_grid(*a.grid, *b.grid);
  std::cout << "t,sup_u,hausdorff\n" << std::setprecision(10);
  double worst = 0.0;
  int common = 0;
  for (const auto& ea : a.trace.entries) {
    if (ea.refined) continue;
    const TraceEntry* eb = at_time(b.trace, ea.t);
    if (!eb) continue;
    ++common;
    const double g = sup_gap(ea, *eb);
    worst = std::max(worst, g);
    std::cout << ea.t << ',' << g << ',' << hausdorff_distance(ea.boundary, eb->boundary, 8.0 * a.grid->h()) << '\n';
  }
  if (common == 0) throw GridMismatchError("runs share no output times");
  std::cout << "# max sup_u " << worst << " over " << common << " common times\n";
  const bool both_mm = a.config.scheme == Scheme::minimizing_movements && b.config.scheme == Scheme::minimizing_movements;
  if (both_mm && a.delta != b.delta) {
    std::cout << "# delta scaling\ndelta,gap\n";
    if (!dref.empty()) {
      const StoredRun ref = load_run(dref);
      require_same_grid(*a.grid, *ref.grid);
      double gaps[2] = {0.0, 0.0};
      const StoredRun* runs[2] = {&a, &b};
      for (int i = 0; i < 2; ++i)
        for (const auto& e : runs[i]->trace.entries)
          if (const TraceEntry* r = at_time(ref.trace, e.t)) gaps[i] = std::max(gaps[i], sup_gap(e, *r));
      std::cout << a.delta << ',' << gaps[0] << '\n' << b.delta << ',' << gaps[1] << '\n';
      const double ratio = a.delta > b.delta ? gaps[0] / gaps[1] : gaps[1] / gaps[0];
      std::cout << "# ratio coarse/fine " << ratio << '\n';
    } else {
      std::cout << a.delta << ",\n" << b.delta << ",\n# pass --reference DIR (a relaxation run) for per-delta gaps\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-static droplet evolution with contact angle hysteresis"};
  app.require_subcommand(1);

  std::string scenario, config, out;
  std::vector<std::string> sets;
  bool strict = false;
  auto* run = app.add_subcommand("run", "run a scenario or config file and write its artifacts");
  run->add_option("--scenario", scenario, "bundled scenario name");
  run->add_option("--config", config, "dotted-key config file (applied over --scenario)");
  run->add_option("--set", sets, "override a key: --set grid.h=1/64");
  run->add_option("--out", out, "output directory (default $DROPLET_OUT/<scenario>)");
  run->add_flag("--strict", strict, "exit 3 when a check fails");

  std::string vdir;
  bool vstrict = false;
  auto* verify = app.add_subcommand("verify", "re-run the checks on a stored run");
  verify->add_option("dir", vdir, "run directory")->required();
  verify->add_flag("--strict", vstrict, "exit 3 when a check fails");

  std::string ca, cb, cref;
  auto* compare = app.add_subcommand("compare", "per-time field and boundary differences of two stored runs");
  compare->add_option("run_a", ca)->required();
  compare->add_option("run_b", cb)->required();
  compare->add_option("--reference", cref, "relaxation run used for the delta-scaling table");

  std::string show;
  auto* list = app.add_subcommand("list-scenarios", "list bundled scenarios");
  list->add_option("--show", show, "print the full config of one scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(scenario, config, sets, out, strict);
    if (*verify) return cmd_verify(vdir, vstrict);
    if (*compare) return cmd_compare(ca, cb, cref);
    if (*list) {
      if (!show.empty()) {
        std::cout << find_scenario(show).text;
        return kOk;
      }
      for (const auto& p : scenario_presets()) std::cout << p.name << "\t" << p.summary << "\n";
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const PreconditionError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfig;
  } catch (const NonConvergenceError& e) {
    std::cerr << "solver did not converge: " << e.what() << " (residual " << e.final_residual() << ")\n";
    return kSolver;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  }
  return kOk;
}
