#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "droplet/artifacts.hpp"
#include "droplet/scenarios.hpp"

using namespace droplet;

namespace {

const char* kSmall = R"(scheme = relaxation
grid.box = -3, -3, 3, 3
grid.h = 1/16
solid = disk(0, 0, 1)
initial = disk(0, 0, 2)
# slope 1 at t = 0
forcing = 0:1.38629436112, 1:2.2, 2:1.2
pinning.mu_plus = 0.44
pinning.mu_minus = 0.19
output.times = 0:0.25:2
)";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("droplet_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Cli {
  int rc;
  std::string out;
};

Cli cli(const std::string& args, const fs::path& work) {
  const fs::path log = work / "cli.log";
  const std::string cmd = std::string(DROPLET_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, slurp(log)};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST(ConfigParse, KeyValuesCommentsAndOverrides) {
  auto kv = cfg::parse("a = 1  # note\n\n  b.c=two words \n");
  EXPECT_EQ(kv.at("a"), "1");
  EXPECT_EQ(kv.at("b.c"), "two words");
  cfg::apply_override(kv, "a=3/4");
  EXPECT_DOUBLE_EQ(cfg::to_number("a", kv.at("a")), 0.75);
  EXPECT_THROW(cfg::parse("no equals sign"), ConfigError);
  EXPECT_THROW(cfg::parse(" = 1"), ConfigError);
  EXPECT_THROW(cfg::apply_override(kv, "novalue"), ConfigError);
  EXPECT_THROW(cfg::to_number("k", "1.5x"), ConfigError);
}

TEST(ConfigParse, ShapesRoundTrip) {
  for (const char* s : {"disk(0, 0, 1)", "ellipse(0.5, -1, 1.6, 1.3)", "stadium(0, 0, 1.5, 2)", "polygon(0, 0, 1, 0, 1, 1)",
                        "union(disk(-1.5, 0, 0.5), disk(1.5, 0, 0.5))"}) {
    const Shape a = cfg::parse_shape("s", s);
    EXPECT_EQ(cfg::format_shape(a), s);
  }
  EXPECT_THROW(cfg::parse_shape("s", "disk(0, 0)"), ConfigError);
  EXPECT_THROW(cfg::parse_shape("s", "disk(0, 0, -1)"), ConfigError);
  EXPECT_THROW(cfg::parse_shape("s", "triangle(0, 0, 1)"), ConfigError);
  EXPECT_THROW(cfg::parse_shape("s", "polygon(0, 0, 1, 0)"), ConfigError);
}

TEST(ConfigParse, ForcingAndTimes) {
  const Forcing f = cfg::parse_forcing("forcing", "0:1, 1:2, 3:0.5");
  EXPECT_DOUBLE_EQ(f.eval(0.5), 1.5);
  EXPECT_EQ(f.monotonicity_changes(), std::vector<double>{1.0});
  EXPECT_THROW(cfg::parse_forcing("forcing", "0:1, 1"), ConfigError);
  EXPECT_THROW(cfg::parse_forcing("forcing", "0:1, 1:-2"), ConfigError);
  const auto ts = cfg::parse_times("t", "0:0.25:1");
  ASSERT_EQ(ts.size(), 5u);
  EXPECT_DOUBLE_EQ(ts.back(), 1.0);
  EXPECT_EQ(cfg::parse_times("t", "0, 0.5, 2"), (std::vector<double>{0, 0.5, 2}));
  EXPECT_THROW(cfg::parse_times("t", "0:0:1"), ConfigError);
}

TEST(RunConfigTest, EveryPresetIsValid) {
  ASSERT_EQ(scenario_presets().size(), 6u);
  for (const auto& p : scenario_presets()) {
    const RunConfig c = scenario_config(p.name);
    EXPECT_EQ(c.scenario, p.name);
    EXPECT_FALSE(c.output_times.empty());
  }
  EXPECT_THROW(find_scenario("nope"), ConfigError);
}

TEST(RunConfigTest, RejectsInconsistentConfigs) {
  auto kv = cfg::parse(kSmall);
  {
    auto bad = kv;
    bad["grid.hh"] = "1";
    EXPECT_THROW(make_run_config(bad), ConfigError);
  }
  {
    auto bad = kv;
    bad["initial"] = "disk(0, 0, 0.8)";
    EXPECT_THROW(make_run_config(bad), ConfigError);
  }
  {
    auto bad = kv;
    bad["scheme"] = "minimizing_movements";
    EXPECT_THROW(make_run_config(bad), ConfigError);
    bad["mm.delta"] = "0.25";
    EXPECT_NO_THROW(make_run_config(bad));
  }
  {
    auto bad = kv;
    bad["scheme"] = "radial_oracle";
    bad["initial"] = "disk(0.1, 0, 2)";
    EXPECT_THROW(make_run_config(bad), ConfigError);
  }
  {
    auto bad = kv;
    bad.erase("pinning.mu_minus");
    EXPECT_THROW(make_run_config(bad), ConfigError);
  }
  {
    auto bad = kv;
    bad["output.times"] = "0:0.5:3";
    EXPECT_THROW(make_run_config(bad), ConfigError);
  }
  {
    auto bad = kv;
    bad["companion.initial"] = "disk(0, 0, 2.2)";
    EXPECT_THROW(make_run_config(bad), ConfigError);
  }
}

TEST(Artifacts, SameConfigGivesIdenticalFiles) {
  const RunConfig c = make_run_config(cfg::parse(kSmall));
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  write_artifacts(a, execute(c));
  write_artifacts(b, execute(c));
  for (const char* f : {"trace.csv", "jumps.csv", "oracle.csv", "verify.jsonl", "snapshot.svg", "config.txt",
                        "boundaries/0004.csv", "fields/phi_0008.txt"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Artifacts, StoredRunReproducesTheChecks) {
  const RunConfig c = make_run_config(cfg::parse(kSmall));
  const RunResult r = execute(c);
  EXPECT_TRUE(all_passed(r));
  EXPECT_TRUE(r.oracle.has_value());
  const fs::path dir = scratch("stored");
  write_artifacts(dir, r);
  const StoredRun s = load_run(dir);
  ASSERT_EQ(s.trace.entries.size(), r.trace.entries.size());
  const auto reps = run_checks(s.config, s.trace, s.config.forcing, nullptr);
  ASSERT_GE(reps.size(), 6u);
  for (std::size_t k = 0; k < reps.size(); ++k) {
    EXPECT_EQ(reps[k].check, r.reports[k].check);
    EXPECT_EQ(reps[k].pass, r.reports[k].pass);
    // u is re-solved from the stored level set
    EXPECT_NEAR(reps[k].margin, r.reports[k].margin, 1e-4 * (1.0 + std::abs(r.reports[k].margin))) << reps[k].check;
  }
  std::ifstream in(dir / "trace.csv");
  const auto rows = io::read_trace_csv(in);
  ASSERT_EQ(rows.size(), r.trace.entries.size());
  EXPECT_DOUBLE_EQ(rows[3].F, r.trace.entries[3].F);
  const auto meta = nlohmann::json::parse(slurp(dir / "metadata.json"));
  for (const char* key : {"version", "seed", "wall_seconds", "config", "pinning", "jumps", "checks_passed"})
    EXPECT_TRUE(meta.contains(key)) << key;
  EXPECT_EQ(meta["seed"].get<std::uint64_t>(), 20240601u);
}

TEST(Artifacts, TraceCsvColumns) {
  const RunConfig c = make_run_config(cfg::parse(kSmall));
  const RunResult r = execute(c);
  std::ostringstream os;
  io::write_trace_csv(os, r.trace);
  const std::string head = os.str().substr(0, os.str().find('\n'));
  EXPECT_EQ(head, "t,F,area,energy_J,diss_cum,pressure,n_components,hausdorff_step,refined");
}

TEST(CliBinary, ListScenariosAndShow) {
  const fs::path w = scratch("cli_list");
  auto r = cli("list-scenarios", w);
  EXPECT_EQ(r.rc, 0);
  for (const auto& p : scenario_presets()) EXPECT_NE(r.out.find(p.name), std::string::npos);
  r = cli("list-scenarios --show stadium", w);
  EXPECT_EQ(r.rc, 0);
  EXPECT_EQ(r.out, find_scenario("stadium").text);
}

TEST(CliBinary, ExitCodes) {
  const fs::path w = scratch("cli_rc");
  write_file(w / "bad.cfg", std::string(kSmall) + "bogus.key = 1\n");
  EXPECT_EQ(cli("run --config " + (w / "bad.cfg").string() + " --out " + (w / "o").string(), w).rc, 1);
  EXPECT_EQ(cli("run --scenario nope", w).rc, 1);
  EXPECT_EQ(cli("frobnicate", w).rc, 1);
  write_file(w / "ok.cfg", kSmall);
  // an unstable initial state is an input error
  EXPECT_EQ(cli("run --config " + (w / "ok.cfg").string() + " --set forcing=0:3,2:3 --out " + (w / "u").string(), w).rc, 1);
  // a slope tolerance nobody can meet fails the strict run
  const auto strict = cli("run --config " + (w / "ok.cfg").string() + " --set tolerance.slope=1e-9 --strict --out " +
                              (w / "s").string(),
                          w);
  EXPECT_EQ(strict.rc, 3) << strict.out;
}

TEST(CliBinary, RunVerifyAndCompare) {
  const fs::path w = scratch("cli_run");
  write_file(w / "ok.cfg", kSmall);
  const auto run = cli("run --config " + (w / "ok.cfg").string() + " --strict --out " + (w / "a").string(), w);
  ASSERT_EQ(run.rc, 0) << run.out;
  EXPECT_NE(run.out.find("\"check\":\"oracle_radius\""), std::string::npos);
  const auto ver = cli("verify " + (w / "a").string() + " --strict", w);
  EXPECT_EQ(ver.rc, 0) << ver.out;
  EXPECT_NE(ver.out.find("oracle_radius"), std::string::npos);
  const auto cmp = cli("compare " + (w / "a").string() + " " + (w / "a").string(), w);
  EXPECT_EQ(cmp.rc, 0);
  EXPECT_NE(cmp.out.find("# max sup_u 0 over 9 common times"), std::string::npos) << cmp.out;
}

TEST(CliBinary, CompareTwoStepSizes) {
  const fs::path w = scratch("cli_mm");
  write_file(w / "ok.cfg", kSmall);
  const std::string cfgp = (w / "ok.cfg").string();
  ASSERT_EQ(cli("run --config " + cfgp + " --out " + (w / "ref").string(), w).rc, 0);
  ASSERT_EQ(cli("run --config " + cfgp + " --set scheme=minimizing_movements --set mm.delta=0.5 --out " + (w / "m1").string(), w).rc, 0);
  ASSERT_EQ(cli("run --config " + cfgp + " --set scheme=minimizing_movements --set mm.delta=0.25 --out " + (w / "m2").string(), w).rc, 0);
  const auto cmp = cli("compare " + (w / "m1").string() + " " + (w / "m2").string() + " --reference " + (w / "ref").string(), w);
  EXPECT_EQ(cmp.rc, 0) << cmp.out;
  EXPECT_NE(cmp.out.find("# delta scaling"), std::string::npos);
  EXPECT_NE(cmp.out.find("# ratio coarse/fine"), std::string::npos);
}

TEST(CliBinary, DefaultOutputRoot) {
  const fs::path w = scratch("cli_env");
  write_file(w / "ok.cfg", std::string(kSmall) + "scenario = tiny\n");
  const std::string cmd = "DROPLET_OUT=" + (w / "root").string() + " " + DROPLET_CLI + " run --config " + (w / "ok.cfg").string() +
                          " > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(w / "root" / "tiny" / "metadata.json"));
}
