#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "hdisp/common.hpp"
#include "hdisp/config.hpp"
#include "hdisp/experiments.hpp"
#include "hdisp/report.hpp"

using namespace hdisp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hdisp_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_ini(const fs::path& dir, const std::string& body) {
  const fs::path p = dir / "cfg.ini";
  std::ofstream(p) << body;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// unsetenv on scope exit so a failing check does not leak into other cases
struct EnvGuard {
  explicit EnvGuard(const char* value) { setenv("HDISP_OUT", value, 1); }
  ~EnvGuard() { unsetenv("HDISP_OUT"); }
};

}  // namespace

TEST_CASE("log ranges and phase strings") {
  const auto v = LogRange{1e2, 1e4, 5}.values();
  REQUIRE(v.size() == 5);
  CHECK(v.front() == 1e2);
  CHECK(v[2] == doctest::Approx(1e3).epsilon(1e-14));
  CHECK(v.back() == 1e4);
  CHECK(LogRange{3.0, 7.0, 1}.values() == std::vector<double>{3.0});
  CHECK(LogRange{1.0, 2.0, 0}.values().empty());

  const auto p = parse_phase(" frac_wave : 1.25 ");
  CHECK(p.family == PhaseFamily::frac_wave);
  CHECK(p.alpha == 1.25);
  CHECK(describe(parse_phase("fourth_order")) == "fourth_order");
  CHECK(describe(parse_phase("frac_schrodinger:0.5")) == "frac_schrodinger:0.5");
  CHECK_THROWS_AS(parse_phase("frac_wave"), ConfigError);
  CHECK_THROWS_AS(parse_phase("frac_wave:x"), ConfigError);
  CHECK_THROWS_AS(parse_phase("heat:1"), ConfigError);
}

TEST_CASE("config files") {
  unsetenv("HDISP_OUT");
  const auto dir = scratch("config");
  const auto cfg = load_config(write_ini(dir,
                                         "[group]\nn = 2\n"
                                         "[decay]\nphases = fourth_order, frac_wave:1.5\n"
                                         "t_min = 10\nt_max = 1000\nt_count = 7\n"
                                         "scan = frac_schrodinger:0.5@300, fourth_order@20\n"
                                         "[kernel]\nj_list = -1, 0, 4\n"
                                         "[output]\ndir = somewhere\n"));
  CHECK(cfg.n == 2);
  REQUIRE(cfg.decay_phases.size() == 2);
  CHECK(cfg.decay_phases[1].alpha == 1.5);
  CHECK(cfg.decay_t.count == 7);
  REQUIRE(cfg.scan_targets.size() == 2);
  CHECK(cfg.scan_targets[0].t == 300.0);
  CHECK(cfg.scan_targets[1].phase.family == PhaseFamily::fourth_order);
  CHECK(cfg.kernel_j == std::vector<int>{-1, 0, 4});
  CHECK(cfg.out_dir == "somewhere");
  // untouched keys keep their defaults
  CHECK(cfg.sharp_n == default_config().sharp_n);

  SUBCASE("HDISP_OUT replaces the output directory") {
    EnvGuard env("/tmp/elsewhere");
    CHECK(load_config(write_ini(dir, "[output]\ndir = somewhere\n")).out_dir == "/tmp/elsewhere");
    CHECK(default_config().out_dir == "/tmp/elsewhere");
  }

  const auto rejects = [&](const std::string& body, const std::string& fragment) {
    CAPTURE(body);
    try {
      load_config(write_ini(dir, body));
      FAIL("accepted an invalid config");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  rejects("[decay]\nt_count = 0\n", "t-list is empty");
  rejects("[decay]\nt_min = 100\nt_max = 10\n", "strictly increasing");
  rejects("[decay]\nt_count = 4\n", "t_count >= 6");
  rejects("[group]\nwidth = 3\n", "unknown config key 'group.width'");
  rejects("[group]\nn = 0\n", "group.n");
  rejects("[group]\nn = 1.5\n", "integer");
  rejects("[tolerances]\nquad_tol = -1\n", "tolerances");
  rejects("[sharpness]\nphases = frac_schrodinger:1.5\n", "frac_schrodinger:1.5");
  rejects("[decay]\nscan = fourth_order\n", "phase@t");
  rejects("n = 1\n", "outside a section");
  CHECK_THROWS_AS(load_config((dir / "missing.ini").string()), ConfigError);

  auto c = default_config();
  c.scale_tolerances(10.0);
  CHECK(c.quad_tol == doctest::Approx(1e-8));
  CHECK_THROWS_AS(c.scale_tolerances(0.0), ConfigError);
}

TEST_CASE("command-line entry point") {
  unsetenv("HDISP_OUT");
  const auto dir = scratch("cli");
  std::ostringstream log;

  CliRequest bad;
  bad.subcommand = "plot-everything";
  CHECK(run_cli(bad, log) == 2);
  CHECK(log.str().find("unknown subcommand") != std::string::npos);

  CliRequest empty;
  empty.subcommand = "partition-check";
  empty.config_path = write_ini(dir, "[decay]\nt_count = 0\n").string();
  CHECK(run_cli(empty, log) == 2);

  CliRequest neg = empty;
  neg.config_path.reset();
  neg.threads = -1;
  CHECK(run_cli(neg, log) == 2);

  CliRequest ok;
  ok.subcommand = "partition-check";
  ok.out_dir = (dir / "out").string();
  ok.threads = 2;
  CHECK(run_cli(ok, log) == 0);
  const auto summary = nlohmann::json::parse(slurp(dir / "out" / "summary.json"));
  CHECK(summary["status"] == 0);
  REQUIRE(summary["experiments"].size() == 1);
  const auto& rec = summary["experiments"][0];
  CHECK(rec["id"] == "partition-check");
  CHECK(rec["pass"] == true);
  for (const auto& a : rec["artifacts"]) CHECK(fs::exists(dir / "out" / a.get<std::string>()));

  SUBCASE("environment override reaches the runner") {
    EnvGuard env((dir / "env").c_str());
    CliRequest via_env;
    via_env.subcommand = "partition-check";
    CHECK(run_cli(via_env, log) == 0);
    CHECK(fs::exists(dir / "env" / "summary.json"));
  }
}

TEST_CASE("report writers") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);

  CsvTable t({"t", "sup"});
  t.row(std::vector<double>{1.0, 0.5}).row(std::vector<std::string>{"2", "x"});
  CHECK(t.rows() == 2);
  CHECK(t.str() == "t,sup\n1,0.5\n2,x\n");
  CHECK_THROWS(t.row(std::vector<double>{1.0}));

  PlotSpec p;
  p.title = "a < b";
  p.x = {1.0, 10.0, 100.0};
  p.y = {1.0, 0.3, 0.1};
  p.fit_x = {1.0, 100.0};
  p.fit_y = {1.0, 0.1};
  p.annotation = "slope -0.5";
  const auto svg = render_svg(p);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("a &lt; b") != std::string::npos);
  CHECK(svg.find("slope -0.5") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);

  const auto dir = scratch("report");
  t.write(dir / "nested" / "t.csv");
  CHECK(slurp(dir / "nested" / "t.csv") == t.str());
  write_svg(dir / "p.svg", p);
  CHECK(slurp(dir / "p.svg") == svg);
}
