#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tikflow/experiment.hpp"
#include "tikflow/csv.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tikflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

// strip the wall-clock column from a stats CSV for comparison
std::string drop_wall_clock(const std::string& text) {
  std::string out;
  for (const auto& line : lines_of(text)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == 1) continue;  // wall_clock_s
      out += cells[i];
      out += ',';
    }
    out += '\n';
  }
  return out;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path d = fs::temp_directory_path() / ("tikflow_test_" + tag);
  fs::remove_all(d);
  return d;
}

const char* kOdeConfig =
    "problem.name = quadratic2d\n"
    "flow.alpha = 3.5\n"
    "flow.beta = 4\n"
    "flow.a = 1\n"
    "flow.p = 1.2\n"
    "flow.q = 0.9\n"
    "flow.delta_theta = 1\n"
    "flow.x0 = 1, 1\n"
    "flow.v0 = -1, -1\n"
    "flow.t_end = 30\n";

const char* kIpgaConfig =
    "problem.name = quadratic2d\n"
    "step.alpha = 4\n"
    "step.beta = 4\n"
    "step.a = 1\n"
    "step.p = 1.8\n"
    "step.q = 0.5\n"
    "step.delta_theta = 2\n"
    "step.K = 40\n";

}  // namespace

TEST_CASE("config parser: values, defaults, comments, precise errors") {
  const auto cfg = Config::parse_string(
      "# leading comment\n"
      "problem.name = quadratic2d\n"
      "\n"
      "flow.alpha = 3.5\n"
      "flow.x0 = 1, 2, 3\n",
      "inline");
  CHECK(cfg.get_string("problem.name") == "quadratic2d");
  CHECK(cfg.get_double("flow.alpha") == 3.5);
  CHECK(cfg.get_double("flow.beta", 0.25) == 0.25);
  const auto v = cfg.get_vector("flow.x0");
  REQUIRE(v.size() == 3);
  CHECK(v[1] == 2.0);

  try {
    Config::parse_string("a = 1\nbroken line\n", "inline");
    FAIL("expected a parse error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("inline:2") != std::string::npos);
  }
  CHECK_THROWS_AS((void)cfg.get_double("problem.name"), ConfigError);
  CHECK_THROWS_AS((void)cfg.get_string("missing.key"), ConfigError);
}

TEST_CASE("typed bundles come out of the config correctly") {
  const auto cfg = Config::parse_string(std::string(kOdeConfig) + kIpgaConfig);
  const auto f = flow_from_config(cfg);
  CHECK(f.alpha == 3.5);
  CHECK(f.delta.theta == 1.0);
  CHECK(f.t0 == 1.0);
  const auto s = step_from_config(cfg);
  CHECK(s.q == 0.5);
  CHECK(s.delta.theta == 2.0);
  const auto o = problem_from_config(cfg);
  CHECK(o.name == "quadratic2d");
  CHECK(o.dimension == 2);
}

TEST_CASE("double formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e17}) {
    const std::string s = format_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
}

TEST_CASE("run-ode mode writes the full artifact set") {
  const auto cfg = Config::parse_string(kOdeConfig);
  const auto dir = fresh_dir("ode");
  CHECK(run_experiment(cfg, "run-ode", dir.string()) == 0);
  for (const char* f :
       {"trajectory.csv", "stats.csv", "regime.csv", "regime.txt", "slopes.csv",
        "MANIFEST"})
    CHECK(fs::exists(dir / f));
  const auto traj = lines_of(slurp(dir / "trajectory.csv"));
  CHECK(traj.front() ==
        "t,x0,x1,g_gap,grad_norm,dist_min_norm,energy_Eb,energy_E,step_size");
  CHECK(traj.size() >= 100);
  CHECK(slurp(dir / "MANIFEST").find("status=complete") != std::string::npos);
}

TEST_CASE("run-ipga mode leaves unrequested energy cells empty") {
  const auto cfg = Config::parse_string(kIpgaConfig);
  const auto dir = fresh_dir("ipga");
  CHECK(run_experiment(cfg, "run-ipga", dir.string()) == 0);
  const auto rows = lines_of(slurp(dir / "iterates.csv"));
  CHECK(rows.front() ==
        "k,x0,x1,g_gap,grad_norm,dist_min_norm,step_norm,d_k,rho_k,a_k,"
        "energy_calE,energy_E");
  REQUIRE(rows.size() == 41);
  CHECK(rows[1].substr(rows[1].size() - 2) == ",,");  // both energies blank
}

TEST_CASE("requested energies are written") {
  auto cfg = Config::parse_string(kIpgaConfig);
  cfg.set("energy.calE", "1");
  const auto dir = fresh_dir("ipga_energy");
  CHECK(run_experiment(cfg, "run-ipga", dir.string()) == 0);
  const auto rows = lines_of(slurp(dir / "iterates.csv"));
  // calE filled, E still blank
  CHECK(rows[1].back() == ',');
  const auto second_last = rows[1].find_last_of(',', rows[1].size() - 2);
  CHECK(second_last != rows[1].size() - 2);
}

TEST_CASE("compare mode produces one file per system") {
  auto cfg = Config::parse_string(kOdeConfig);
  cfg.set("compare.kind", "ode");
  const auto dir = fresh_dir("cmp");
  CHECK(run_experiment(cfg, "compare", dir.string()) == 0);
  for (const char* f : {"trajectory_system6.csv", "trajectory_system8.csv",
                        "trajectory_system9.csv", "stats.csv"})
    CHECK(fs::exists(dir / f));
  const auto stats = lines_of(slurp(dir / "stats.csv"));
  REQUIRE(stats.size() == 4);
  CHECK(stats[0] == "system,wall_clock_s,avg_step,points");
}

TEST_CASE("predict mode runs no numerics but emits the report") {
  auto cfg = Config::parse_string(kOdeConfig);  // no t_end needed for predict
  const auto dir = fresh_dir("predict");
  CHECK(run_experiment(cfg, "predict", dir.string()) == 0);
  const auto txt = slurp(dir / "regime.txt");
  CHECK(txt.find("theorem_case = 3.1(ii)") != std::string::npos);
  CHECK(txt.find("exponent.gap = -2.2") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "trajectory.csv"));
}

TEST_CASE("audit mode returns the report row") {
  auto cfg = Config::parse_string(kOdeConfig);
  cfg.set("flow.q", "0.4");
  cfg.set("flow.p", "1.8");
  cfg.set("flow.t_end", "100");
  cfg.set("audit.kind", "Eb");
  const auto dir = fresh_dir("audit");
  CHECK(run_experiment(cfg, "audit", dir.string()) == 0);
  const auto rows = lines_of(slurp(dir / "audit.csv"));
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "kind,onset_t,fitted_C,max_violation,passed");
  CHECK(rows[1].substr(rows[1].size() - 2) == ",1");
}

TEST_CASE("check-appendix mode writes the onset table") {
  auto cfg = Config::parse_string(kIpgaConfig);
  cfg.set("appendix.lambda", "1");
  cfg.set("appendix.s", "0.05");
  cfg.set("appendix.kmax", "5000");
  const auto dir = fresh_dir("appendix");
  CHECK(run_experiment(cfg, "check-appendix", dir.string()) == 0);
  const auto rows = lines_of(slurp(dir / "appendix_onsets.csv"));
  CHECK(rows.size() == 13);  // header + 12 sequences
}

TEST_CASE("re-running a config is byte-identical modulo wall clock") {
  const auto cfg = Config::parse_string(kIpgaConfig);
  const auto d1 = fresh_dir("det1");
  const auto d2 = fresh_dir("det2");
  CHECK(run_experiment(cfg, "run-ipga", d1.string()) == 0);
  CHECK(run_experiment(cfg, "run-ipga", d2.string()) == 0);
  CHECK(slurp(d1 / "iterates.csv") == slurp(d2 / "iterates.csv"));
  CHECK(slurp(d1 / "slopes.csv") == slurp(d2 / "slopes.csv"));
  CHECK(slurp(d1 / "regime.csv") == slurp(d2 / "regime.csv"));
  CHECK(drop_wall_clock(slurp(d1 / "stats.csv")) ==
        drop_wall_clock(slurp(d2 / "stats.csv")));
}

TEST_CASE("unknown mode leaves an incomplete manifest and throws") {
  const auto cfg = Config::parse_string(kIpgaConfig);
  const auto dir = fresh_dir("bad");
  CHECK_THROWS_AS(run_experiment(cfg, "no-such-mode", dir.string()), ConfigError);
  CHECK(slurp(dir / "MANIFEST").find("status=incomplete") != std::string::npos);
}
