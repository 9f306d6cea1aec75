#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "crossdiff/cli.hpp"
#include "crossdiff/config.hpp"
#include "crossdiff/output.hpp"
#include "crossdiff/study.hpp"

using namespace crossdiff;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> owned = args;
  owned.insert(owned.begin(), "crossdiff");
  std::vector<char*> argv;
  for (auto& s : owned) argv.push_back(s.data());
  return cli_main(int(argv.size()), argv.data());
}

std::string small_run_config() {
  return R"(# pure cross-diffusion on the unit interval
D1 = 1
D2 = 1
A12 = 1
A21 = 1
alpha12 = 0.5
alpha21 = 0.5
n = 8
fd_points = 24
T = 0.25
N = 6
eps = 1e-3
u0_kind = cosine-bump
u0_c1 = 1.0
u0_c2 = 1.0
u0_amp1 = 0.4
u0_amp2 = -0.3
)";
}

std::string logistic_config() {
  return R"(r1 = 1
S11 = 1
sigma11 = 1
D1 = 1
D2 = 1
A12 = 1
A21 = 1
alpha12 = 0.5
alpha21 = 0.5
n = 4
T = 1
N = 100
eps = 1e-6
u0_kind = constant
u0_c1 = 0.5
u0_c2 = 1.0
)";
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::path("cli-scratch") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& content) const {
    auto p = path / name;
    std::ofstream out(p, std::ios::binary);
    out << content;
    return p.string();
  }
  std::string sub(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("defaults, comments, and canonical echo") {
    auto cfg = parse_config_text("# nothing but a comment\n\n");
    CHECK(cfg.n == 16);
    CHECK(cfg.model.D1 == 1.0);
    CHECK(cfg.T == 1.0);

    auto echoed = echo_config(cfg);
    auto reparsed = parse_config_text(echoed);
    CHECK(echo_config(reparsed) == echoed);  // canonical fixed point
    CHECK(echoed.find("newton_tol=") != std::string::npos);
    CHECK(echoed.back() == '\n');
  }

  SUBCASE("values reach their fields") {
    auto cfg = parse_config_text(
        "r1 = 0.5\nalpha12=0.25\n  N = 42  # trailing comment\ncheck_invariants = false\n"
        "u0_kind = cosine-bump\ndual_r = 2.5\n");
    CHECK(cfg.model.r1 == 0.5);
    CHECK(cfg.model.alpha12 == 0.25);
    CHECK(cfg.N == 42);
    CHECK_FALSE(cfg.check_invariants);
    CHECK(cfg.u0_kind == "cosine-bump");
    CHECK(cfg.dual_r == 2.5);
  }

  SUBCASE("the L shorthand sets both extents") {
    auto cfg = parse_config_text("L = 3.5\n");
    CHECK(cfg.L1 == 3.5);
    CHECK(cfg.L2 == 3.5);
  }

  SUBCASE("rejects malformed input") {
    CHECK_THROWS_AS(parse_config_text("volume = 3\n"), ConfigError);      // unknown key
    CHECK_THROWS_AS(parse_config_text("N = twelve\n"), ConfigError);      // bad integer
    CHECK_THROWS_AS(parse_config_text("T = 1.0x\n"), ConfigError);        // trailing junk
    CHECK_THROWS_AS(parse_config_text("T\n"), ConfigError);               // no assignment
    CHECK_THROWS_AS(parse_config_text("eps = -1e-3\n"), ConfigError);     // invalid value
    CHECK_THROWS_AS(parse_config_text("dim = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("u0_kind = plume\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("check_invariants = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("n = 2\n"), ConfigError);
  }

  SUBCASE("missing file") {
    CHECK_THROWS_AS(parse_config("does-not-exist.cfg"), ConfigError);
  }
}

TEST_CASE("run assembly from a config") {
  auto cfg = parse_config_text(small_run_config());

  SUBCASE("spatial pieces") {
    auto space = make_space(cfg);
    CHECK(space.dimension() == 1);
    CHECK(space.n() == 8);
    auto grid = make_grid(cfg);
    CHECK(grid.num_nodes() == 24);
  }

  SUBCASE("solver settings and the sigma path") {
    auto sc = make_solve_config(cfg);
    CHECK(sc.T == 0.25);
    CHECK(sc.N == 6);
    CHECK(sc.eps == 1e-3);
    REQUIRE(int(sc.sigma_schedule.size()) == cfg.sigma_steps + 1);
    CHECK(sc.sigma_schedule.front() == 0.0);
    CHECK(sc.sigma_schedule.back() == 1.0);
    for (size_t k = 1; k < sc.sigma_schedule.size(); ++k)
      CHECK(sc.sigma_schedule[k] > sc.sigma_schedule[k - 1]);
  }

  SUBCASE("cosine bump initial data") {
    auto space = make_space(cfg);
    auto [u1, u2] = make_initial_data(cfg, space);
    for (int q = 0; q < space.num_nodes(); q += 7) {
      double x = space.node_coord(q, 0);
      CHECK(u1[q] ==
            doctest::Approx(1.0 + 0.4 * std::cos(std::acos(-1.0) * x)).epsilon(1e-13));
      CHECK(u2[q] ==
            doctest::Approx(1.0 - 0.3 * std::cos(std::acos(-1.0) * x)).epsilon(1e-13));
    }
  }

  SUBCASE("initial data from a file") {
    TempDir tmp("u0-file");
    auto space = make_space(cfg);
    std::ostringstream rows;
    rows << "# nodal initial data\n";
    for (int q = 0; q < space.num_nodes(); ++q)
      rows << format_g17(1.0 + 0.01 * q) << "," << format_g17(2.0) << "\n";
    auto cfg2 = cfg;
    cfg2.u0_kind = "file";
    cfg2.u0_file = tmp.file("u0.csv", rows.str());
    auto [u1, u2] = make_initial_data(cfg2, space);
    CHECK(u1[3] == doctest::Approx(1.03).epsilon(1e-15));
    CHECK(u2[5] == 2.0);

    cfg2.u0_file = tmp.file("short.csv", "1,1\n2,2\n");
    CHECK_THROWS_AS(make_initial_data(cfg2, space), ConfigError);
    cfg2.u0_file = tmp.file("neg.csv", [&] {
      std::ostringstream bad;
      for (int q = 0; q < space.num_nodes(); ++q) bad << "1,-0.5\n";
      return bad.str();
    }());
    CHECK_THROWS_AS(make_initial_data(cfg2, space), ConfigError);
  }
}

TEST_CASE("scalar comparison for spatially constant runs") {
  auto cfg = parse_config_text(logistic_config());
  auto rep = ode_compare(cfg);

  // the run must stay constant in space and follow the scalar scheme
  CHECK(rep.max_spatial_variation < 1e-9);
  CHECK(rep.max_scheme_dev < 1e-7);
  CHECK(int(rep.pde_means.size()) == cfg.N);
  CHECK(int(rep.euler.size()) == cfg.N);

  // logistic growth from 0.5 over one unit of time
  double exact = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(rep.final_reference[0] == doctest::Approx(exact).epsilon(1e-8));
  CHECK(rep.final_pde[0] == doctest::Approx(exact).epsilon(5e-3));
  CHECK(rep.max_reference_dev < 0.02);
  // the inert species stays at its equilibrium value 1
  CHECK(rep.final_pde[1] == doctest::Approx(1.0).epsilon(1e-9));

  SUBCASE("requires constant initial data") {
    auto bad = cfg;
    bad.u0_kind = "cosine-bump";
    CHECK_THROWS_AS(ode_compare(bad), ConfigError);
  }
}

TEST_CASE("refinement study") {
  auto cfg = parse_config_text(small_run_config());
  cfg.levels = 2;
  cfg.N = 8;
  auto rep = convergence_study(cfg);
  REQUIRE(int(rep.levels.size()) == 2);

  const auto& l0 = rep.levels[0];
  const auto& l1 = rep.levels[1];
  CHECK(l0.N == 8);
  CHECK(l1.N == 16);
  CHECK(l0.eps == doctest::Approx(1e-3));
  CHECK(l1.eps == doctest::Approx(2.5e-4));
  CHECK(l1.n == 16);
  CHECK(l1.tau == doctest::Approx(l0.tau / 2));

  for (const auto& l : rep.levels) {
    CHECK(l.invariants_pass);
    CHECK(l.min_u > 0.0);
    CHECK(l.entropy_total <= l.apriori_bound * (1 + 1e-9));
    CHECK(l.duality[0] > 0.0);
    CHECK(std::isfinite(l.duality[1]));
    CHECK(l.weak_residual_max > 0.0);
  }
  CHECK(l1.weak_residual_max < l0.weak_residual_max);
}

TEST_CASE("command-line driver") {
  TempDir tmp("driver");
  auto cfg_path = tmp.file("run.cfg", small_run_config());

  SUBCASE("simulate writes the full output set and is deterministic") {
    auto out1 = tmp.sub("out1"), out2 = tmp.sub("out2");
    CHECK(run_cli({"simulate", "--config", cfg_path, "--out", out1}) == 0);
    for (const char* name :
         {"series.csv", "fields.csv", "report.txt", "config.echo", "trajectory.csv"}) {
      CAPTURE(name);
      CHECK(fs::exists(fs::path(out1) / name));
    }
    auto report = slurp(out1 + "/report.txt");
    CHECK(report.find("overall: PASS") != std::string::npos);
    CHECK(report.find("invariant checks") != std::string::npos);

    auto echo = slurp(out1 + "/config.echo");
    CHECK(echo == echo_config(parse_config(cfg_path)));

    CHECK(run_cli({"simulate", "--config", cfg_path, "--out", out2}) == 0);
    CHECK(slurp(out1 + "/series.csv") == slurp(out2 + "/series.csv"));
    CHECK(slurp(out1 + "/trajectory.csv") == slurp(out2 + "/trajectory.csv"));
    CHECK(slurp(out1 + "/fields.csv") == slurp(out2 + "/fields.csv"));

    SUBCASE("stored trajectories replay through the verification commands") {
      CHECK(run_cli({"verify-entropy", "--config", cfg_path, "--out", out1}) == 0);
      auto verify_report = slurp(out1 + "/report.txt");
      CHECK(verify_report.find("overall: PASS") != std::string::npos);

      CHECK(run_cli({"verify-duality", "--config", cfg_path, "--out", out1}) == 0);
      CHECK(fs::exists(fs::path(out1) / "duality.csv"));

      SUBCASE("the duality forcing is seeded") {
        auto first = slurp(out1 + "/duality.csv");
        CHECK(run_cli({"verify-duality", "--config", cfg_path, "--out", out1}) == 0);
        CHECK(slurp(out1 + "/duality.csv") == first);
        CHECK(run_cli({"verify-duality", "--config", cfg_path, "--out", out1, "--seed",
                       "7"}) == 0);
        CHECK(slurp(out1 + "/duality.csv") != first);
      }
    }
  }

  SUBCASE("assumption checking splits admissible from excluded models") {
    auto good = tmp.sub("good");
    CHECK(run_cli({"check-assumptions", "--config", cfg_path, "--out", good}) == 0);
    CHECK(slurp(good + "/report.txt").find("FAIL") == std::string::npos);

    auto bad_path = tmp.file("bad.cfg", small_run_config() + "alpha12 = 1.0\n");
    auto bad = tmp.sub("bad");
    CHECK(run_cli({"check-assumptions", "--config", bad_path, "--out", bad}) == 2);
    CHECK(slurp(bad + "/report.txt").find("FAIL") != std::string::npos);
  }

  SUBCASE("scalar comparison and study subcommands") {
    auto ode_cfg = tmp.file("ode.cfg", logistic_config());
    auto out = tmp.sub("ode-out");
    CHECK(run_cli({"ode-compare", "--config", ode_cfg, "--out", out}) == 0);
    CHECK(fs::exists(fs::path(out) / "ode.csv"));

    auto study_cfg = tmp.file("study.cfg", small_run_config() + "levels = 2\nN = 8\n");
    auto sout = tmp.sub("study-out");
    CHECK(run_cli({"convergence-study", "--config", study_cfg, "--out", sout}) == 0);
    CHECK(fs::exists(fs::path(sout) / "study.csv"));
    CHECK(slurp(sout + "/report.txt").find("level") != std::string::npos);
  }

  SUBCASE("usage and configuration errors exit with 1") {
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"simulate"}) == 1);                       // missing --config
    CHECK(run_cli({"fly", "--config", cfg_path}) == 1);      // unknown subcommand
    CHECK(run_cli({"simulate", "--config", "missing.cfg"}) == 1);
    auto junk = tmp.file("junk.cfg", "volume = 12\n");
    CHECK(run_cli({"simulate", "--config", junk}) == 1);
    auto unsolvable = tmp.file("stiff.cfg", small_run_config() + "r1 = 50\nS11 = 1\nsigma11 = 1\nN = 2\n");
    CHECK(run_cli({"simulate", "--config", unsolvable}) == 1);  // tau K too large
  }
}
