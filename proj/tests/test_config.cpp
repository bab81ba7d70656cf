#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "exitgame/config.hpp"
#include "exitgame/runner.hpp"
#include "test_instances.hpp"

using namespace exitgame;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

config::File parse_str(const std::string& text) {
  std::istringstream in(text);
  return config::parse(in, "test.toml");
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("sections, numbers, strings, booleans, nested arrays") {
    const auto f = parse_str(
        "top = 1.5\n"
        "[a]\n"
        "name = \"hello\"  # trailing comment\n"
        "flag = true\n"
        "list = [1, 2, 3]\n"
        "[a.b]\n"
        "m = [[1, 0], [0, 1]]\n");
    CHECK(f.number("top") == 1.5);
    CHECK(f.str("a.name") == "hello");
    CHECK(f.vec("a.list") == Vec{1, 2, 3});
    const auto m = f.matrix("a.b.m");
    CHECK(m.is_identity());
  }

  SUBCASE("errors carry the file name and line number") {
    CHECK_THROWS_WITH_AS(parse_str("x 1\n"), doctest::Contains("test.toml:1"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_str("a = 1\nb = [1, 2\n"),
                         doctest::Contains("test.toml:2"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_str("a = nonsense\n"), doctest::Contains("test.toml:1"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_str("a = 1\na = 2\n"), doctest::Contains("duplicate"),
                         std::invalid_argument);
  }

  SUBCASE("missing keys name the key") {
    const auto f = parse_str("a = 1\n");
    CHECK_THROWS_WITH_AS(f.number("missing.key"), doctest::Contains("missing.key"),
                         std::invalid_argument);
  }
}

TEST_CASE("bundled configs build consistent problems") {
  SUBCASE("eikonal_1d matches the in-code instance") {
    const auto cfg = config::load(instances::config_path("eikonal_1d.toml"));
    const auto p = config::build_problem(cfg);
    const auto q = instances::eikonal_1d();
    CHECK(p.omega_x.lo == q.omega_x.lo);
    CHECK(p.controls_a.points == q.controls_a.points);
    CHECK(p.costs.discount_lambda == q.costs.discount_lambda);
    Vec v;
    p.velocity_x({0.5}, {-1.0}, {0.0}, v);
    CHECK(v == Vec{-1.0});
    p.velocity_y({0.5}, {0.0}, v);
    CHECK(v == Vec{0.0});
    CHECK(p.running({0.5}, {0.0}, {1.0}, {0.0}) == 1.0);
    CHECK(config::read_grid_nodes(cfg) == std::vector<std::size_t>{101, 3});
    CHECK(config::read_scheme(cfg).dt == 0.005);
  }

  SUBCASE("surge_tank loads x1' = x2, x2' = -alpha + beta and l = |beta|^2 + k") {
    const auto cfg = config::load(instances::config_path("surge_tank.toml"));
    const auto p = config::build_problem(cfg);
    CHECK(p.dim_x() == 2);
    CHECK(p.dim_y() == 0);
    REQUIRE(p.dynamics.coupling_D.has_value());
    Vec v;
    /* alpha = 2 embeds as a = (0,-2); beta = 1 */
    p.velocity_x({0.25, 0.5}, {0.0, -2.0}, {1.0}, v);
    CHECK(v == Vec{0.5, -1.0});
    CHECK(p.running({0.0, 0.0}, {}, {0.0, 0.0}, {1.0}) == doctest::Approx(2.0));
    CHECK(p.costs.split == CostSplit::control_separated);
  }

  SUBCASE("decoupled_1d1d reproduces the polynomial running cost") {
    const auto cfg = config::load(instances::config_path("decoupled_1d1d.toml"));
    const auto p = config::build_problem(cfg);
    const auto q = instances::decoupled_1d1d();
    for (double x : {0.0, 0.3, 1.0})
      for (double y : {0.1, 0.9})
        for (double a : {-1.0, 1.0})
          CHECK(p.running({x}, {y}, {a}, {1.0}) ==
                doctest::Approx(q.running({x}, {y}, {a}, {1.0})));
  }

  SUBCASE("every bundled config builds and validates dimensionally") {
    for (const auto& entry : fs::directory_iterator(EXITGAME_CONFIG_DIR)) {
      const auto cfg = config::load(entry.path().string());
      CHECK_NOTHROW(config::build_problem(cfg));
    }
  }
}

TEST_CASE("solve command writes the value CSV and report") {
  const auto dir = fs::temp_directory_path() / "exitgame_test_solve";
  fs::remove_all(dir);
  cli::RunConfig rc;
  rc.problem_path = instances::config_path("coupled_ab.toml");
  rc.command = cli::Command::solve;
  rc.out_dir = dir.string();
  const int status = cli::run(rc);
  CHECK(status == 0);
  CHECK(fs::exists(dir / "value_lower.csv"));
  const std::string rep = slurp((dir / "report.txt").string());
  CHECK(rep.find("command=SOLVE") != std::string::npos);
  CHECK(rep.find("lower.converged=true") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("solve_both reports the gap") {
  const auto dir = fs::temp_directory_path() / "exitgame_test_both";
  fs::remove_all(dir);
  cli::RunConfig rc;
  rc.problem_path = instances::config_path("decoupled_bsingleton.toml");
  rc.command = cli::Command::solve_both;
  rc.out_dir = dir.string();
  CHECK(cli::run(rc) == 0);
  CHECK(fs::exists(dir / "value_lower.csv"));
  CHECK(fs::exists(dir / "value_upper.csv"));
  CHECK(slurp((dir / "report.txt").string()).find("gap=") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("verify is byte-identical across runs with a fixed seed") {
  const auto dir1 = fs::temp_directory_path() / "exitgame_verify_1";
  const auto dir2 = fs::temp_directory_path() / "exitgame_verify_2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  cli::RunConfig rc;
  rc.problem_path = instances::config_path("decoupled_1d1d.toml");
  rc.command = cli::Command::verify;
  rc.seed = 42;
  rc.grid_nodes = {11, 11};
  rc.dt = 0.05;
  rc.out_dir = dir1.string();
  const int s1 = cli::run(rc);
  rc.out_dir = dir2.string();
  const int s2 = cli::run(rc);
  CHECK(s1 == s2);
  CHECK(slurp((dir1 / "report.txt").string()) == slurp((dir2 / "report.txt").string()));
  CHECK(!slurp((dir1 / "report.txt").string()).empty());
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("oracle command certifies the bundled node-stepping instance") {
  const auto dir = fs::temp_directory_path() / "exitgame_test_oracle";
  fs::remove_all(dir);
  cli::RunConfig rc;
  rc.problem_path = instances::config_path("oracle_nodestep.toml");
  rc.command = cli::Command::oracle;
  rc.out_dir = dir.string();
  CHECK(cli::run(rc) == 0);
  const std::string rep = slurp((dir / "report.txt").string());
  CHECK(rep.find("oracle.ok=true") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("simulate command writes one outcome per opponent probe") {
  const auto dir = fs::temp_directory_path() / "exitgame_test_sim";
  fs::remove_all(dir);
  cli::RunConfig rc;
  rc.problem_path = instances::config_path("eikonal_1d.toml");
  rc.command = cli::Command::simulate;
  rc.out_dir = dir.string();
  CHECK(cli::run(rc) == 0);
  CHECK(fs::exists(dir / "outcome_0.csv"));
  const std::string rep = slurp((dir / "report.txt").string());
  CHECK(rep.find("outcome_0.cost=") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("sweep command produces the refinement series") {
  const auto dir = fs::temp_directory_path() / "exitgame_test_sweep";
  fs::remove_all(dir);
  cli::RunConfig rc;
  rc.problem_path = instances::config_path("corner_jump.toml");
  rc.command = cli::Command::sweep;
  rc.out_dir = dir.string();
  CHECK(cli::run(rc) == 0);
  const std::string csv = slurp((dir / "sweep.csv").string());
  CHECK(csv.find("level,nodes,dt,iterations,sup_diff_vs_finest") == 0);
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == 4);  // header + 3 levels
  fs::remove_all(dir);
}
