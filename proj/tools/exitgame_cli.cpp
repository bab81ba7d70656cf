#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "exitgame/runner.hpp"

/* Command-line entry point: load a problem config, run one command, emit
 * CSV artifacts and report.txt. Nonzero exit status on failed checks or
 * non-convergence. */

int main(int argc, char** argv) {
  CLI::App app{"Exit-time differential game solver and simulator"};
  exitgame::cli::RunConfig rc;
  std::string command = "solve";
  std::string grid_spec;
  double dt = -1, tol = -1;
  long long max_iters = -1;

  app.add_option("--config", rc.problem_path, "problem definition file (TOML-style)")
      ->required();
  app.add_option("--command", command,
                 "solve|solve_both|simulate|verify|oracle|sweep");
  app.add_option("--out", rc.out_dir, "output directory (default: out)");
  app.add_option("--seed", rc.seed, "seed for randomized certifications");
  app.add_option("--grid", grid_spec, "nodes per axis, N or N,N,...");
  app.add_option("--dt", dt, "time step override");
  app.add_option("--tol", tol, "fixed-point tolerance override");
  app.add_option("--max-iters", max_iters, "iteration cap override");
  CLI11_PARSE(app, argc, argv);

  try {
    rc.command = exitgame::cli::parse_command(command);
    if (!grid_spec.empty()) {
      std::size_t pos = 0;
      while (pos < grid_spec.size()) {
        const auto comma = grid_spec.find(',', pos);
        const std::string tok = grid_spec.substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos);
        rc.grid_nodes.push_back(static_cast<std::size_t>(std::stoul(tok)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
    }
    if (dt > 0) rc.dt = dt;
    if (tol > 0) rc.tol = tol;
    if (max_iters > 0) rc.max_iters = static_cast<std::size_t>(max_iters);
    const int status = exitgame::cli::run(rc);
    std::fprintf(stderr, "%s: %s\n", command.c_str(), status == 0 ? "PASS" : "FAIL");
    return status;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
