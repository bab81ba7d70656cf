#pragma once

#include <filesystem>
#include <fstream>
#include <optional>

#include "exitgame/config.hpp"

/* Command dispatch behind the CLI: loads a problem config, runs one of
 * SOLVE / SOLVE_BOTH / SIMULATE / VERIFY / ORACLE / SWEEP and writes CSV
 * artifacts plus a flat key=value report.txt into the output directory.
 * Reports carry no timestamps: a command re-run with the same seed must
 * produce byte-identical artifacts. */

namespace exitgame::cli {

enum class Command { solve, solve_both, simulate, verify, oracle, sweep };

inline Command parse_command(std::string name) {
  for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (name == "solve") return Command::solve;
  if (name == "solve_both") return Command::solve_both;
  if (name == "simulate") return Command::simulate;
  if (name == "verify") return Command::verify;
  if (name == "oracle") return Command::oracle;
  if (name == "sweep") return Command::sweep;
  fail_arg("unknown command '", name,
           "' (expected solve|solve_both|simulate|verify|oracle|sweep)");
}

inline const char* command_name(Command c) {
  switch (c) {
    case Command::solve: return "SOLVE";
    case Command::solve_both: return "SOLVE_BOTH";
    case Command::simulate: return "SIMULATE";
    case Command::verify: return "VERIFY";
    case Command::oracle: return "ORACLE";
    default: return "SWEEP";
  }
}

struct RunConfig {
  std::string problem_path;
  Command command = Command::solve;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::vector<std::size_t> grid_nodes;  // empty: take [grid] from the config
  std::optional<double> dt, tol;
  std::optional<std::size_t> max_iters;
};

namespace detail {

struct Report {
  std::vector<std::pair<std::string, std::string>> lines;

  void put(const std::string& key, const std::string& v) { lines.emplace_back(key, v); }
  void put(const std::string& key, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    lines.emplace_back(key, buf);
  }
  void put(const std::string& key, std::size_t v) {
    lines.emplace_back(key, std::to_string(v));
  }
  void write(const std::string& path) const {
    std::ofstream os(path);
    for (const auto& [k, v] : lines) os << k << "=" << v << "\n";
  }
};

inline void write_grid_csv(const ValueGrid& g, const std::string& path) {
  std::ofstream os(path);
  dump_csv(g, os);
}

inline void put_solve_report(Report& rep, const std::string& prefix,
                             const SolveReport& sr) {
  rep.put(prefix + ".iterations", sr.iterations);
  rep.put(prefix + ".final_residual", sr.final_residual);
  rep.put(prefix + ".contraction_estimate", sr.contraction_estimate);
  rep.put(prefix + ".boundary_violations", sr.boundary_violations);
  rep.put(prefix + ".converged", std::string(sr.converged ? "true" : "false"));
}

inline void put_validations(Report& rep, const GameProblem& p, const config::File& cfg,
                            bool& all_pass) {
  const int corner_samples =
      static_cast<int>(cfg.number_or("verify.corner_samples", 5));
  const int boundary_samples =
      static_cast<int>(cfg.number_or("verify.boundary_samples", 5));
  const auto ec = validate_exit_costs(p, corner_samples);
  rep.put("exit_costs.status", std::string(check_status_name(ec.status)));
  rep.put("exit_costs.samples", ec.samples_checked);
  rep.put("exit_costs.violations", ec.violations.size());
  if (ec.status != CheckStatus::pass) all_pass = false;
  const auto cc = validate_controllability(p, boundary_samples);
  rep.put("controllability.status", std::string(check_status_name(cc.status)));
  rep.put("controllability.zeta_x", cc.x.min_margin);
  rep.put("controllability.zeta_y", cc.y.min_margin);
  rep.put("controllability.coupling_bound", cc.coupling_bound);
  if (cc.status != CheckStatus::pass) all_pass = false;
  const auto bc = validate_bounds(p);
  rep.put("bounds.status", std::string(check_status_name(bc.status)));
  rep.put("bounds.max_dynamics", bc.max_dynamics);
  rep.put("bounds.max_cost", bc.max_cost);
  if (bc.status != CheckStatus::pass) all_pass = false;
}

inline ControlSignal constant_opponent(const GameProblem& p, std::size_t idx, double dt,
                                       std::size_t steps) {
  return constant_signal(p.controls_b.points[idx], dt, steps);
}

}  // namespace detail

inline int run(const RunConfig& rc) {
  namespace fs = std::filesystem;
  const config::File cfg = config::load(rc.problem_path);
  const GameProblem p = config::build_problem(cfg);
  std::vector<std::size_t> nodes =
      rc.grid_nodes.empty() ? config::read_grid_nodes(cfg) : rc.grid_nodes;
  SchemeParams sp = config::read_scheme(cfg);
  if (rc.dt) sp.dt = *rc.dt;
  if (rc.tol) sp.tol = *rc.tol;
  if (rc.max_iters) sp.max_iters = *rc.max_iters;

  fs::create_directories(rc.out_dir);
  const auto out_path = [&](const std::string& f) {
    return (fs::path(rc.out_dir) / f).string();
  };
  detail::Report rep;
  rep.put("command", std::string(command_name(rc.command)));
  rep.put("problem", rc.problem_path);
  rep.put("seed", static_cast<std::size_t>(rc.seed));
  bool all_pass = true;

  switch (rc.command) {
    case Command::solve: {
      detail::put_validations(rep, p, cfg, all_pass);
      all_pass = true;  // WARN/FAIL validations do not block a plain solve
      auto [grid, sr] = solve(p, build_grid(p, nodes), sp);
      const bool lower = sp.convention == Convention::lower;
      detail::write_grid_csv(grid, out_path(lower ? "value_lower.csv" : "value_upper.csv"));
      detail::put_solve_report(rep, lower ? "lower" : "upper", sr);
      break;
    }
    case Command::solve_both: {
      detail::put_validations(rep, p, cfg, all_pass);
      all_pass = true;
      const BothValues both = solve_both(p, build_grid(p, nodes), sp);
      detail::write_grid_csv(both.lower, out_path("value_lower.csv"));
      detail::write_grid_csv(both.upper, out_path("value_upper.csv"));
      detail::put_solve_report(rep, "lower", both.lower_report);
      detail::put_solve_report(rep, "upper", both.upper_report);
      rep.put("gap", both.gap);
      break;
    }
    case Command::simulate: {
      auto [grid, sr] = solve(p, build_grid(p, nodes), sp);
      detail::put_solve_report(rep, "solve", sr);
      Vec x0 = cfg.vec("simulate.x0");
      Vec y0 = cfg.has("simulate.y0") ? cfg.vec("simulate.y0") : Vec{};
      const double T = cfg.number("simulate.T");
      const auto steps = static_cast<std::size_t>(std::ceil(T / sp.dt));
      const std::string strat = cfg.str_or("simulate.strategy", "feedback");
      StrategyMap gamma;
      if (strat == "feedback") {
        gamma = feedback_strategy(p, grid, Player::x, sp.dt, sp.convention);
      } else {
        fail_arg(cfg.name, ": unknown simulate.strategy '", strat, "'");
      }
      rep.put("simulate.T", T);
      rep.put("simulate.value_at_start", interpolate(grid, concat(x0, y0)));
      for (std::size_t k = 0; k < p.controls_b.size(); ++k) {
        const auto beta = detail::constant_opponent(p, k, sp.dt, steps);
        const GameOutcome o = play(p, x0, y0, gamma, beta, T);
        std::ofstream os(out_path("outcome_" + std::to_string(k) + ".csv"));
        dump_csv(o, os);
        const std::string pre = "outcome_" + std::to_string(k);
        rep.put(pre + ".cost", o.cost);
        rep.put(pre + ".tau", o.tau);
        rep.put(pre + ".exit_case", std::string(exit_case_name(o.exit_case)));
      }
      break;
    }
    case Command::verify: {
      detail::put_validations(rep, p, cfg, all_pass);
      auto [grid, sr] = solve(p, build_grid(p, nodes), sp);
      detail::put_solve_report(rep, "solve", sr);
      const double contraction_bound =
          std::exp(-p.costs.discount_lambda * sp.dt) + 1e-6;
      const bool contraction_ok = sr.contraction_estimate <= contraction_bound;
      rep.put("contraction.bound", contraction_bound);
      rep.put("contraction.ok", std::string(contraction_ok ? "true" : "false"));
      if (!contraction_ok) all_pass = false;
      const auto bi = check_boundary_inequalities(p, grid, sp.tol);
      rep.put("boundary_inequalities.ok", std::string(bi.ok ? "true" : "false"));
      rep.put("boundary_inequalities.worst_x_slack", bi.worst_x_slack);
      rep.put("boundary_inequalities.worst_y_slack", bi.worst_y_slack);
      rep.put("boundary_inequalities.corners_excluded", bi.corners_excluded);
      if (!bi.ok) all_pass = false;
      const double dpp = max_interior_dpp_residual(
          p, grid, sp, static_cast<int>(std::max(p.controls_a.size(), p.controls_b.size())));
      const double dpp_bound = sp.tol + 10.0 * sp.dt * sp.dt;
      rep.put("dpp_residual.max", dpp);
      rep.put("dpp_residual.bound", dpp_bound);
      if (dpp > dpp_bound) all_pass = false;
      /* constrained-strategy certification (skipped when controllability
       * fails: the construction needs Assumption 1) */
      const auto cc = validate_controllability(
          p, static_cast<int>(cfg.number_or("verify.boundary_samples", 5)));
      if (cc.status == CheckStatus::pass && p.dim_y() > 0) {
        CertifyOptions opt;
        opt.dt = cfg.number_or("verify.certify_dt", sp.dt);
        opt.horizon = cfg.number_or("verify.certify_horizon", 1.0);
        opt.delta_max = cfg.number_or("verify.delta_max", 0.04);
        opt.seed = rc.seed;
        const double t_star = cfg.number_or("verify.t_star", 0.5);
        const auto sp_x = derive_soner_params(p, Player::x, t_star);
        const auto sp_y = derive_soner_params(p, Player::y, t_star);
        const int trials = static_cast<int>(cfg.number_or("verify.trials", 50));
        const CertReport cert = certify_assumption2(p, trials, sp_x, sp_y, opt);
        const auto put_point = [&](const char* name, const CertPointStats& st) {
          rep.put(std::string("certify.") + name + ".passes", st.passes);
          rep.put(std::string("certify.") + name + ".trials", st.trials);
          rep.put(std::string("certify.") + name + ".worst_margin", st.worst_margin);
        };
        put_point("i", cert.prefix_i);
        put_point("ii", cert.exit_x_ii);
        put_point("iii", cert.exit_y_iii);
        put_point("iv", cert.deviation_x_iv);
        put_point("v", cert.deviation_y_v);
        rep.put("certify.vi.certifiable",
                std::string(cert.cost_certifiable ? "true" : "NOT_CERTIFIED"));
        if (cert.cost_certifiable) put_point("vi", cert.cost_vi);
        if (!cert.all_passed()) all_pass = false;
      } else {
        rep.put("certify.status", std::string("SKIPPED"));
      }
      break;
    }
    case Command::oracle: {
      ValueGrid grid = build_grid(p, nodes);
      const DiscreteGame d = exactify(p, grid, sp);
      rep.put("oracle.states", d.n_states);
      double worst = 0;
      for (const Convention conv : {Convention::lower, Convention::upper}) {
        SchemeParams sp2 = sp;
        sp2.convention = conv;
        auto [solved, sr] = solve(p, grid, sp2);
        const auto exact = brute_value(d, conv);
        double diff = 0;
        for (std::size_t s = 0; s < exact.size(); ++s)
          diff = std::max(diff, std::abs(exact[s] - solved.values[s]));
        rep.put(std::string("oracle.max_diff_") + convention_name(conv), diff);
        worst = std::max(worst, diff);
      }
      rep.put("oracle.ok", std::string(worst <= 1e-9 ? "true" : "false"));
      if (worst > 1e-9) all_pass = false;
      break;
    }
    case Command::sweep: {
      const auto levels = static_cast<std::size_t>(cfg.number_or("sweep.levels", 3));
      std::vector<ValueGrid> grids;
      std::vector<SolveReport> reports;
      std::vector<double> dts;
      for (std::size_t lvl = 0; lvl < levels; ++lvl) {
        std::vector<std::size_t> n = nodes;
        for (auto& c : n) c = (c - 1) * (std::size_t{1} << lvl) + 1;
        SchemeParams sp2 = sp;
        sp2.dt = sp.dt / static_cast<double>(std::size_t{1} << lvl);
        auto [g, sr] = solve(p, build_grid(p, n), sp2);
        grids.push_back(std::move(g));
        reports.push_back(sr);
        dts.push_back(sp2.dt);
      }
      std::ofstream os(out_path("sweep.csv"));
      os << "level,nodes,dt,iterations,sup_diff_vs_finest\n";
      const ValueGrid& finest = grids.back();
      char buf[40];
      Vec z;
      for (std::size_t lvl = 0; lvl < levels; ++lvl) {
        double diff = 0;
        for (std::size_t node = 0; node < grids[lvl].size(); ++node) {
          grids[lvl].node_coords(node, z);
          diff = std::max(diff,
                          std::abs(grids[lvl].values[node] - interpolate(finest, z)));
        }
        os << lvl << ",";
        for (std::size_t i = 0; i < grids[lvl].axes.size(); ++i)
          os << (i ? "x" : "") << grids[lvl].axes[i].count;
        std::snprintf(buf, sizeof buf, "%.17g", dts[lvl]);
        os << "," << buf << "," << reports[lvl].iterations << ",";
        std::snprintf(buf, sizeof buf, "%.17g", diff);
        os << buf << "\n";
        rep.put("sweep.level" + std::to_string(lvl) + ".sup_diff", diff);
      }
      break;
    }
  }

  rep.put("overall", std::string(all_pass ? "PASS" : "FAIL"));
  rep.write(out_path("report.txt"));
  return all_pass ? 0 : 1;
}

}  // namespace exitgame::cli
