#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lendsim/config.hpp"
#include "lendsim/harness.hpp"
#include "lendsim/learners.hpp"
#include "lendsim/metrics.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

std::vector<long long> parse_grid(const std::string& csv) {
  std::vector<long long> grid;
  std::istringstream in(csv);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    if (cell.empty()) continue;
    grid.push_back(std::stoll(cell));
  }
  return grid;
}

void print_report(const lendsim::RegretReport& rep) {
  std::printf("r_alg                 %.12g\n", rep.r_alg);
  std::printf("r_star                %.12g\n", rep.r_star);
  std::printf("regret                %.12g\n", rep.regret);
  std::printf("dynamic_regret        %.12g\n", rep.dynamic_regret);
  std::printf("r_star_static         %.12g\n", rep.r_star_static);
  std::printf("static_regret         %.12g\n", rep.static_regret);
  std::printf("decomposition_residual %.12g\n", rep.residual);
  std::printf("path_length           %.12g\n", rep.path_length);
  std::printf("competitive_ratio     %.12g\n", rep.competitive_ratio);
  std::printf("rejected_loans        %lld\n", rep.rejected_loans);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete-time lending-market simulator and online-learning harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool exact = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "scenario config (JSON, schema v1)");
    if (needs_config) opt->required();
    cmd->add_option("--out", out_dir, "artifact output directory");
    cmd->add_option("--seed", seed, "master seed override");
    cmd->add_flag("--exact", exact, "exact rational arithmetic where available");
  };

  auto* cmd_run = app.add_subcommand("run", "run one scenario and write its artifacts");
  add_common(cmd_run, true);

  auto* cmd_sweep = app.add_subcommand("sweep", "run a horizon sweep and fit the regret scaling");
  add_common(cmd_sweep, true);
  std::string t_grid_csv = "128,256,512,1024,2048,4096,8192,16384";
  int reps = 5;
  cmd_sweep->add_option("--t-grid", t_grid_csv, "comma-separated horizons");
  cmd_sweep->add_option("--reps", reps, "repetitions per horizon");

  auto* cmd_repro = app.add_subcommand("reproduce", "check a worked example against closed forms");
  int example_id = 1;
  long long horizon = 100;
  double delta = 0.1;
  cmd_repro->add_option("--id", example_id, "example id (1..3)")->required();
  cmd_repro->add_option("--t", horizon, "horizon");
  cmd_repro->add_option("--delta", delta, "large-loan split (example 3)");
  cmd_repro->add_flag("--exact", exact, "exact rational arithmetic");

  auto* cmd_validate = app.add_subcommand("validate", "emit assumption reports for a scenario");
  add_common(cmd_validate, true);

  auto* cmd_bounds = app.add_subcommand("bounds", "print the regret-bound calculator table");
  double arg_g = 1.0, arg_mu = 1.0, arg_diam = 1.0, arg_path = 0.0;
  std::string bounds_grid = "100,1000,10000,100000";
  cmd_bounds->add_option("--g", arg_g, "gradient bound G");
  cmd_bounds->add_option("--mu", arg_mu, "curvature parameter");
  cmd_bounds->add_option("--diam", arg_diam, "decision-set diameter");
  cmd_bounds->add_option("--path", arg_path, "path length P_T");
  cmd_bounds->add_option("--t-grid", bounds_grid, "comma-separated horizons");

  auto* cmd_fit = app.add_subcommand("fit", "fit the scaling basis to a (T, value) CSV");
  std::string fit_path;
  cmd_fit->add_option("--data", fit_path, "CSV with header and rows T,value")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_run) {
      lendsim::ScenarioConfig cfg = lendsim::load_config(config_path);
      if (seed != 0) cfg.seed = seed;
      const auto result = lendsim::run_scenario(cfg, out_dir, exact, true);
      if (result.multi) {
        std::printf("revenue        %.12g\n", result.multi_revenue);
        std::printf("static_optimum %.12g\n", result.multi_static_optimum);
        std::printf("regret         %.12g\n", result.multi_regret);
      } else {
        print_report(result.report);
      }
      for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      std::printf("artifacts written to %s\n", out_dir.c_str());
    } else if (*cmd_sweep) {
      lendsim::ScenarioConfig cfg = lendsim::load_config(config_path);
      if (seed != 0) cfg.seed = seed;
      const auto grid = parse_grid(t_grid_csv);
      const auto sweep = lendsim::sweep_scenario(cfg, grid, reps, out_dir, true);
      std::printf("%12s %18s %18s\n", "horizon", "median_regret", "median_static");
      for (std::size_t i = 0; i < grid.size(); ++i)
        std::printf("%12lld %18.8g %18.8g\n", grid[i], sweep.median_regret[i],
                    sweep.median_static_regret[i]);
      if (sweep.fit_ok) {
        std::printf("dominant term: %s\n", sweep.fit.dominant.c_str());
        for (std::size_t j = 0; j < sweep.fit.coeffs.size(); ++j)
          std::printf("  coeff[%s] = %.6g\n", sweep.fit.basis_labels[j].c_str(),
                      sweep.fit.coeffs[j]);
      } else {
        std::printf("grid too narrow for a scaling fit (need >= 5 points over 2 decades)\n");
      }
    } else if (*cmd_repro) {
      const auto result = lendsim::reproduce_example(example_id, horizon, delta, exact);
      std::printf("%-28s %20s %20s %14s\n", "quantity", "closed_form", "simulated", "abs_diff");
      for (const auto& row : result.rows)
        std::printf("%-28s %20.12g %20.12g %14.3e\n", row.quantity.c_str(), row.closed_form,
                    row.simulated, row.abs_diff);
      std::printf("%s\n", result.pass ? "PASS (all diffs <= 1e-9)" : "FAIL");
      if (!result.pass) return kExitRuntime;
    } else if (*cmd_validate) {
      lendsim::ScenarioConfig cfg = lendsim::load_config(config_path);
      if (seed != 0) cfg.seed = seed;
      const auto reports = lendsim::validate_scenario(cfg);
      std::filesystem::create_directories(out_dir);
      lendsim::write_reports_json(std::filesystem::path(out_dir) / "assumptions.json", reports);
      for (const auto& rep : reports)
        std::printf("%-32s %-16s %s\n", rep.assumption.c_str(), rep.status.c_str(),
                    rep.note.c_str());
    } else if (*cmd_bounds) {
      const auto grid = parse_grid(bounds_grid);
      std::printf("%12s %16s %16s %16s\n", "T", "zinkevich", "hazan", "besbes");
      for (long long t : grid)
        std::printf("%12lld %16.6g %16.6g %16.6g\n", t,
                    lendsim::zinkevich_bound(arg_diam, arg_g, static_cast<double>(t)),
                    lendsim::hazan_bound(arg_g, arg_mu, static_cast<double>(t)),
                    lendsim::besbes_dynamic_bound(arg_g, arg_mu, static_cast<double>(t),
                                                  arg_path));
    } else if (*cmd_fit) {
      std::ifstream in(fit_path);
      if (!in) throw std::invalid_argument("cannot open " + fit_path);
      std::string line;
      std::getline(in, line);  // header
      std::vector<double> ts, vs;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string a, b;
        std::getline(row, a, ',');
        std::getline(row, b, ',');
        ts.push_back(std::stod(a));
        vs.push_back(std::stod(b));
      }
      const auto fit = lendsim::fit_scaling(ts, vs);
      std::printf("dominant term: %s   (residual %.6g)\n", fit.dominant.c_str(),
                  fit.residual_norm);
      for (std::size_t j = 0; j < fit.coeffs.size(); ++j)
        std::printf("  coeff[%s] = %.6g\n", fit.basis_labels[j].c_str(), fit.coeffs[j]);
    }
  } catch (const lendsim::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid input: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
