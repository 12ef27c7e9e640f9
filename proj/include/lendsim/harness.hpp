#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lendsim/assumptions.hpp"
#include "lendsim/config.hpp"
#include "lendsim/metrics.hpp"

namespace lendsim {

struct RunResult {
  bool multi = false;
  RegretReport report;  // single-asset models
  std::vector<AssumptionReport> assumptions;
  std::vector<std::string> warnings;
  // multi-asset models
  double multi_revenue = 0.0;
  double multi_static_optimum = 0.0;
  double multi_regret = 0.0;
};

// Executes one scenario and (optionally) writes stream.csv, trajectory.csv,
// regret_report.json and assumptions.json under out_dir. Artifacts are a
// deterministic function of (config, seed); exact mode reruns the closed-form
// generators in rational arithmetic.
RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                       bool exact_mode = false, bool write_artifacts = true);

struct SweepResult {
  std::vector<long long> t_grid;
  std::vector<std::vector<double>> regrets;         // [t-index][repetition]
  std::vector<std::vector<double>> static_regrets;  // same shape
  std::vector<double> median_regret;
  std::vector<double> median_static_regret;
  ScalingFit fit;  // on median regret; valid when fit_ok
  bool fit_ok = false;
};

// Runs every (horizon, repetition) cell with its derived seed, aggregates
// medians per horizon, and fits the scaling basis when the grid allows.
SweepResult sweep_scenario(const ScenarioConfig& config, const std::vector<long long>& t_grid,
                           int repetitions, const std::filesystem::path& out_dir,
                           bool write_artifacts = true);

struct ReproduceRow {
  std::string quantity;
  double closed_form = 0.0;
  double simulated = 0.0;
  double abs_diff = 0.0;
};

struct ReproduceResult {
  std::vector<ReproduceRow> rows;
  bool pass = false;  // every exact quantity within 1e-9
};

// Compares simulated runs of the three worked demand sequences against their
// closed forms at horizon T (delta only applies to the third).
ReproduceResult reproduce_example(int example_id, long long horizon, double delta,
                                  bool exact_mode);

// One report per applicable assumption for this scenario: supply bounds,
// demand floor, increment tail, exposure tail, curator costs, price
// concentration, allocation floor, elasticity bound.
std::vector<AssumptionReport> validate_scenario(const ScenarioConfig& config);

void write_reports_json(const std::filesystem::path& path,
                        const std::vector<AssumptionReport>& reports);
void write_regret_report_json(const std::filesystem::path& path, const RegretReport& report,
                              const std::vector<std::string>& warnings);
void write_fit_json(const std::filesystem::path& path, const ScalingFit& fit);

double median(std::vector<double> values);

}  // namespace lendsim
