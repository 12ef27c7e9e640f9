#include "lendsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "lendsim/csv.hpp"
#include "lendsim/rng.hpp"

namespace lendsim {

using nlohmann::json;

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

json report_to_json(const AssumptionReport& rep) {
  json j;
  j["assumption"] = rep.assumption;
  j["status"] = rep.status;
  j["pass"] = rep.pass;
  j["sample_size"] = rep.sample_size;
  j["slack"] = rep.slack;
  j["thresholds"] = rep.thresholds;
  j["empirical"] = rep.empirical;
  j["bound"] = rep.bound;
  j["note"] = rep.note;
  return j;
}

AssumptionReport constructive_report(const std::string& name, bool ok, const std::string& note) {
  AssumptionReport rep;
  rep.assumption = name;
  rep.pass = ok;
  rep.status = ok ? "pass" : "fail";
  rep.note = note;
  return rep;
}

AssumptionReport na_report(const std::string& name, const std::string& note) {
  AssumptionReport rep;
  rep.assumption = name;
  rep.status = "not_applicable";
  rep.note = note;
  return rep;
}

// exact rerun of the closed-form generators; returns (revenue, benchmark)
struct ExactPair {
  Rational revenue;
  Rational benchmark;
  bool available = false;
};

ExactPair exact_rerun(const ScenarioConfig& config) {
  ExactPair out;
  const auto& d = config.demand;
  if (config.engine.rate != "fixed") return out;
  EventStream<Rational> stream;
  if (d.generator == "example1")
    stream = gen_example1<Rational>(d.horizon);
  else if (d.generator == "example2")
    stream = gen_example2<Rational>(d.horizon);
  else if (d.generator == "example3") {
    // delta is interpreted as a ratio of small integers when possible
    const long long den = 1000000;
    const long long num = static_cast<long long>(std::llround(d.delta * den));
    stream = gen_example3<Rational>(d.horizon, Rational(num, den));
  } else {
    return out;
  }
  const Rational kappa =
      Rational(static_cast<long long>(std::llround(config.market.kappa * 1000000)), 1000000);
  if (config.engine.model == "pooled") {
    const Rational supply = Rational(
        static_cast<long long>(std::llround(config.market.pooled_supply * 1000000)), 1000000);
    auto run = run_pooled_fixed<Rational>(stream, supply, kappa);
    out.revenue = run.total_revenue();
  } else {
    EngineConfig<Rational> engine;
    engine.kappa = kappa;
    engine.model = SupplyModel::curated;
    engine.curated_mode = config.engine.curated_mode == "game" ? CuratedMode::profit_game
                                                               : CuratedMode::supply_tracking;
    for (const auto& spec : config.market.curators) {
      CuratorProfile<Rational> prof;
      prof.capacity = Rational(static_cast<long long>(std::llround(spec.capacity * 1000000)),
                               1000000);
      prof.alpha =
          Rational(static_cast<long long>(std::llround(spec.alpha0 * 1000000)), 1000000);
      prof.cost.kind = spec.cost_kind;
      prof.cost.coeff = Rational(
          static_cast<long long>(std::llround(spec.cost_coeff * 1000000)), 1000000);
      engine.curators.push_back(prof);
    }
    engine.s_min = Rational(1, 1000000000);
    engine.s_max = Rational(static_cast<long long>(std::llround(config.market.s_max * 1000000)),
                            1000000);
    auto run = run_curated_fixed<Rational>(stream, engine);
    out.revenue = run.total_revenue();
  }
  out.benchmark = hindsight_fixed_optimal<Rational>(stream, kappa);
  out.available = true;
  return out;
}

}  // namespace

void write_reports_json(const std::filesystem::path& path,
                        const std::vector<AssumptionReport>& reports) {
  json j = json::array();
  for (const auto& r : reports) j.push_back(report_to_json(r));
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

void write_regret_report_json(const std::filesystem::path& path, const RegretReport& report,
                              const std::vector<std::string>& warnings) {
  json j;
  j["r_alg"] = report.r_alg;
  j["r_star"] = report.r_star;
  j["regret"] = report.regret;
  j["dynamic_regret"] = report.dynamic_regret;
  j["r_star_static"] = report.r_star_static;
  j["s_star_static"] = report.s_star_static;
  j["static_regret"] = report.static_regret;
  j["decomposition_residual"] = report.residual;
  j["path_length"] = report.path_length;
  j["competitive_ratio"] = report.competitive_ratio;
  j["rejected_loans"] = report.rejected_loans;
  j["open_loans_at_horizon"] = report.open_loans_at_horizon;
  j["warnings"] = warnings;
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

void write_fit_json(const std::filesystem::path& path, const ScalingFit& fit) {
  json j;
  j["horizons"] = fit.horizons;
  j["values"] = fit.values;
  j["basis"] = fit.basis_labels;
  j["coefficients"] = fit.coeffs;
  j["dominant"] = fit.dominant;
  j["residual_norm"] = fit.residual_norm;
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir,
                       bool exact_mode, bool write_artifacts) {
  RunResult result;
  if (write_artifacts) std::filesystem::create_directories(out_dir);

  if (config.is_multi()) {
    result.multi = true;
    const MultiEventStream stream = build_multi_stream(config);
    const auto& spec = *config.market.multi;
    MultiLearnerConfig learner = config.engine.multi_learner;
    const long long T = config.demand.horizon;
    const auto optimum = md_optimal_static(stream, spec.config, spec.curator_capacities.at(0),
                                           config.metrics.grid_resolution, T);
    MultiRunResult run;
    if (config.engine.model == "monopolist") {
      run = run_monopolist(stream, spec.config, spec.curator_capacities.at(0), learner, T,
                           &optimum.matrix);
    } else {
      std::vector<CuratorMatrixProfile> curators;
      for (const auto& caps : spec.curator_capacities) {
        CuratorMatrixProfile prof;
        prof.capacities = caps;
        prof.allocation = AllocationMatrix::uniform(spec.config.assets, spec.config.collaterals,
                                                    spec.config.min_mass);
        curators.push_back(prof);
      }
      run = run_curators_md(stream, spec.config, curators, learner, T, &optimum.matrix);
    }
    result.multi_revenue = run.total_revenue;
    result.multi_static_optimum = optimum.revenue;
    result.multi_regret = optimum.revenue - run.total_revenue;
    if (write_artifacts) {
      write_multi_stream_csv(out_dir / "stream.csv", stream, spec.config.collaterals);
      json j;
      j["revenue"] = run.total_revenue;
      j["static_optimum"] = optimum.revenue;
      j["regret"] = result.multi_regret;
      j["time_in_saturation"] = run.time_in_saturation;
      j["final_allocation"] = run.final_allocation.w;
      std::ofstream out(out_dir / "regret_report.json");
      out << j.dump(2) << '\n';
    }
    return result;
  }

  const EventStream<double> stream = build_stream(config, config.seed);
  EngineConfig<double> engine = build_engine(config);
  const long long T = config.demand.horizon;
  const RunTrajectory<double> run = run_market(stream, engine, T);
  result.warnings = run.warnings;

  result.report = build_regret_report(run, stream, config.market.kappa, engine.rate, T,
                                      config.metrics.benchmark_cap, config.market.s_min,
                                      config.market.s_max, config.metrics.static_benchmark);

  if (exact_mode) {
    const ExactPair exact = exact_rerun(config);
    if (exact.available) {
      result.report.r_alg = scalar_ops<Rational>::to_double(exact.revenue);
      result.report.r_star = scalar_ops<Rational>::to_double(exact.benchmark);
      result.report.regret = scalar_ops<Rational>::to_double(exact.benchmark - exact.revenue);
    } else {
      result.warnings.push_back("exact mode unavailable for this scenario; double result kept");
    }
  }

  if (write_artifacts) {
    write_stream_csv(out_dir / "stream.csv", stream);
    write_trajectory_csv(out_dir / "trajectory.csv", run);
    write_regret_report_json(out_dir / "regret_report.json", result.report, result.warnings);
    result.assumptions = validate_scenario(config);
    write_reports_json(out_dir / "assumptions.json", result.assumptions);
  }
  return result;
}

SweepResult sweep_scenario(const ScenarioConfig& config, const std::vector<long long>& t_grid,
                           int repetitions, const std::filesystem::path& out_dir,
                           bool write_artifacts) {
  if (t_grid.empty()) throw std::invalid_argument("empty horizon grid");
  if (repetitions < 1) throw std::invalid_argument("need at least one repetition");
  SweepResult sweep;
  sweep.t_grid = t_grid;
  sweep.regrets.resize(t_grid.size());
  sweep.static_regrets.resize(t_grid.size());

  if (write_artifacts) std::filesystem::create_directories(out_dir);
  std::ofstream cells;
  if (write_artifacts) {
    cells.open(out_dir / "sweep_cells.csv");
    cells << "horizon,repetition,seed,r_alg,r_star,regret,static_regret\n";
  }

  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    for (int rep = 0; rep < repetitions; ++rep) {
      ScenarioConfig cell = config;
      cell.demand.horizon = t_grid[i];
      cell.demand.stochastic.horizon = t_grid[i];
      cell.seed = derive_seed(config.seed, static_cast<std::uint64_t>(t_grid[i]),
                              static_cast<std::uint64_t>(rep));
      const RunResult r = run_scenario(cell, out_dir, false, false);
      const double reg = r.multi ? r.multi_regret : r.report.regret;
      const double sreg = r.multi ? r.multi_regret : r.report.static_regret;
      sweep.regrets[i].push_back(reg);
      sweep.static_regrets[i].push_back(sreg);
      if (write_artifacts)
        cells << t_grid[i] << ',' << rep << ',' << cell.seed << ','
              << format_double(r.multi ? r.multi_revenue : r.report.r_alg) << ','
              << format_double(r.multi ? r.multi_static_optimum : r.report.r_star) << ','
              << format_double(reg) << ',' << format_double(sreg) << '\n';
    }
    sweep.median_regret.push_back(median(sweep.regrets[i]));
    sweep.median_static_regret.push_back(median(sweep.static_regrets[i]));
  }

  std::vector<double> horizons(t_grid.begin(), t_grid.end());
  try {
    sweep.fit = fit_scaling(horizons, sweep.median_regret);
    sweep.fit_ok = true;
  } catch (const std::invalid_argument&) {
    sweep.fit_ok = false;
  }
  if (write_artifacts) {
    std::ofstream med(out_dir / "sweep_medians.csv");
    med << "horizon,median_regret,median_static_regret\n";
    for (std::size_t i = 0; i < t_grid.size(); ++i)
      med << t_grid[i] << ',' << format_double(sweep.median_regret[i]) << ','
          << format_double(sweep.median_static_regret[i]) << '\n';
    if (sweep.fit_ok) write_fit_json(out_dir / "scaling_fit.json", sweep.fit);
  }
  return sweep;
}

ReproduceResult reproduce_example(int example_id, long long horizon, double delta,
                                  bool exact_mode) {
  if (example_id < 1 || example_id > 3) throw std::invalid_argument("example id must be 1..3");
  ReproduceResult out;
  const double T = static_cast<double>(horizon);

  auto add = [&](const std::string& q, double closed, double simulated) {
    out.rows.push_back({q, closed, simulated, std::fabs(simulated - closed)});
  };

  if (exact_mode) {
    // rational arithmetic end to end; diffs are exact zeros when formulas hold
    if (example_id == 1) {
      auto stream = gen_example1<Rational>(horizon);
      auto pooled = run_pooled_fixed<Rational>(stream, Rational(1), Rational(1));
      const Rational bench = hindsight_fixed_optimal<Rational>(stream, Rational(1));
      const Rational closed_pool = Rational(horizon, 2) + Rational(1, 2);
      add("benchmark", static_cast<double>(horizon),
          scalar_ops<Rational>::to_double(bench));
      out.rows.back().abs_diff =
          scalar_ops<Rational>::to_double(scalar_ops<Rational>::abs(bench - Rational(horizon)));
      add("pooled_revenue", scalar_ops<Rational>::to_double(closed_pool),
          scalar_ops<Rational>::to_double(pooled.total_revenue()));
      out.rows.back().abs_diff = scalar_ops<Rational>::to_double(
          scalar_ops<Rational>::abs(pooled.total_revenue() - closed_pool));
      add("pooled_regret", scalar_ops<Rational>::to_double(bench - closed_pool),
          scalar_ops<Rational>::to_double(bench - pooled.total_revenue()));
      out.rows.back().abs_diff = scalar_ops<Rational>::to_double(scalar_ops<Rational>::abs(
          (bench - pooled.total_revenue()) - (bench - closed_pool)));
    } else if (example_id == 2) {
      auto stream = gen_example2<Rational>(horizon);
      auto pooled = run_pooled_fixed<Rational>(stream, Rational(1), Rational(1));
      const Rational bench = hindsight_fixed_optimal<Rational>(stream, Rational(1));
      const Rational closed_pool = Rational(horizon * (horizon + 1), 1) /
                                   (Rational(2) * Rational(horizon) * Rational(horizon) *
                                    Rational(horizon));
      add("benchmark", 1.0, scalar_ops<Rational>::to_double(bench));
      out.rows.back().abs_diff =
          scalar_ops<Rational>::to_double(scalar_ops<Rational>::abs(bench - Rational(1)));
      add("pooled_revenue", scalar_ops<Rational>::to_double(closed_pool),
          scalar_ops<Rational>::to_double(pooled.total_revenue()));
      out.rows.back().abs_diff = scalar_ops<Rational>::to_double(
          scalar_ops<Rational>::abs(pooled.total_revenue() - closed_pool));
    } else {
      const Rational rdelta(static_cast<long long>(std::llround(delta * 1000000)), 1000000);
      auto stream = gen_example3<Rational>(horizon, rdelta);
      auto pooled = run_pooled_fixed<Rational>(stream, Rational(1), Rational(1));
      const Rational bench = hindsight_fixed_optimal<Rational>(stream, Rational(1));
      const Rational closed_bench =
          Rational(horizon) * Rational(horizon) * rdelta +
          Rational(horizon) * (Rational(1) - Rational(2) * rdelta);
      const Rational one_minus = Rational(1) - rdelta;
      Rational closed_engine = Rational(horizon) * (one_minus * one_minus + rdelta);
      if (one_minus * one_minus + rdelta > Rational(1))
        closed_engine = Rational(horizon);
      add("benchmark", scalar_ops<Rational>::to_double(closed_bench),
          scalar_ops<Rational>::to_double(bench));
      out.rows.back().abs_diff =
          scalar_ops<Rational>::to_double(scalar_ops<Rational>::abs(bench - closed_bench));
      add("pooled_revenue", scalar_ops<Rational>::to_double(closed_engine),
          scalar_ops<Rational>::to_double(pooled.total_revenue()));
      out.rows.back().abs_diff = scalar_ops<Rational>::to_double(
          scalar_ops<Rational>::abs(pooled.total_revenue() - closed_engine));
    }
  } else {
    if (example_id == 1) {
      auto stream = gen_example1<double>(horizon);
      auto pooled = run_pooled_fixed<double>(stream, 1.0, 1.0);
      const double bench = hindsight_fixed_optimal<double>(stream, 1.0);
      add("benchmark", T, bench);
      add("pooled_revenue", T / 2 + 0.5, pooled.total_revenue());
      add("pooled_regret", T - (T / 2 + 0.5), bench - pooled.total_revenue());
      add("pooled_competitive_ratio", (T / 2 + 0.5) / T,
          competitive_ratio(pooled.total_revenue(), bench));
    } else if (example_id == 2) {
      auto stream = gen_example2<double>(horizon);
      auto pooled = run_pooled_fixed<double>(stream, 1.0, 1.0);
      const double bench = hindsight_fixed_optimal<double>(stream, 1.0);
      add("benchmark", 1.0, bench);
      add("pooled_revenue", (T + 1.0) / (2.0 * T * T), pooled.total_revenue());
      add("pooled_competitive_ratio", (T + 1.0) / (2.0 * T * T),
          competitive_ratio(pooled.total_revenue(), bench));
    } else {
      auto stream = gen_example3<double>(horizon, delta);
      auto pooled = run_pooled_fixed<double>(stream, 1.0, 1.0);
      const double bench = hindsight_fixed_optimal<double>(stream, 1.0);
      const double closed_engine = T * std::min((1 - delta) * (1 - delta) + delta, 1.0);
      add("benchmark", T * T * delta + T * (1 - 2 * delta), bench);
      add("pooled_revenue", closed_engine, pooled.total_revenue());

      EngineConfig<double> curated;
      curated.kappa = 1.0;
      curated.model = SupplyModel::curated;
      curated.curated_mode = CuratedMode::supply_tracking;
      CuratorProfile<double> prof;
      prof.capacity = 1.0;
      prof.alpha = 1.0;
      curated.curators.push_back(prof);
      curated.s_max = 1.0;
      auto cur = run_curated_fixed<double>(stream, curated);
      add("curated_revenue", closed_engine, cur.total_revenue());
    }
  }

  out.pass = true;
  for (const auto& row : out.rows)
    if (!(row.abs_diff <= 1e-9)) out.pass = false;
  return out;
}

std::vector<AssumptionReport> validate_scenario(const ScenarioConfig& config) {
  std::vector<AssumptionReport> reports;

  if (config.is_multi()) {
    const auto& spec = *config.market.multi;
    reports.push_back(na_report("bounded-increment", "multi-asset scenario"));
    reports.push_back(na_report("reset-condition", "multi-asset scenario"));
    const bool mass_ok = spec.config.min_mass > 0.0 &&
                         spec.config.min_mass * static_cast<double>(spec.config.collaterals) < 1.0;
    reports.push_back(constructive_report(
        "minimum-allocation", mass_ok,
        "a = " + std::to_string(spec.config.min_mass) + ", C = " +
            std::to_string(spec.config.collaterals)));
    bool elastic_ok = true;
    double kmax = 0.0;
    for (double k : spec.config.kappa) kmax = std::max(kmax, k);
    if (spec.config.kappa_max > 0.0 && kmax > spec.config.kappa_max) elastic_ok = false;
    reports.push_back(constructive_report("maximum-elasticity", elastic_ok,
                                          "max kappa = " + std::to_string(kmax)));
    return reports;
  }

  const EventStream<double> stream = build_stream(config, config.seed);
  const auto& sp = config.demand.stochastic;

  // compact supply: engine-posted supply is clamped inside these bounds by
  // construction; check that the configuration leaves the clamp room
  const bool supply_ok = config.market.s_min > 0.0 && config.market.s_min <= config.market.s_max;
  reports.push_back(constructive_report(
      "compact-supply", supply_ok,
      "bounds [" + std::to_string(config.market.s_min) + ", " +
          std::to_string(config.market.s_max) + "] enforced by the engine clamp"));

  // minimum demand, after the warm-up prefix
  {
    AssumptionReport rep;
    rep.assumption = "minimum-demand";
    if (config.demand.generator == "stochastic") {
      std::map<long long, double> expiry;
      double demand = 0.0;
      double min_demand = std::numeric_limits<double>::infinity();
      const long long warmup = sp.warmup_steps();
      for (const auto& e : stream) {
        if (!e.is_arrival()) continue;
        for (auto it = expiry.begin(); it != expiry.end() && it->first <= e.t;) {
          demand -= it->second;
          it = expiry.erase(it);
        }
        demand += e.size;
        if (e.duration > 0) expiry[e.t + e.duration] += e.size;
        if (e.t > warmup) min_demand = std::min(min_demand, demand);
      }
      rep.pass = min_demand >= sp.min_demand - 1e-12;
      rep.status = rep.pass ? "pass" : "fail";
      rep.note = "min D(t) after warm-up = " + std::to_string(min_demand) +
                 ", floor = " + std::to_string(sp.min_demand);
      rep.sample_size = static_cast<long long>(stream.size());
    } else {
      rep.status = "not_applicable";
      rep.note = "no demand floor configured for closed-form streams";
    }
    reports.push_back(rep);
  }

  if (static_cast<long long>(stream.size()) >= 100) {
    reports.push_back(
        check_bounded_increment(stream, sp.increment_scale, sp.tail_rate));
  } else {
    reports.push_back(na_report("bounded-increment", "stream shorter than 100 events"));
  }
  reports.push_back(check_reset_condition(stream, sp.s_total, sp.reset_epsilon));

  // curator-cost conditions
  if (config.engine.model == "curated" && config.engine.curated_mode == "game") {
    AssumptionReport rep;
    rep.assumption = "curator-costs";
    bool ok = true;
    std::string note;
    try {
      EngineConfig<double> engine = build_engine(config);
      for (const auto& c : engine.curators) c.validate();
      const std::size_t low = count_low_cost(engine.curators, engine.game.c_star);
      const double need =
          config.engine.game.p_low_cost * static_cast<double>(engine.curators.size());
      if (static_cast<double>(low) + 1e-12 < need) {
        ok = false;
        note = "only " + std::to_string(low) + " low-cost curators, need >= " +
               std::to_string(need);
      } else {
        note = std::to_string(low) + " low-cost curators of " +
               std::to_string(engine.curators.size());
      }
      // the revenue-floor condition is checked on the realized run
      const RunTrajectory<double> run = run_market(stream, engine, config.demand.horizon);
      for (const auto& w : run.warnings)
        if (w.find("minimum-protocol-revenue") != std::string::npos) {
          ok = false;
          note += "; " + w;
        }
    } catch (const std::exception& e) {
      ok = false;
      note = e.what();
    }
    rep.pass = ok;
    rep.status = ok ? "pass" : "fail";
    rep.note = note;
    reports.push_back(rep);
  } else {
    reports.push_back(na_report("curator-costs", "no curator game in this scenario"));
  }

  // price concentration only applies to realized variable-rate paths
  if (config.engine.rate == "variable") {
    EngineConfig<double> engine = build_engine(config);
    const RunTrajectory<double> run = run_market(stream, engine, config.demand.horizon);
    std::vector<PricedLoan> loans;
    for (const auto& a : run.arrivals)
      if (a.accepted) loans.push_back({a.t, a.duration});
    reports.push_back(check_variable_rate_concentration(
        std::vector<double>(run.prices.begin(), run.prices.end()), loans));
  } else {
    reports.push_back(na_report("variable-rate-concentration", "fixed-rate scenario"));
  }

  reports.push_back(na_report("minimum-allocation", "single-asset scenario"));
  reports.push_back(na_report("maximum-elasticity", "single-asset scenario"));
  return reports;
}

}  // namespace lendsim
