#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lendsim/curator_game.hpp"
#include "lendsim/demand_gen.hpp"
#include "lendsim/market.hpp"
#include "lendsim/multi_asset.hpp"
#include "lendsim/pricing.hpp"

namespace lendsim {

// Invalid configuration; `issues` lists one message per offending field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues)
      : std::runtime_error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "configuration errors:";
    for (const auto& e : v) s += "\n  " + e;
    return s;
  }
  std::vector<std::string> issues_;
};

struct DemandSpec {
  std::string generator = "example1";  // example1|example2|example3|stochastic|csv|multi_cyclic
  long long horizon = 100;
  double delta = 0.1;
  std::string path;  // generator == csv
  StochasticDemandParams stochastic;
  // multi_cyclic: this arrival pattern repeats, each entry one step apart,
  // expiries interleaved by the duration
  MultiEventStream pattern;
};

struct CuratorSpec {
  double capacity = 1.0;
  double alpha0 = 1.0;
  CostKind cost_kind = CostKind::quadratic;
  double cost_coeff = 0.0;
};

struct MultiMarketSpec {
  MultiMarketConfig config;
  std::vector<std::vector<double>> curator_capacities;  // one entry per curator
};

struct MarketSpec {
  double kappa = 1.0;
  double s_min = 1e-9;
  double s_max = 1.0;
  double pooled_supply = 1.0;
  std::vector<CuratorSpec> curators;
  std::optional<MultiMarketSpec> multi;
};

struct GameSpec {
  double alpha_min = 1e-3;
  double eta_cap = 1.0;
  double mu_floor = 0.05;
  double revenue_floor = 0.0;
  double c_star = 0.0;
  double p_low_cost = 0.0;
  CostConvention convention = CostConvention::deployed;
};

struct EngineSpec {
  std::string model = "pooled";  // pooled|curated|monopolist|curators_md
  std::string rate = "fixed";    // fixed|variable
  std::string curated_mode = "tracking";  // tracking|game
  double tracking_step = 1.0;
  GameSpec game;
  MultiLearnerConfig multi_learner;
};

struct MetricsSpec {
  std::optional<double> benchmark_cap;
  bool static_benchmark = true;
  double grid_resolution = 0.05;  // multi-asset static optimum
};

struct ScenarioConfig {
  int version = 1;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  DemandSpec demand;
  MarketSpec market;
  EngineSpec engine;
  MetricsSpec metrics;

  bool is_multi() const { return engine.model == "monopolist" || engine.model == "curators_md"; }
};

// Parses and validates the versioned JSON scenario schema; throws ConfigError
// listing every violation with its field path.
ScenarioConfig parse_config_text(const std::string& json_text);
ScenarioConfig load_config(const std::string& path);

// Materializes the demand stream (deterministic in config + seed).
EventStream<double> build_stream(const ScenarioConfig& config, std::uint64_t seed);
MultiEventStream build_multi_stream(const ScenarioConfig& config);

// Engine configuration for the single-asset models.
EngineConfig<double> build_engine(const ScenarioConfig& config);

}  // namespace lendsim
