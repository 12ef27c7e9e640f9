#include "lendsim/config.hpp"

#include <fstream>
#include <json.hpp>

#include "lendsim/csv.hpp"

namespace lendsim {

namespace {

using nlohmann::json;

class Parser {
 public:
  explicit Parser(const json& root) : root_(root) {}

  std::vector<std::string> issues;

  template <typename T>
  T get(const json& node, const std::string& path, const std::string& key, T fallback) {
    if (!node.contains(key)) return fallback;
    try {
      return node.at(key).get<T>();
    } catch (const json::exception&) {
      issues.push_back(path + key + ": wrong type");
      return fallback;
    }
  }

  void require(bool ok, const std::string& message) {
    if (!ok) issues.push_back(message);
  }

  const json& root_;
};

}  // namespace

ScenarioConfig parse_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError({std::string("not valid JSON: ") + e.what()});
  }
  Parser p(root);
  ScenarioConfig cfg;

  cfg.version = p.get<int>(root, "", "version", 0);
  p.require(cfg.version == 1, "version: must be 1");
  cfg.seed = p.get<std::uint64_t>(root, "", "seed", 1);
  cfg.output_dir = p.get<std::string>(root, "", "output_dir", "out");

  if (root.contains("demand")) {
    const json& d = root["demand"];
    cfg.demand.generator = p.get<std::string>(d, "demand.", "generator", "example1");
    cfg.demand.horizon = p.get<long long>(d, "demand.", "horizon", 100);
    cfg.demand.delta = p.get<double>(d, "demand.", "delta", 0.1);
    cfg.demand.path = p.get<std::string>(d, "demand.", "path", "");
    const bool known = cfg.demand.generator == "example1" || cfg.demand.generator == "example2" ||
                       cfg.demand.generator == "example3" ||
                       cfg.demand.generator == "stochastic" || cfg.demand.generator == "csv" ||
                       cfg.demand.generator == "multi_cyclic";
    p.require(known, "demand.generator: unknown generator '" + cfg.demand.generator + "'");
    p.require(cfg.demand.horizon >= 1, "demand.horizon: must be >= 1");
    if (cfg.demand.generator == "example3")
      p.require(cfg.demand.delta > 0.0 && cfg.demand.delta < 1.0,
                "demand.delta: must lie in (0, 1)");
    if (cfg.demand.generator == "csv")
      p.require(!cfg.demand.path.empty(), "demand.path: required for csv streams");
    if (d.contains("stochastic")) {
      const json& s = d["stochastic"];
      auto& sp = cfg.demand.stochastic;
      sp.increment_scale = p.get<double>(s, "demand.stochastic.", "increment_scale", 0.01);
      sp.tail_rate = p.get<double>(s, "demand.stochastic.", "tail_rate", 200.0);
      sp.duration_mean = p.get<double>(s, "demand.stochastic.", "duration_mean", 16.0);
      sp.reset_epsilon = p.get<double>(s, "demand.stochastic.", "reset_epsilon", 0.5);
      sp.min_demand = p.get<double>(s, "demand.stochastic.", "min_demand", 0.05);
      sp.s_total = p.get<double>(s, "demand.stochastic.", "s_total", 1.0);
      sp.size_lo = p.get<double>(s, "demand.stochastic.", "size_lo", 0.005);
      sp.size_hi = p.get<double>(s, "demand.stochastic.", "size_hi", 0.05);
      sp.demand_cap = p.get<double>(s, "demand.stochastic.", "demand_cap", 0.8);
      sp.horizon = cfg.demand.horizon;
      try {
        sp.validate();
      } catch (const std::exception& e) {
        p.issues.push_back(std::string("demand.stochastic: ") + e.what());
      }
    } else {
      cfg.demand.stochastic.horizon = cfg.demand.horizon;
    }
    if (d.contains("pattern")) {
      for (std::size_t i = 0; i < d["pattern"].size(); ++i) {
        const json& ev = d["pattern"][i];
        const std::string path = "demand.pattern[" + std::to_string(i) + "].";
        MultiLoanEvent e;
        e.asset = p.get<long long>(ev, path, "asset", 0);
        e.duration = p.get<long long>(ev, path, "duration", 1);
        if (ev.contains("sizes")) {
          try {
            e.sizes = ev["sizes"].get<std::vector<double>>();
          } catch (const json::exception&) {
            p.issues.push_back(path + "sizes: wrong type");
          }
        } else {
          p.issues.push_back(path + "sizes: required");
        }
        cfg.demand.pattern.push_back(e);
      }
    }
  }

  if (root.contains("market")) {
    const json& m = root["market"];
    cfg.market.kappa = p.get<double>(m, "market.", "kappa", 1.0);
    p.require(cfg.market.kappa > 0.0, "market.kappa: must be > 0");
    cfg.market.pooled_supply = p.get<double>(m, "market.", "pooled_supply", 1.0);
    p.require(cfg.market.pooled_supply > 0.0, "market.pooled_supply: must be > 0");
    if (m.contains("supply_bounds")) {
      try {
        auto b = m["supply_bounds"].get<std::vector<double>>();
        if (b.size() != 2) {
          p.issues.push_back("market.supply_bounds: must be [s_min, s_max]");
        } else {
          cfg.market.s_min = b[0];
          cfg.market.s_max = b[1];
        }
      } catch (const json::exception&) {
        p.issues.push_back("market.supply_bounds: wrong type");
      }
    }
    p.require(cfg.market.s_min > 0.0 && cfg.market.s_min <= cfg.market.s_max,
              "market.supply_bounds: need 0 < s_min <= s_max");
    if (m.contains("curators")) {
      for (std::size_t i = 0; i < m["curators"].size(); ++i) {
        const json& c = m["curators"][i];
        const std::string path = "market.curators[" + std::to_string(i) + "].";
        CuratorSpec spec;
        spec.capacity = p.get<double>(c, path, "capacity", 1.0);
        spec.alpha0 = p.get<double>(c, path, "alpha0", 1.0);
        p.require(spec.capacity > 0.0, path + "capacity: must be > 0");
        p.require(spec.alpha0 > 0.0 && spec.alpha0 <= 1.0, path + "alpha0: must lie in (0, 1]");
        if (c.contains("cost")) {
          const json& cost = c["cost"];
          const std::string kind = p.get<std::string>(cost, path + "cost.", "kind", "quadratic");
          if (kind == "quadratic")
            spec.cost_kind = CostKind::quadratic;
          else if (kind == "linear")
            spec.cost_kind = CostKind::linear;
          else
            p.issues.push_back(path + "cost.kind: unknown kind '" + kind + "'");
          spec.cost_coeff = p.get<double>(cost, path + "cost.", "coeff", 0.0);
          p.require(spec.cost_coeff >= 0.0, path + "cost.coeff: must be >= 0");
        }
        cfg.market.curators.push_back(spec);
      }
    }
    if (m.contains("multi")) {
      const json& mm = m["multi"];
      MultiMarketSpec spec;
      spec.config.assets = p.get<long long>(mm, "market.multi.", "assets", 1);
      spec.config.collaterals = p.get<long long>(mm, "market.multi.", "collaterals", 1);
      spec.config.kappa_max = p.get<double>(mm, "market.multi.", "kappa_max", 0.0);
      spec.config.min_mass = p.get<double>(mm, "market.multi.", "min_mass", 0.05);
      spec.config.min_demand = p.get<double>(mm, "market.multi.", "min_demand", 0.0);
      if (mm.contains("kappa")) {
        try {
          auto rows = mm["kappa"].get<std::vector<std::vector<double>>>();
          for (const auto& r : rows)
            spec.config.kappa.insert(spec.config.kappa.end(), r.begin(), r.end());
        } catch (const json::exception&) {
          p.issues.push_back("market.multi.kappa: wrong type");
        }
      }
      p.require(spec.config.min_mass > 0.0, "market.multi.min_mass: must be > 0");
      p.require(spec.config.min_mass * static_cast<double>(spec.config.collaterals) < 1.0,
                "market.multi.min_mass: min_mass * collaterals must be < 1");
      if (mm.contains("curators")) {
        for (std::size_t i = 0; i < mm["curators"].size(); ++i) {
          const json& c = mm["curators"][i];
          const std::string path = "market.multi.curators[" + std::to_string(i) + "].";
          std::vector<double> caps;
          if (c.contains("capacities")) {
            try {
              caps = c["capacities"].get<std::vector<double>>();
            } catch (const json::exception&) {
              p.issues.push_back(path + "capacities: wrong type");
            }
          } else {
            p.issues.push_back(path + "capacities: required");
          }
          spec.curator_capacities.push_back(caps);
        }
      }
      try {
        spec.config.validate();
      } catch (const std::exception& e) {
        p.issues.push_back(std::string("market.multi: ") + e.what());
      }
      cfg.market.multi = std::move(spec);
    }
  }

  if (root.contains("engine")) {
    const json& e = root["engine"];
    cfg.engine.model = p.get<std::string>(e, "engine.", "model", "pooled");
    cfg.engine.rate = p.get<std::string>(e, "engine.", "rate", "fixed");
    cfg.engine.curated_mode = p.get<std::string>(e, "engine.", "curated_mode", "tracking");
    cfg.engine.tracking_step = p.get<double>(e, "engine.", "tracking_step", 1.0);
    p.require(cfg.engine.model == "pooled" || cfg.engine.model == "curated" ||
                  cfg.engine.model == "monopolist" || cfg.engine.model == "curators_md",
              "engine.model: unknown model '" + cfg.engine.model + "'");
    p.require(cfg.engine.rate == "fixed" || cfg.engine.rate == "variable",
              "engine.rate: must be fixed or variable");
    p.require(cfg.engine.curated_mode == "tracking" || cfg.engine.curated_mode == "game",
              "engine.curated_mode: must be tracking or game");
    p.require(cfg.engine.tracking_step > 0.0 && cfg.engine.tracking_step <= 1.0,
              "engine.tracking_step: must lie in (0, 1]");
    if (e.contains("game")) {
      const json& g = e["game"];
      cfg.engine.game.alpha_min = p.get<double>(g, "engine.game.", "alpha_min", 1e-3);
      cfg.engine.game.eta_cap = p.get<double>(g, "engine.game.", "eta_cap", 1.0);
      cfg.engine.game.mu_floor = p.get<double>(g, "engine.game.", "mu_floor", 0.05);
      cfg.engine.game.revenue_floor = p.get<double>(g, "engine.game.", "revenue_floor", 0.0);
      cfg.engine.game.c_star = p.get<double>(g, "engine.game.", "c_star", 0.0);
      cfg.engine.game.p_low_cost = p.get<double>(g, "engine.game.", "p_low_cost", 0.0);
      const std::string conv =
          p.get<std::string>(g, "engine.game.", "cost_convention", "deployed");
      if (conv == "deployed")
        cfg.engine.game.convention = CostConvention::deployed;
      else if (conv == "idle")
        cfg.engine.game.convention = CostConvention::idle;
      else
        p.issues.push_back("engine.game.cost_convention: must be deployed or idle");
      p.require(cfg.engine.game.alpha_min > 0.0 && cfg.engine.game.alpha_min < 1.0,
                "engine.game.alpha_min: must lie in (0, 1)");
    }
    if (e.contains("learner")) {
      const json& l = e["learner"];
      const std::string kind = p.get<std::string>(l, "engine.learner.", "kind", "inverse_t");
      if (kind == "inverse_t")
        cfg.engine.multi_learner.schedule.kind = StepKind::inverse_t_strongly_convex;
      else if (kind == "inverse_sqrt_t")
        cfg.engine.multi_learner.schedule.kind = StepKind::inverse_sqrt_t;
      else
        p.issues.push_back("engine.learner.kind: must be inverse_t or inverse_sqrt_t");
      cfg.engine.multi_learner.schedule.scale =
          p.get<double>(l, "engine.learner.", "scale", 1.0);
      cfg.engine.multi_learner.barrier_weight =
          p.get<double>(l, "engine.learner.", "barrier_weight", 0.0);
      p.require(cfg.engine.multi_learner.schedule.scale > 0.0,
                "engine.learner.scale: must be > 0");
    }
  }

  if (root.contains("metrics")) {
    const json& m = root["metrics"];
    if (m.contains("benchmark_cap") && !m["benchmark_cap"].is_null())
      cfg.metrics.benchmark_cap = p.get<double>(m, "metrics.", "benchmark_cap", 0.0);
    cfg.metrics.static_benchmark = p.get<bool>(m, "metrics.", "static_benchmark", true);
    cfg.metrics.grid_resolution = p.get<double>(m, "metrics.", "grid_resolution", 0.05);
  }

  // cross-field checks
  if (cfg.engine.model == "curated")
    p.require(!cfg.market.curators.empty(),
              "market.curators: required when engine.model is curated");
  if (cfg.is_multi()) {
    p.require(cfg.market.multi.has_value(),
              "market.multi: required for multi-asset engine models");
    p.require(cfg.demand.generator == "multi_cyclic",
              "demand.generator: multi-asset engines need the multi_cyclic generator");
    p.require(!cfg.demand.pattern.empty(), "demand.pattern: required for multi_cyclic");
  }

  if (!p.issues.empty()) throw ConfigError(p.issues);
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"config file not readable: " + path});
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config_text(text);
}

EventStream<double> build_stream(const ScenarioConfig& config, std::uint64_t seed) {
  const auto& d = config.demand;
  if (d.generator == "example1") return gen_example1<double>(d.horizon);
  if (d.generator == "example2") return gen_example2<double>(d.horizon);
  if (d.generator == "example3") return gen_example3<double>(d.horizon, d.delta);
  if (d.generator == "stochastic") {
    StochasticDemandParams params = d.stochastic;
    params.horizon = d.horizon;
    return gen_stochastic(params, seed);
  }
  if (d.generator == "csv") return read_stream_csv(d.path);
  throw ConfigError({"demand.generator: not a single-asset generator"});
}

MultiEventStream build_multi_stream(const ScenarioConfig& config) {
  const auto& d = config.demand;
  if (d.generator != "multi_cyclic")
    throw ConfigError({"demand.generator: not a multi-asset generator"});
  // the pattern repeats with one step per entry; each arrival's expiry is the
  // mirrored departure at t + duration, so patterns must keep slots disjoint
  MultiEventStream out;
  const long long period = static_cast<long long>(d.pattern.size());
  if (period == 0) throw ConfigError({"demand.pattern: empty"});
  for (long long t = 1; t <= d.horizon; ++t) {
    const auto& proto = d.pattern[(t - 1) % period];
    MultiLoanEvent e = proto;
    e.t = t;
    if (e.duration == 0) continue;  // slot reserved for expiries
    out.push_back(e);
  }
  return out;
}

EngineConfig<double> build_engine(const ScenarioConfig& config) {
  EngineConfig<double> engine;
  engine.kappa = config.market.kappa;
  engine.rate =
      config.engine.rate == "fixed" ? RateMode::fixed_interest : RateMode::variable_interest;
  engine.s_min = config.market.s_min;
  engine.s_max = config.market.s_max;
  engine.pooled_supply = config.market.pooled_supply;
  if (config.engine.model == "curated") {
    engine.model = SupplyModel::curated;
    engine.curated_mode = config.engine.curated_mode == "tracking" ? CuratedMode::supply_tracking
                                                                   : CuratedMode::profit_game;
    for (const auto& spec : config.market.curators) {
      CuratorProfile<double> prof;
      prof.capacity = spec.capacity;
      prof.alpha = spec.alpha0;
      prof.cost.kind = spec.cost_kind;
      prof.cost.coeff = spec.cost_coeff;
      engine.curators.push_back(prof);
    }
    engine.tracking.step = config.engine.tracking_step;
    engine.game.options.alpha_min = config.engine.game.alpha_min;
    engine.game.options.eta_cap = config.engine.game.eta_cap;
    engine.game.options.mu_floor = config.engine.game.mu_floor;
    engine.game.options.convention = config.engine.game.convention;
    engine.game.revenue_floor = config.engine.game.revenue_floor;
    engine.game.c_star = config.engine.game.c_star;
    engine.game.p_low_cost = config.engine.game.p_low_cost;
  } else {
    engine.model = SupplyModel::pooled;
  }
  return engine;
}

}  // namespace lendsim
