#include "lendsim/multi_asset.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>

#include "lendsim/numeric.hpp"

namespace lendsim {

AllocationMatrix AllocationMatrix::uniform(long long assets, long long collaterals,
                                           double min_mass) {
  AllocationMatrix m;
  m.assets = assets;
  m.collaterals = collaterals;
  m.min_mass = min_mass;
  m.w.assign(assets * collaterals, 1.0 / static_cast<double>(collaterals));
  m.validate();
  return m;
}

void AllocationMatrix::validate() const {
  if (assets < 1 || collaterals < 1) throw std::invalid_argument("empty allocation matrix");
  if (!(min_mass > 0.0) || min_mass * static_cast<double>(collaterals) >= 1.0)
    throw std::invalid_argument("minimum allocation mass must satisfy 0 < a and a*C < 1");
  if (static_cast<long long>(w.size()) != assets * collaterals)
    throw std::invalid_argument("allocation matrix shape mismatch");
  for (long long b = 0; b < assets; ++b) {
    double row = 0.0;
    for (long long c = 0; c < collaterals; ++c) {
      const double v = at(b, c);
      if (v + 1e-12 < min_mass)
        throw std::invalid_argument("allocation entry below the minimum mass in row " +
                                    std::to_string(b));
      row += v;
    }
    if (std::fabs(row - 1.0) > 1e-9)
      throw std::invalid_argument("allocation row " + std::to_string(b) +
                                  " does not sum to 1");
  }
}

void validate_multi_stream(const MultiEventStream& events, long long assets,
                           long long collaterals) {
  long long prev_t = 0;
  for (const auto& e : events) {
    if (e.t < 1) throw std::invalid_argument("event time index must be >= 1");
    if (e.t <= prev_t) throw std::invalid_argument("duplicate or out-of-order time index");
    prev_t = e.t;
    if (e.asset < 0 || e.asset >= assets) throw std::invalid_argument("asset index out of range");
    if (static_cast<long long>(e.sizes.size()) != collaterals)
      throw std::invalid_argument("per-collateral size vector has wrong length");
    if (e.duration < 0) throw std::invalid_argument("duration must be >= 0");
    double total = 0.0;
    for (double v : e.sizes) {
      if (v < 0.0) throw std::invalid_argument("per-collateral sizes must be >= 0");
      total += v;
    }
    if (!e.departure && total == 0.0)
      throw std::invalid_argument("arrival with zero borrowed amount");
  }
}

void MultiMarketConfig::validate() const {
  if (assets < 1 || collaterals < 1) throw std::invalid_argument("need B >= 1 and C >= 1");
  if (static_cast<long long>(kappa.size()) != assets * collaterals)
    throw std::invalid_argument("elasticity grid shape mismatch");
  for (double k : kappa) {
    if (k < 0.0) throw std::invalid_argument("elasticities must be >= 0");
    if (kappa_max > 0.0 && k > kappa_max)
      throw std::invalid_argument("elasticity exceeds the configured uniform bound");
  }
  if (!(min_mass > 0.0) || min_mass * static_cast<double>(collaterals) >= 1.0)
    throw std::invalid_argument("minimum allocation mass must satisfy 0 < a and a*C < 1");
}

std::vector<double> md_supply(const std::vector<CuratorMatrixProfile>& curators,
                              const MultiMarketConfig& config) {
  if (curators.empty()) throw std::invalid_argument("curator list must be nonempty");
  std::vector<double> grid(config.assets * config.collaterals, 0.0);
  for (const auto& cur : curators) {
    if (static_cast<long long>(cur.capacities.size()) != config.assets)
      throw std::invalid_argument("capacity vector has wrong length");
    cur.allocation.validate();
    if (cur.allocation.assets != config.assets ||
        cur.allocation.collaterals != config.collaterals)
      throw std::invalid_argument("allocation matrix shape mismatch");
    for (long long b = 0; b < config.assets; ++b) {
      if (!(cur.capacities[b] > 0.0)) throw std::invalid_argument("capacities must be > 0");
      for (long long c = 0; c < config.collaterals; ++c)
        grid[b * config.collaterals + c] += cur.capacities[b] * cur.allocation.at(b, c);
    }
  }
  return grid;
}

MultiDemandEngine::MultiDemandEngine(const MultiEventStream& stream,
                                     const MultiMarketConfig& config, long long horizon)
    : config_(config), horizon_(horizon) {
  validate_multi_stream(stream, config.assets, config.collaterals);
  timeline_.assign(horizon + 2, {});
  demand_.assign(config.assets * config.collaterals, 0.0);
  for (const auto& e : stream) {
    if (e.t > horizon || e.departure) continue;  // departures re-derive from expiries
    std::vector<double> delta(e.sizes);
    timeline_[e.t].push_back({e.asset, delta});
    if (e.duration > 0 && e.t + e.duration <= horizon) {
      std::vector<double> neg(e.sizes);
      for (double& v : neg) v = -v;
      timeline_[e.t + e.duration].push_back({e.asset, neg});
    }
  }
}

const std::vector<double>& MultiDemandEngine::advance() {
  ++t_;
  if (t_ > horizon_ + 1) throw std::logic_error("advanced past the horizon");
  for (const auto& [asset, delta] : timeline_[t_]) {
    for (long long c = 0; c < config_.collaterals; ++c) {
      double& d = demand_[asset * config_.collaterals + c];
      d += delta[c];
      if (d < 0.0) d = 0.0;
    }
  }
  return demand_;
}

namespace {

double pair_revenue(double kappa, double demand, double supply) {
  if (!(supply > 0.0)) throw std::domain_error("pair supply must be > 0");
  return kappa * std::min(demand / supply, 1.0);
}

}  // namespace

double md_revenue_static(const AllocationMatrix& alloc, const MultiEventStream& stream,
                         const MultiMarketConfig& config, const std::vector<double>& capacities,
                         long long horizon) {
  alloc.validate();
  config.validate();
  MultiDemandEngine engine(stream, config, horizon);
  Accumulator<double> total;
  for (long long t = 1; t <= horizon; ++t) {
    const auto& d = engine.advance();
    for (long long b = 0; b < config.assets; ++b)
      for (long long c = 0; c < config.collaterals; ++c) {
        const double s = capacities[b] * alloc.at(b, c);
        total.add(pair_revenue(config.kappa_at(b, c), d[b * config.collaterals + c], s));
      }
  }
  return total.value();
}

namespace {

// enumerate row compositions with entries in {a + k*h} summing to 1
void enumerate_rows(long long collaterals, double min_mass, double h,
                    std::vector<double>& current, long long index, double remaining,
                    const std::function<void(const std::vector<double>&)>& visit) {
  if (index == collaterals - 1) {
    if (remaining + 1e-9 < min_mass) return;
    current[index] = remaining;
    visit(current);
    return;
  }
  const long long max_steps =
      static_cast<long long>(std::floor((remaining - min_mass * (collaterals - index - 1) -
                                         min_mass) / h + 1e-9));
  for (long long k = 0; k <= max_steps; ++k) {
    current[index] = min_mass + k * h;
    enumerate_rows(collaterals, min_mass, h, current, index + 1,
                   remaining - current[index], visit);
  }
}

// per-asset revenue of one row over the precomputed demand history
double row_revenue(const std::vector<std::vector<double>>& demand_history, long long b,
                   const MultiMarketConfig& config, double capacity,
                   const std::vector<double>& row) {
  Accumulator<double> total;
  for (const auto& d : demand_history)
    for (long long c = 0; c < config.collaterals; ++c)
      total.add(pair_revenue(config.kappa_at(b, c), d[b * config.collaterals + c],
                             capacity * row[c]));
  return total.value();
}

}  // namespace

StaticMatrixOptimum md_optimal_static(const MultiEventStream& stream,
                                      const MultiMarketConfig& config,
                                      const std::vector<double>& capacities, double resolution,
                                      long long horizon) {
  config.validate();
  if (!(resolution > 0.0)) throw std::invalid_argument("grid resolution must be > 0");
  const double budget = std::pow(1.0 / resolution, static_cast<double>(config.collaterals - 1)) *
                        static_cast<double>(config.assets);
  if (budget > 2e6)
    throw std::invalid_argument(
        "grid search budget exceeded; use the learning engine for this size");

  std::vector<std::vector<double>> demand_history;
  {
    MultiDemandEngine engine(stream, config, horizon);
    demand_history.reserve(horizon);
    for (long long t = 1; t <= horizon; ++t) demand_history.push_back(engine.advance());
  }

  StaticMatrixOptimum best;
  best.matrix.assets = config.assets;
  best.matrix.collaterals = config.collaterals;
  best.matrix.min_mass = config.min_mass;
  best.matrix.w.assign(config.assets * config.collaterals, 0.0);
  double total = 0.0;
  for (long long b = 0; b < config.assets; ++b) {
    std::vector<double> current(config.collaterals, 0.0);
    std::vector<double> best_row;
    double best_value = -std::numeric_limits<double>::infinity();
    auto visit = [&](const std::vector<double>& row) {
      const double v = row_revenue(demand_history, b, config, capacities[b], row);
      if (v > best_value) {
        best_value = v;
        best_row = row;
      }
    };
    enumerate_rows(config.collaterals, config.min_mass, resolution, current, 0, 1.0, visit);

    // local refinement: pairwise mass transfers at shrinking step sizes
    for (double step = resolution / 2; step > resolution / 64; step /= 2) {
      bool improved = true;
      while (improved) {
        improved = false;
        for (long long i = 0; i < config.collaterals; ++i)
          for (long long j = 0; j < config.collaterals; ++j) {
            if (i == j) continue;
            if (best_row[i] - step + 1e-12 < config.min_mass) continue;
            std::vector<double> cand = best_row;
            cand[i] -= step;
            cand[j] += step;
            const double v = row_revenue(demand_history, b, config, capacities[b], cand);
            if (v > best_value + 1e-15) {
              best_value = v;
              best_row = cand;
              improved = true;
            }
          }
      }
    }
    for (long long c = 0; c < config.collaterals; ++c) best.matrix.at(b, c) = best_row[c];
    total += best_value;
  }
  best.revenue = total;
  best.matrix.validate();
  return best;
}

double curator_pair_loss_grad(double kappa, double demand, double pair_supply,
                              double own_capacity, double own_entry) {
  if (!(pair_supply > 0.0)) throw std::domain_error("pair supply must be > 0");
  const double own_supply = own_capacity * own_entry;
  if (demand < pair_supply) {
    // share-weighted revenue kappa * D * own / S^2
    return -kappa * demand * own_capacity * (pair_supply - 2.0 * own_supply) /
           (pair_supply * pair_supply * pair_supply);
  }
  // saturated: revenue kappa * own / S, still sensitive to the share
  return -kappa * own_capacity * (pair_supply - own_supply) / (pair_supply * pair_supply);
}

AllocationMatrix aggregate_allocation(const std::vector<CuratorMatrixProfile>& curators,
                                      const MultiMarketConfig& config) {
  AllocationMatrix agg;
  agg.assets = config.assets;
  agg.collaterals = config.collaterals;
  agg.min_mass = config.min_mass;
  agg.w.assign(config.assets * config.collaterals, 0.0);
  for (long long b = 0; b < config.assets; ++b) {
    double cap = 0.0;
    for (const auto& cur : curators) cap += cur.capacities[b];
    for (const auto& cur : curators)
      for (long long c = 0; c < config.collaterals; ++c)
        agg.at(b, c) += cur.capacities[b] / cap * cur.allocation.at(b, c);
  }
  return agg;
}

double frobenius_distance(const AllocationMatrix& a, const AllocationMatrix& b) {
  if (a.w.size() != b.w.size()) throw std::invalid_argument("shape mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < a.w.size(); ++i) {
    const double d = a.w[i] - b.w[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

namespace {

MultiRunResult run_curators_impl(const MultiEventStream& stream, const MultiMarketConfig& config,
                                 std::vector<CuratorMatrixProfile> curators,
                                 const MultiLearnerConfig& learner, long long horizon,
                                 const AllocationMatrix* reference_optimum) {
  config.validate();
  for (auto& cur : curators) {
    cur.allocation.min_mass = config.min_mass;
    cur.allocation.validate();
  }
  MultiDemandEngine engine(stream, config, horizon);
  MultiRunResult out;
  out.steps = horizon;
  out.revenue_per_step.reserve(horizon);
  out.per_curator_revenue.assign(curators.size(), 0.0);

  std::vector<double> prev_demand(config.assets * config.collaterals, 0.0);
  Accumulator<double> total;
  long long saturated_cells = 0;

  for (long long t = 1; t <= horizon; ++t) {
    if (learner.move_before_loan && t > 1) {
      // gradients from the last observed state, simultaneous across curators
      const std::vector<double> supply = md_supply(curators, config);
      std::vector<std::vector<double>> updated;
      updated.reserve(curators.size());
      for (const auto& cur : curators) {
        std::vector<double> rows;
        rows.reserve(config.assets * config.collaterals);
        for (long long b = 0; b < config.assets; ++b) {
          std::vector<double> row(config.collaterals), grad(config.collaterals);
          for (long long c = 0; c < config.collaterals; ++c) {
            row[c] = cur.allocation.at(b, c);
            grad[c] = curator_pair_loss_grad(config.kappa_at(b, c),
                                             prev_demand[b * config.collaterals + c],
                                             supply[b * config.collaterals + c],
                                             cur.capacities[b], row[c]);
          }
          const double eta = learner.schedule.eta(t - 1);
          std::vector<double> next =
              md_simplex_step(row, grad, eta, config.min_mass, learner.barrier_weight);
          rows.insert(rows.end(), next.begin(), next.end());
        }
        updated.push_back(std::move(rows));
      }
      for (std::size_t n = 0; n < curators.size(); ++n) curators[n].allocation.w = updated[n];
    }

    const auto& demand = engine.advance();
    const std::vector<double> supply = md_supply(curators, config);
    double step_revenue = 0.0;
    for (long long b = 0; b < config.assets; ++b)
      for (long long c = 0; c < config.collaterals; ++c) {
        const long long i = b * config.collaterals + c;
        const double u = std::min(demand[i] / supply[i], 1.0);
        if (u >= 1.0) ++saturated_cells;
        const double r = config.kappa_at(b, c) * u;
        step_revenue += r;
        // pro-rata split by contributed pair supply
        for (std::size_t n = 0; n < curators.size(); ++n)
          out.per_curator_revenue[n] +=
              r * curators[n].capacities[b] * curators[n].allocation.at(b, c) / supply[i];
      }
    out.revenue_per_step.push_back(step_revenue);
    total.add(step_revenue);
    prev_demand = demand;

    if (!learner.move_before_loan) {
      // witness mode for order sensitivity: loan first, then the adjustment
      const std::vector<double> supply2 = md_supply(curators, config);
      std::vector<std::vector<double>> updated;
      updated.reserve(curators.size());
      for (const auto& cur : curators) {
        std::vector<double> rows;
        for (long long b = 0; b < config.assets; ++b) {
          std::vector<double> row(config.collaterals), grad(config.collaterals);
          for (long long c = 0; c < config.collaterals; ++c) {
            row[c] = cur.allocation.at(b, c);
            grad[c] = curator_pair_loss_grad(config.kappa_at(b, c),
                                             demand[b * config.collaterals + c],
                                             supply2[b * config.collaterals + c],
                                             cur.capacities[b], row[c]);
          }
          std::vector<double> next = md_simplex_step(row, grad, learner.schedule.eta(t),
                                                     config.min_mass, learner.barrier_weight);
          rows.insert(rows.end(), next.begin(), next.end());
        }
        updated.push_back(std::move(rows));
      }
      for (std::size_t n = 0; n < curators.size(); ++n) curators[n].allocation.w = updated[n];
    }

    if (reference_optimum)
      out.aggregate_error.push_back(
          frobenius_distance(aggregate_allocation(curators, config), *reference_optimum));
  }

  out.total_revenue = total.value();
  out.final_allocation = aggregate_allocation(curators, config);
  out.time_in_saturation = static_cast<double>(saturated_cells) /
                           static_cast<double>(horizon * config.assets * config.collaterals);
  return out;
}

}  // namespace

MultiRunResult run_monopolist(const MultiEventStream& stream, const MultiMarketConfig& config,
                              const std::vector<double>& capacities,
                              const MultiLearnerConfig& learner, long long horizon,
                              const AllocationMatrix* reference_optimum) {
  CuratorMatrixProfile solo;
  solo.capacities = capacities;
  solo.allocation = AllocationMatrix::uniform(config.assets, config.collaterals, config.min_mass);
  return run_curators_impl(stream, config, {solo}, learner, horizon, reference_optimum);
}

MultiRunResult run_curators_md(const MultiEventStream& stream, const MultiMarketConfig& config,
                               std::vector<CuratorMatrixProfile> curators,
                               const MultiLearnerConfig& learner, long long horizon,
                               const AllocationMatrix* reference_optimum) {
  if (curators.empty()) throw std::invalid_argument("need at least one curator");
  return run_curators_impl(stream, config, std::move(curators), learner, horizon,
                           reference_optimum);
}

}  // namespace lendsim
