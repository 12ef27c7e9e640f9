#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lendsim/learners.hpp"

namespace lendsim {

// Per-curator split of each borrowable asset's supply over collateral
// markets: row b lies on the C-simplex with every entry >= min_mass.
struct AllocationMatrix {
  long long assets = 0;       // B
  long long collaterals = 0;  // C
  double min_mass = 0.0;      // a
  std::vector<double> w;      // row-major, assets x collaterals

  double& at(long long b, long long c) { return w[b * collaterals + c]; }
  double at(long long b, long long c) const { return w[b * collaterals + c]; }

  static AllocationMatrix uniform(long long assets, long long collaterals, double min_mass);
  void validate() const;
};

// One multidimensional loan action: borrow asset `asset` against a vector of
// per-collateral amounts. The mirrored departure lands at t + duration.
struct MultiLoanEvent {
  long long t = 0;
  long long asset = 0;
  std::vector<double> sizes;  // length C; all entries >= 0, not all zero for arrivals
  long long duration = 0;
  bool departure = false;
};

using MultiEventStream = std::vector<MultiLoanEvent>;

void validate_multi_stream(const MultiEventStream& events, long long assets,
                           long long collaterals);

struct MultiMarketConfig {
  long long assets = 1;
  long long collaterals = 1;
  std::vector<double> kappa;  // row-major elasticities, assets x collaterals
  double kappa_max = 0.0;     // uniform elasticity bound; 0 disables the check
  double min_mass = 0.05;     // Assumption on allocations staying off the boundary
  double min_demand = 0.0;    // configured demand floor (used by curvature reports)

  double kappa_at(long long b, long long c) const { return kappa[b * collaterals + c]; }
  void validate() const;
};

struct CuratorMatrixProfile {
  std::vector<double> capacities;  // S^n_b per asset
  AllocationMatrix allocation;
};

// S_{b,c} = sum_n S^n_b A^n_{b,c}
std::vector<double> md_supply(const std::vector<CuratorMatrixProfile>& curators,
                              const MultiMarketConfig& config);

// Demand replay for the exogenous multidimensional arrival process (no
// capacity rule here; the revenue is rate-based and saturates at U = 1).
class MultiDemandEngine {
 public:
  MultiDemandEngine(const MultiEventStream& stream, const MultiMarketConfig& config,
                    long long horizon);
  // applies the action at time t = current + 1 and returns current demand grid
  const std::vector<double>& advance();
  const std::vector<double>& demand() const { return demand_; }
  long long now() const { return t_; }

 private:
  const MultiMarketConfig& config_;
  std::vector<std::vector<std::pair<long long, std::vector<double>>>> timeline_;  // per t
  std::vector<double> demand_;  // row-major B x C
  long long t_ = 0;
  long long horizon_ = 0;
};

// sum_{t,b,c} kappa_{b,c} * min(D_{b,c}(t) / S_{b,c}, 1) with the allocation
// held fixed over the whole window.
double md_revenue_static(const AllocationMatrix& alloc, const MultiEventStream& stream,
                         const MultiMarketConfig& config, const std::vector<double>& capacities,
                         long long horizon);

struct StaticMatrixOptimum {
  AllocationMatrix matrix;
  double revenue = 0.0;
};

// Product grid search over each row's simplex (resolution h, entries >=
// min_mass) plus one local-refinement pass from the best grid point. Rows are
// independent because the revenue separates per asset.
StaticMatrixOptimum md_optimal_static(const MultiEventStream& stream,
                                      const MultiMarketConfig& config,
                                      const std::vector<double>& capacities, double resolution,
                                      long long horizon);

struct MultiRunResult {
  std::vector<double> revenue_per_step;
  double total_revenue = 0.0;
  AllocationMatrix final_allocation;               // monopolist / aggregate
  std::vector<double> aggregate_error;             // || A_hat(t) - A_star ||_F per step
  std::vector<double> per_curator_revenue;
  double time_in_saturation = 0.0;                 // fraction of (t,b,c) with U = 1
  long long steps = 0;
};

struct MultiLearnerConfig {
  StepSchedule schedule{StepKind::inverse_t_strongly_convex, 1.0};
  double barrier_weight = 0.0;
  bool move_before_loan = true;  // curators adjust, then the loan lands
};

// Single curator updating each asset row by entropic mirror descent on the
// per-asset loss -sum_c kappa U; saturated pairs contribute subgradient 0.
MultiRunResult run_monopolist(const MultiEventStream& stream, const MultiMarketConfig& config,
                              const std::vector<double>& capacities,
                              const MultiLearnerConfig& learner, long long horizon,
                              const AllocationMatrix* reference_optimum = nullptr);

// N curators, each running mirror descent on its own pro-rata revenue share;
// tracks the capacity-weighted aggregate matrix against a reference optimum.
MultiRunResult run_curators_md(const MultiEventStream& stream, const MultiMarketConfig& config,
                               std::vector<CuratorMatrixProfile> curators,
                               const MultiLearnerConfig& learner, long long horizon,
                               const AllocationMatrix* reference_optimum = nullptr);

// Loss gradient of curator n's pro-rata share for pair (b, c), given the
// joint supply grid; used by the engine and checked against finite
// differences in tests.
double curator_pair_loss_grad(double kappa, double demand, double pair_supply,
                              double own_capacity, double own_entry);

// Capacity-weighted aggregate allocation; every row stays on the simplex.
AllocationMatrix aggregate_allocation(const std::vector<CuratorMatrixProfile>& curators,
                                      const MultiMarketConfig& config);

double frobenius_distance(const AllocationMatrix& a, const AllocationMatrix& b);

}  // namespace lendsim
