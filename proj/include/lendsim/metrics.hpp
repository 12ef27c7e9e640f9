#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lendsim/events.hpp"
#include "lendsim/market.hpp"
#include "lendsim/numeric.hpp"
#include "lendsim/pricing.hpp"

namespace lendsim {

// Best fixed-interest revenue with full knowledge of the demand sequence: a
// supply path that tracks demand exactly prices every admitted loan at kappa.
// `supply_cap` bounds how much demand the benchmark can admit (processed in
// arrival order, departures freeing capacity); leave it unset for the
// unconstrained benchmark the closed-form examples use.
template <typename R>
R hindsight_fixed_optimal(const EventStream<R>& stream, const R& kappa,
                          std::optional<R> supply_cap = std::nullopt) {
  validate_stream(stream);
  Accumulator<R> total;
  std::map<long long, R> expiry;
  R demand{};
  for (const auto& e : stream) {
    if (!e.is_arrival()) continue;
    for (auto it = expiry.begin(); it != expiry.end() && it->first <= e.t;) {
      demand -= it->second;
      it = expiry.erase(it);
    }
    if (supply_cap && demand + e.size > *supply_cap) continue;  // inadmissible
    demand += e.size;
    if (e.duration > 0) expiry[e.t + e.duration] += e.size;
    total.add(kappa * scalar_ops<R>::from_ratio(e.duration, 1) * e.size);
  }
  return total.value();
}

// Per-loan ceiling for the variable-rate model: every posted price tick of the
// loan's window [t, t+tau] (truncated at the horizon) is worth at most kappa.
template <typename R>
R hindsight_variable_optimal(const EventStream<R>& stream, const R& kappa, long long horizon,
                             std::optional<R> supply_cap = std::nullopt) {
  validate_stream(stream);
  Accumulator<R> total;
  std::map<long long, R> expiry;
  R demand{};
  for (const auto& e : stream) {
    if (!e.is_arrival() || e.t > horizon) continue;
    for (auto it = expiry.begin(); it != expiry.end() && it->first <= e.t;) {
      demand -= it->second;
      it = expiry.erase(it);
    }
    if (supply_cap && demand + e.size > *supply_cap) continue;
    demand += e.size;
    if (e.duration > 0) expiry[e.t + e.duration] += e.size;
    const long long ticks = std::min(e.t + e.duration, horizon) - e.t + 1;
    total.add(kappa * scalar_ops<R>::from_ratio(ticks, 1) * e.size);
  }
  return total.value();
}

// Best constant supply in [s_lo, s_hi] for the fixed-interest engine, by grid
// scan plus local refinement. The revenue of a constant-supply replay is
// piecewise smooth in S (acceptance patterns flip), so candidates also include
// every reachable demand level.
struct StaticBenchmark {
  double supply = 0.0;
  double revenue = 0.0;
};

StaticBenchmark hindsight_static_optimal(const EventStream<double>& stream, double kappa,
                                         double s_lo, double s_hi, int grid = 129,
                                         int refine_rounds = 2);

// Exhaustive hindsight optimum on a tiny instance: supply each step is chosen
// from `supply_grid`, loans are admitted under the capacity rule, and revenue
// is kappa * (D/S) * tau * l per accepted arrival. States that share the same
// set of accepted-and-alive loans are merged, which keeps the search exact.
struct BruteforceResult {
  double revenue = 0.0;
  std::vector<double> supply_path;
};

BruteforceResult hindsight_bruteforce(const EventStream<double>& stream, double kappa,
                                      const std::vector<double>& supply_grid, long long horizon);

template <typename R>
R regret(const std::vector<R>& alg_per_step, const R& benchmark) {
  Accumulator<R> sum;
  for (const auto& v : alg_per_step) sum.add(v);
  return benchmark - sum.value();
}

template <typename R>
R dynamic_regret(const std::vector<R>& per_step_max, const std::vector<R>& alg_per_step) {
  if (per_step_max.size() != alg_per_step.size())
    throw std::invalid_argument("series length mismatch");
  Accumulator<R> sum;
  for (const auto& v : per_step_max) sum.add(v);
  for (const auto& v : alg_per_step) sum.add(-v);
  return sum.value();
}

inline double path_length(const std::vector<double>& mins) {
  if (mins.size() < 2) throw std::invalid_argument("need at least 2 points");
  double p = 0.0;
  for (std::size_t i = 1; i < mins.size(); ++i) p += std::fabs(mins[i] - mins[i - 1]);
  return p;
}

inline double path_length(const std::vector<std::vector<double>>& mins) {
  if (mins.size() < 2) throw std::invalid_argument("need at least 2 points");
  double p = 0.0;
  for (std::size_t i = 1; i < mins.size(); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < mins[i].size(); ++j) {
      const double d = mins[i][j] - mins[i - 1][j];
      sq += d * d;
    }
    p += std::sqrt(sq);
  }
  return p;
}

template <typename R>
double competitive_ratio(const R& r_alg, const R& r_star) {
  if (r_star == R(0)) {
    if (r_alg == R(0)) return 1.0;
    throw std::domain_error("competitive ratio undefined: zero benchmark, nonzero revenue");
  }
  const double ratio = scalar_ops<R>::to_double(r_alg) / scalar_ops<R>::to_double(r_star);
  return ratio < 0.0 ? 0.0 : ratio;
}

struct RegretReport {
  double r_alg = 0.0;
  double r_star = 0.0;         // hindsight benchmark (sum of per-step maxima)
  double regret = 0.0;         // r_star - r_alg
  double dynamic_regret = 0.0; // from the per-step max series; equals `regret` here
  double r_star_static = 0.0;  // best constant supply
  double s_star_static = 0.0;
  double static_regret = 0.0;  // r_star_static - r_alg
  double residual = 0.0;       // r_star - r_star_static >= 0
  double path_length = 0.0;    // movement of the benchmark supply path
  double competitive_ratio = 0.0;
  long long rejected_loans = 0;
  long long open_loans_at_horizon = 0;
  std::vector<double> per_step_alg;
  std::vector<double> per_step_max;
};

// Assembles the full report for a single-asset run against the pinned-down
// benchmark family (dynamic: per-step optimal price; static: best constant
// supply within the engine's bounds).
RegretReport build_regret_report(const RunTrajectory<double>& run,
                                 const EventStream<double>& stream, double kappa,
                                 RateMode rate, long long horizon,
                                 std::optional<double> benchmark_cap, double s_lo, double s_hi,
                                 bool with_static = true);

struct ScalingFit {
  std::vector<double> horizons;
  std::vector<double> values;
  std::vector<double> coeffs;             // for {1, log T, (log T)^2, (log T)^3, T}
  std::vector<std::string> basis_labels;
  std::string dominant;
  double residual_norm = 0.0;
};

// Nonnegative least squares on {1, log T, (log T)^2, (log T)^3, T}; the
// dominant label is the basis term with the largest contribution at the
// largest horizon. Requires >= 5 strictly increasing horizons spanning at
// least two decades.
ScalingFit fit_scaling(const std::vector<double>& horizons, const std::vector<double>& values);

}  // namespace lendsim
