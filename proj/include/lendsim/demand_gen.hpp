#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

#include "lendsim/events.hpp"
#include "lendsim/rng.hpp"

namespace lendsim {

// T arrivals of size 1/T, each staying active for the whole window; induced
// demand D(t) = t/T.
template <typename R>
EventStream<R> gen_example1(long long horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  EventStream<R> events;
  events.reserve(horizon);
  const R size = scalar_ops<R>::from_ratio(1, horizon);
  for (long long t = 1; t <= horizon; ++t) events.push_back({t, size, horizon});
  return events;
}

// Arrival of size 1/T^2 at every step, all active through the window, so
// D(t) = t/T^2 and the per-loan exposure size * duration is 1/T.
template <typename R>
EventStream<R> gen_example2(long long horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  EventStream<R> events;
  events.reserve(horizon);
  const R size = scalar_ops<R>::from_ratio(1, horizon * horizon);
  for (long long t = 1; t <= horizon; ++t) events.push_back({t, size, horizon});
  return events;
}

// One large loan of size 1-delta followed by size-delta loans, all with
// duration T. Demand ramps as (1-delta) + (t-1)*delta until capacity bites.
template <typename R>
EventStream<R> gen_example3(long long horizon, const R& delta) {
  if (horizon < 2) throw std::invalid_argument("horizon must be >= 2");
  if (!(delta > R(0)) || !(delta < R(1)))
    throw std::invalid_argument("delta must lie strictly inside (0, 1)");
  EventStream<R> events;
  events.reserve(horizon);
  events.push_back({1, R(1) - delta, horizon});
  for (long long t = 2; t <= horizon; ++t) events.push_back({t, delta, horizon});
  return events;
}

struct StochasticDemandParams {
  double increment_scale = 0.01;  // Delta: base threshold for the increment tail grid
  double tail_rate = 200.0;       // K: P[|l_s - l_{s-1}| > d] = e^{-K d}
  double duration_mean = 16.0;    // geometric duration mean
  double reset_epsilon = 0.5;     // base threshold for the exposure tail grid
  double min_demand = 0.05;       // D_min kept by long-lived base loans
  long long horizon = 1000;

  double s_total = 1.0;
  double size_lo = 0.005;  // loan size random walk is reflected into [size_lo, size_hi]
  double size_hi = 0.05;
  double demand_cap = 0.8;  // arrivals that would push D above this are skipped

  void validate() const {
    if (!(increment_scale > 0) || !(tail_rate > 0) || !(duration_mean > 0) ||
        !(reset_epsilon > 0) || !(min_demand > 0) || horizon < 1 || !(s_total > 0))
      throw std::invalid_argument("stochastic demand parameters must be strictly positive");
    if (!(size_lo > 0) || !(size_hi > size_lo))
      throw std::invalid_argument("loan size range must satisfy 0 < size_lo < size_hi");
    if (demand_cap <= min_demand + size_hi)
      throw std::invalid_argument(
          "infeasible parameters: demand_cap must exceed min_demand + size_hi, otherwise "
          "no full-size loan can ever be admitted");
    if (demand_cap > s_total)
      throw std::invalid_argument("demand cap cannot exceed the total supply scale");
  }

  // generous prefix for the floor-role pool to fill before the demand floor
  // is guaranteed
  long long warmup_steps() const { return 64; }
};

// Loan process satisfying the tail assumptions by construction. Every
// arrival's size comes from one Laplace-stepped walk reflected into
// [size_lo, size_hi], so consecutive arrival increments carry the tail
// e^{-K d} exactly (reflection only shrinks them). Durations are geometric,
// truncated so size * duration never exceeds 16 * reset_epsilon * s_total.
// A rolling subset of arrivals takes a long-lived "floor" role with exposure
// pinned at a quarter of that ceiling; their combined mass keeps D(t) above
// min_demand once the warm-up prefix has filled. Deterministic given
// (params, seed).
inline EventStream<double> gen_stochastic(const StochasticDemandParams& params,
                                          std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  EventStream<double> events;

  struct Expiry {
    double size;
    bool floor_role;
  };
  std::map<long long, Expiry> expiry;  // slot -> loan departing there

  const long long T = params.horizon;
  const double exposure_cap = 16.0 * params.reset_epsilon * params.s_total;
  // floor mass target leaves room for a couple of in-flight renewals
  const double floor_target = params.min_demand + 3.0 * params.size_hi;
  // floor-role exposure sits well inside the tail grid
  const double floor_exposure = exposure_cap / 4.0;

  double demand = 0.0;
  double floor_mass = 0.0;
  double walk = 0.5 * (params.size_lo + params.size_hi);

  for (long long t = 1; t <= T; ++t) {
    auto due = expiry.find(t);
    if (due != expiry.end()) {
      demand -= due->second.size;  // the slot is consumed by the expiry
      if (due->second.floor_role) floor_mass -= due->second.size;
      expiry.erase(due);
      continue;
    }
    // propose the next size; the walk only advances when a loan is emitted so
    // consecutive emitted sizes differ by exactly one Laplace step
    double proposal = walk + rng.laplace(1.0 / params.tail_rate);
    for (int guard = 0; guard < 64; ++guard) {
      if (proposal < params.size_lo)
        proposal = 2 * params.size_lo - proposal;
      else if (proposal > params.size_hi)
        proposal = 2 * params.size_hi - proposal;
      else
        break;
    }
    proposal = std::min(std::max(proposal, params.size_lo), params.size_hi);
    if (demand + proposal > params.demand_cap) continue;  // skip; walk holds its value

    const bool floor_role = floor_mass < floor_target;
    long long tau;
    if (floor_role) {
      tau = std::max<long long>(
          1, static_cast<long long>(std::floor(floor_exposure / proposal)));
    } else {
      tau = rng.geometric(params.duration_mean);
      const long long tau_cap =
          std::max<long long>(1, static_cast<long long>(std::floor(exposure_cap / proposal)));
      tau = std::min(tau, tau_cap);
    }
    // push the expiry to the next free slot so every step carries one action
    long long dep = t + tau;
    while (dep <= T && expiry.count(dep)) ++dep;
    tau = dep - t;

    walk = proposal;
    events.push_back({t, proposal, tau});
    if (dep <= T) expiry[dep] = {proposal, floor_role};
    demand += proposal;
    if (floor_role) floor_mass += proposal;
  }
  return events;
}

}  // namespace lendsim
