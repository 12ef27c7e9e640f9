#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lendsim/events.hpp"
#include "lendsim/numeric.hpp"

namespace lendsim {

// Convex increasing cost with C(0) = 0. Quadratic: coeff * x^2 / 2,
// linear: coeff * x.
enum class CostKind { quadratic, linear };

template <typename R>
struct CostFn {
  CostKind kind = CostKind::quadratic;
  R coeff{};

  R value(const R& x) const {
    if (kind == CostKind::quadratic) return coeff * x * x / R(2);
    return coeff * x;
  }
  R deriv(const R& x) const {
    if (kind == CostKind::quadratic) return coeff * x;
    return coeff;
  }
  // lower bound on C'' over [0,1]
  R curvature() const { return kind == CostKind::quadratic ? coeff : R(0); }
};

template <typename R>
struct CuratorProfile {
  R capacity{};  // S_n > 0
  R alpha{};     // allocation fraction in (0, 1]
  CostFn<R> cost;

  void validate() const {
    if (!(capacity > R(0))) throw std::invalid_argument("curator capacity must be > 0");
    if (!(alpha > R(0)) || alpha > R(1))
      throw std::invalid_argument("curator allocation must lie in (0, 1]");
    if (cost.coeff < R(0)) throw std::invalid_argument("cost coefficient must be >= 0");
    if (cost.value(R(0)) != R(0)) throw std::invalid_argument("cost must satisfy C(0) = 0");
    // numeric convexity/monotonicity check on a coarse grid of [0,1]
    const int n = 16;
    R prev_v = cost.value(R(0));
    R prev_d = cost.deriv(R(0));
    for (int i = 1; i <= n; ++i) {
      const R x = scalar_ops<R>::from_ratio(i, n);
      const R v = cost.value(x);
      const R d = cost.deriv(x);
      if (v < prev_v) throw std::invalid_argument("cost function is not increasing on [0,1]");
      if (d < prev_d) throw std::invalid_argument("cost function is not convex on [0,1]");
      prev_v = v;
      prev_d = d;
    }
  }
};

// S(t) = sum_n alpha_n * S_n
template <typename R>
R total_supply(const std::vector<CuratorProfile<R>>& curators) {
  if (curators.empty()) throw std::invalid_argument("curator list must be nonempty");
  R s{};
  for (const auto& c : curators) {
    c.validate();
    s += c.alpha * c.capacity;
  }
  if (!(s > R(0))) throw std::domain_error("total supply must be strictly positive");
  return s;
}

template <typename R>
struct MarketState {
  long long t = 0;
  R active_demand{};
  R supply{};
  R utilization{};
  bool rejected = false;  // a loan was refused for capacity at this step
};

template <typename R>
R capped_utilization(const R& demand, const R& supply) {
  if (!(supply > R(0))) throw std::domain_error("supply must be strictly positive");
  const R u = demand / supply;
  return u > R(1) ? R(1) : u;
}

// Acceptance comparisons are exact in rational mode. In double mode a
// relative slack absorbs summation error so boundary loans (D + l == S in
// real arithmetic) are still accepted; any genuine overshoot is far larger.
template <typename R>
struct capacity_slack {
  static R value(const R&) { return R(0); }
};

template <>
struct capacity_slack<double> {
  static double value(double supply) { return 1e-9 * (1.0 + std::fabs(supply)); }
};

// Applies one event at time state.t + 1 under the capacity rule: an arrival is
// accepted iff D(t-1) + l <= supply (ties accepted, so utilization can reach
// exactly 1). Rejected arrivals leave demand unchanged and set the flag.
// Departures always go through.
template <typename R>
MarketState<R> step_market(const MarketState<R>& state, const LoanEvent<R>& event,
                           const R& supply) {
  if (!(supply > R(0))) throw std::domain_error("supply must be strictly positive");
  if (event.t != state.t + 1)
    throw std::invalid_argument("event at t=" + std::to_string(event.t) +
                                " is out of time order (state at t=" + std::to_string(state.t) +
                                ")");
  MarketState<R> next;
  next.t = event.t;
  next.supply = supply;
  next.rejected = false;
  if (event.is_arrival()) {
    const R would_be = state.active_demand + event.size;
    if (would_be <= supply + capacity_slack<R>::value(supply)) {
      next.active_demand = would_be;
    } else {
      next.active_demand = state.active_demand;
      next.rejected = true;
    }
  } else {
    next.active_demand = state.active_demand + event.size;
    if (next.active_demand < R(0)) next.active_demand = R(0);
  }
  next.utilization = capped_utilization(next.active_demand, supply);
  return next;
}

// Advance one step with no loan action; only the posted supply changes.
template <typename R>
MarketState<R> step_market_idle(const MarketState<R>& state, const R& supply) {
  if (!(supply > R(0))) throw std::domain_error("supply must be strictly positive");
  MarketState<R> next = state;
  next.t = state.t + 1;
  next.supply = supply;
  next.rejected = false;
  next.utilization = capped_utilization(next.active_demand, supply);
  return next;
}

template <typename R>
struct RevenueLedger {
  std::vector<R> per_step;
  Accumulator<R> cumulative;
  std::vector<Accumulator<R>> per_supplier;

  void book(const R& amount, const std::vector<R>& split) {
    per_step.push_back(amount);
    cumulative.add(amount);
    if (per_supplier.size() < split.size()) per_supplier.resize(split.size());
    for (std::size_t i = 0; i < split.size(); ++i) per_supplier[i].add(split[i]);
  }

  R total() const { return cumulative.value(); }
};

// Replays a stream of arrivals through the capacity rule with a per-step
// supply policy, synthesizing departures at expiry. Rejected arrivals never
// schedule a departure. At most one action per step: a user arrival may not
// collide with a scheduled expiry.
template <typename R>
class DemandEngine {
 public:
  explicit DemandEngine(const EventStream<R>& arrivals, long long horizon)
      : horizon_(horizon) {
    validate_stream(arrivals);
    for (const auto& e : arrivals) {
      if (!e.is_arrival()) continue;  // explicit departures re-derive from expiries
      if (e.t > horizon_) continue;
      arrivals_[e.t] = e;
    }
    state_.t = 0;
  }

  long long horizon() const { return horizon_; }
  const MarketState<R>& state() const { return state_; }

  // Advances to time t = state.t + 1 under the given supply. Returns the event
  // processed at this step, if any (size 0 marks an idle step). The caller
  // observes acceptance through state().rejected and demand deltas.
  LoanEvent<R> advance(const R& supply) {
    const long long t = state_.t + 1;
    auto due = departures_.find(t);
    auto arr = arrivals_.find(t);
    if (due != departures_.end() && arr != arrivals_.end())
      throw std::invalid_argument("arrival at t=" + std::to_string(t) +
                                  " collides with a scheduled expiry");
    LoanEvent<R> processed;
    processed.t = t;
    if (due != departures_.end()) {
      processed.size = -due->second;
      processed.duration = 0;
      state_ = step_market(state_, processed, supply);
      departures_.erase(due);
    } else if (arr != arrivals_.end()) {
      processed = arr->second;
      state_ = step_market(state_, processed, supply);
      if (!state_.rejected && processed.duration > 0) {
        departures_[t + processed.duration] += processed.size;
      }
    } else {
      state_ = step_market_idle(state_, supply);
      processed.size = R(0);
    }
    return processed;
  }

 private:
  long long horizon_;
  std::map<long long, LoanEvent<R>> arrivals_;
  std::map<long long, R> departures_;  // time -> total size expiring
  MarketState<R> state_;
};

}  // namespace lendsim
