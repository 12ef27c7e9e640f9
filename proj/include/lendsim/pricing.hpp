#pragma once

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "lendsim/curator_game.hpp"
#include "lendsim/events.hpp"
#include "lendsim/market.hpp"
#include "lendsim/numeric.hpp"

namespace lendsim {

enum class RateMode { fixed_interest, variable_interest };
enum class SupplyModel { pooled, curated };
enum class CuratedMode { supply_tracking, profit_game };

// Rectilinear price: kappa * min(D/S, 1), linear in utilization until the
// market saturates.
template <typename R>
R pooled_price(const R& demand, const R& supply, const R& kappa) {
  if (!(supply > R(0))) throw std::domain_error("supply must be strictly positive");
  return kappa * capped_utilization(demand, supply);
}

template <typename R>
struct TrackingConfig {
  // posted supply chases demand-plus-headroom with a unit-by-default gradient
  // step on the squared tracking error; headroom is the largest arrival seen
  R step = R(1);
};

template <typename R>
struct GameRunConfig {
  GameOptions<R> options;
  R revenue_floor{};  // lower bound on the revenue signal fed to the game
  R c_star{};         // minimum-protocol-revenue scale for diagnostics
  double p_low_cost = 0.0;  // required density of low-cost curators
};

template <typename R>
struct EngineConfig {
  R kappa = R(1);
  RateMode rate = RateMode::fixed_interest;
  SupplyModel model = SupplyModel::pooled;
  CuratedMode curated_mode = CuratedMode::supply_tracking;

  R pooled_supply = R(1);
  std::vector<CuratorProfile<R>> curators;  // curated models
  TrackingConfig<R> tracking;
  GameRunConfig<R> game;

  // posted-supply bounds (compact-supply assumption); curated supply is also
  // capped by the curators' aggregate capacity
  R s_min = scalar_ops<R>::from_ratio(1, 1000000000);
  R s_max = R(1);

  void validate() const {
    if (!(kappa > R(0))) throw std::invalid_argument("kappa must be > 0");
    if (!(s_min > R(0)) || s_min > s_max)
      throw std::invalid_argument("supply bounds must satisfy 0 < s_min <= s_max");
    if (model == SupplyModel::pooled) {
      if (!(pooled_supply > R(0))) throw std::invalid_argument("pooled supply must be > 0");
    } else {
      if (curators.empty()) throw std::invalid_argument("curated model needs curators");
      for (const auto& c : curators) c.validate();
    }
  }
};

template <typename R>
struct ArrivalRecord {
  long long t = 0;
  R size{};
  long long duration = 0;
  bool accepted = false;
  R booked{};               // revenue attributed to this loan
  long long close_t = 0;    // step the revenue was booked (variable mode)
  bool open_at_horizon = false;
};

template <typename R>
struct RunTrajectory {
  std::vector<MarketState<R>> states;  // one per step, t = 1..T
  std::vector<R> prices;               // posted price per step
  RevenueLedger<R> ledger;             // per-step booked revenue and split
  std::vector<std::vector<R>> alphas;  // per step, per curator
  std::vector<ArrivalRecord<R>> arrivals;
  long long open_loans_at_horizon = 0;
  std::vector<std::string> warnings;
  R s_total{};  // aggregate capacity (pooled: the fixed supply)

  R total_revenue() const { return ledger.total(); }
};

namespace detail {

template <typename R>
R clamp_supply(R s, const R& lo, const R& hi) {
  if (s < lo) s = lo;
  if (s > hi) s = hi;
  return s;
}

}  // namespace detail

// Shared single-asset runner. Per step: (1) the supply side moves (pooled:
// nothing; tracking: one gradient step toward last demand plus headroom;
// game: one simultaneous profit-ascent round on the previous revenue signal),
// (2) the step's loan action is applied under the capacity rule, (3) the
// price posts and revenue books (fixed: at arrival, price locked for the
// loan's duration; variable: integrated posted price, booked at close).
template <typename R>
RunTrajectory<R> run_market(const EventStream<R>& stream, const EngineConfig<R>& config,
                            long long horizon = 0) {
  config.validate();
  const long long T = horizon > 0 ? horizon : stream_horizon(stream);
  if (T < 1) throw std::invalid_argument("empty horizon");

  RunTrajectory<R> out;
  out.states.reserve(T);
  out.prices.reserve(T);

  const bool curated = config.model == SupplyModel::curated;
  const bool tracking = curated && config.curated_mode == CuratedMode::supply_tracking;
  const bool game = curated && config.curated_mode == CuratedMode::profit_game;

  std::vector<R> alphas;
  R s_total;
  if (curated) {
    s_total = R(0);
    for (const auto& c : config.curators) {
      alphas.push_back(c.alpha);
      s_total += c.capacity;
    }
  } else {
    s_total = config.pooled_supply;
  }
  out.s_total = s_total;

  if (game) {
    const std::size_t low = count_low_cost(config.curators, config.game.c_star);
    const double need = config.game.p_low_cost * static_cast<double>(config.curators.size());
    if (static_cast<double>(low) + 1e-12 < need)
      out.warnings.push_back("low-cost curator density below the configured requirement (" +
                             std::to_string(low) + " of " +
                             std::to_string(config.curators.size()) + ")");
  }

  const R supply_lo = detail::clamp_supply(config.s_min, config.s_min, config.s_max);
  const R supply_hi = curated ? std::min(config.s_max, s_total) : config.s_max;

  DemandEngine<R> engine(stream, T);
  R tracker = curated ? pro_rata_supply(alphas, config.curators) : config.pooled_supply;
  R headroom{};  // largest arrival magnitude observed so far
  R last_step_revenue{};
  bool revenue_floor_held = true;

  // price prefix sums for variable-rate integration; P[0] = 0
  std::vector<R> price_prefix;
  price_prefix.reserve(T + 1);
  price_prefix.push_back(R(0));
  struct OpenLoan {
    std::size_t arrival_index;
    long long open_t;
    long long close_t;
  };
  std::vector<OpenLoan> open_loans;

  for (long long t = 1; t <= T; ++t) {
    // supply side moves first, on information through t-1
    R supply;
    if (game) {
      if (t > 1) {
        R signal = last_step_revenue;
        if (signal < config.game.revenue_floor) signal = config.game.revenue_floor;
        pro_rata_game_step(alphas, config.curators, signal, t - 1, config.game.options);
      }
      supply = pro_rata_supply(alphas, config.curators);
    } else if (tracking) {
      supply = detail::clamp_supply(tracker, supply_lo, supply_hi);
      const R frac = supply / s_total;
      for (auto& a : alphas) a = frac;
    } else {
      supply = config.pooled_supply;
    }

    const LoanEvent<R> ev = engine.advance(supply);
    const MarketState<R>& st = engine.state();
    const R price = config.kappa * st.utilization;
    out.states.push_back(st);
    out.prices.push_back(price);
    price_prefix.push_back(price_prefix.back() + price);

    R step_revenue{};
    std::vector<R> split(curated ? alphas.size() : 1, R(0));
    auto book_split = [&](const R& amount) {
      if (!curated) {
        split[0] += amount;
        return;
      }
      const R s_alloc = pro_rata_supply(alphas, config.curators);
      for (std::size_t n = 0; n < alphas.size(); ++n)
        split[n] += amount * alphas[n] * config.curators[n].capacity / s_alloc;
    };

    if (ev.is_arrival()) {
      if (ev.size > headroom) headroom = ev.size;
      ArrivalRecord<R> rec;
      rec.t = t;
      rec.size = ev.size;
      rec.duration = ev.duration;
      rec.accepted = !st.rejected;
      if (rec.accepted) {
        if (config.rate == RateMode::fixed_interest) {
          rec.booked = price * scalar_ops<R>::from_ratio(ev.duration, 1) * ev.size;
          rec.close_t = t;
          step_revenue += rec.booked;
          book_split(rec.booked);
        } else {
          open_loans.push_back({out.arrivals.size(), t, t + ev.duration});
        }
      }
      out.arrivals.push_back(rec);
    }

    if (config.rate == RateMode::variable_interest) {
      // close every loan whose window [open_t, open_t + tau] ends here; the
      // borrower pays the integrated posted price over that window
      for (std::size_t i = 0; i < open_loans.size();) {
        if (open_loans[i].close_t == t) {
          auto& rec = out.arrivals[open_loans[i].arrival_index];
          rec.booked = rec.size * (price_prefix[t] - price_prefix[open_loans[i].open_t - 1]);
          rec.close_t = t;
          step_revenue += rec.booked;
          book_split(rec.booked);
          open_loans[i] = open_loans.back();
          open_loans.pop_back();
        } else {
          ++i;
        }
      }
    }

    out.ledger.book(step_revenue, split);
    out.alphas.push_back(alphas.empty() ? std::vector<R>{R(1)} : alphas);
    last_step_revenue = step_revenue;
    if (game && config.game.c_star > R(0)) {
      R signal = step_revenue;
      if (signal < config.game.revenue_floor) signal = config.game.revenue_floor;
      if (signal < config.game.c_star * supply) revenue_floor_held = false;
    }

    if (tracking) {
      // dead-beat by default: next posted supply = D(t) + headroom
      const R target = st.active_demand + headroom;
      tracker = tracker + config.tracking.step * (target - tracker);
    }
  }

  // loans still open at the horizon book their elapsed window only
  if (config.rate == RateMode::variable_interest && !open_loans.empty()) {
    R tail_revenue{};
    std::vector<R> split(curated ? alphas.size() : 1, R(0));
    for (const auto& ol : open_loans) {
      auto& rec = out.arrivals[ol.arrival_index];
      rec.booked = rec.size * (price_prefix[T] - price_prefix[ol.open_t - 1]);
      rec.close_t = T;
      rec.open_at_horizon = true;
      tail_revenue += rec.booked;
      if (curated) {
        const R s_alloc = pro_rata_supply(alphas, config.curators);
        for (std::size_t n = 0; n < alphas.size(); ++n)
          split[n] += rec.booked * alphas[n] * config.curators[n].capacity / s_alloc;
      } else {
        split[0] += rec.booked;
      }
      ++out.open_loans_at_horizon;
    }
    // attribute to the final step
    out.ledger.per_step.back() += tail_revenue;
    out.ledger.cumulative.add(tail_revenue);
    if (out.ledger.per_supplier.size() < split.size()) out.ledger.per_supplier.resize(split.size());
    for (std::size_t n = 0; n < split.size(); ++n) out.ledger.per_supplier[n].add(split[n]);
    out.warnings.push_back(std::to_string(out.open_loans_at_horizon) +
                           " loan(s) open at horizon; revenue booked for elapsed steps only");
  }

  if (game && !revenue_floor_held)
    out.warnings.push_back("minimum-protocol-revenue floor R(t) >= c* S(t) did not hold");
  return out;
}

template <typename R>
RunTrajectory<R> run_pooled_fixed(const EventStream<R>& stream, const R& supply, const R& kappa,
                                  long long horizon = 0) {
  EngineConfig<R> cfg;
  cfg.kappa = kappa;
  cfg.model = SupplyModel::pooled;
  cfg.rate = RateMode::fixed_interest;
  cfg.pooled_supply = supply;
  cfg.s_max = supply;
  return run_market(stream, cfg, horizon);
}

template <typename R>
RunTrajectory<R> run_curated_fixed(const EventStream<R>& stream, const EngineConfig<R>& base,
                                   long long horizon = 0) {
  EngineConfig<R> cfg = base;
  cfg.model = SupplyModel::curated;
  cfg.rate = RateMode::fixed_interest;
  return run_market(stream, cfg, horizon);
}

template <typename R>
RunTrajectory<R> run_variable(const EventStream<R>& stream, const EngineConfig<R>& base,
                              long long horizon = 0) {
  EngineConfig<R> cfg = base;
  cfg.rate = RateMode::variable_interest;
  return run_market(stream, cfg, horizon);
}

}  // namespace lendsim
