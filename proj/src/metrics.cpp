#include "lendsim/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace lendsim {

namespace {

double replay_fixed_revenue(const EventStream<double>& stream, double kappa, double supply,
                            long long horizon) {
  DemandEngine<double> engine(stream, horizon);
  Accumulator<double> total;
  for (long long t = 1; t <= horizon; ++t) {
    const LoanEvent<double> ev = engine.advance(supply);
    const auto& st = engine.state();
    if (ev.is_arrival() && !st.rejected)
      total.add(kappa * st.utilization * static_cast<double>(ev.duration) * ev.size);
  }
  return total.value();
}

}  // namespace

StaticBenchmark hindsight_static_optimal(const EventStream<double>& stream, double kappa,
                                         double s_lo, double s_hi, int grid, int refine_rounds) {
  validate_stream(stream);
  if (!(s_lo > 0.0) || s_lo > s_hi) throw std::invalid_argument("bad supply bounds");
  if (grid < 2) throw std::invalid_argument("grid too small");
  const long long horizon = stream_horizon(stream);

  // demand levels reachable without rejections are where acceptance flips
  std::set<double> candidates;
  {
    std::map<long long, double> expiry;
    double demand = 0.0;
    for (const auto& e : stream) {
      if (!e.is_arrival()) continue;
      for (auto it = expiry.begin(); it != expiry.end() && it->first <= e.t;) {
        demand -= it->second;
        it = expiry.erase(it);
      }
      demand += e.size;
      if (e.duration > 0) expiry[e.t + e.duration] += e.size;
      if (demand >= s_lo && demand <= s_hi) candidates.insert(demand);
    }
  }
  for (int i = 0; i < grid; ++i)
    candidates.insert(s_lo + (s_hi - s_lo) * static_cast<double>(i) / (grid - 1));

  StaticBenchmark best;
  best.revenue = -std::numeric_limits<double>::infinity();
  for (double s : candidates) {
    const double r = replay_fixed_revenue(stream, kappa, s, horizon);
    if (r > best.revenue) {
      best.revenue = r;
      best.supply = s;
    }
  }
  double width = (s_hi - s_lo) / (grid - 1);
  for (int round = 0; round < refine_rounds; ++round) {
    const double lo = std::max(s_lo, best.supply - width);
    const double hi = std::min(s_hi, best.supply + width);
    for (int i = 0; i <= 32; ++i) {
      const double s = lo + (hi - lo) * i / 32.0;
      const double r = replay_fixed_revenue(stream, kappa, s, horizon);
      if (r > best.revenue) {
        best.revenue = r;
        best.supply = s;
      }
    }
    width /= 16.0;
  }
  if (!std::isfinite(best.revenue)) {
    best.revenue = 0.0;
    best.supply = s_lo;
  }
  return best;
}

namespace {

struct BruteState {
  long long t;
  std::uint32_t accepted_mask;
  bool operator<(const BruteState& o) const {
    return t != o.t ? t < o.t : accepted_mask < o.accepted_mask;
  }
};

struct BruteContext {
  const std::vector<LoanEvent<double>>* arrivals;  // indexed 0..k-1
  std::map<long long, int> arrival_at;             // time -> arrival index
  const std::vector<double>* grid;
  double kappa;
  long long horizon;
  std::map<BruteState, std::pair<double, std::pair<int, int>>> memo;  // value, (choice, grid idx)
};

double demand_at(const BruteContext& ctx, std::uint32_t mask, long long t) {
  double d = 0.0;
  for (std::size_t i = 0; i < ctx.arrivals->size(); ++i) {
    if (!(mask & (1u << i))) continue;
    const auto& a = (*ctx.arrivals)[i];
    if (a.t <= t && t < a.t + a.duration) d += a.size;
  }
  return d;
}

double brute_solve(BruteContext& ctx, long long t, std::uint32_t mask) {
  if (t > ctx.horizon) return 0.0;
  const BruteState key{t, mask};
  auto it = ctx.memo.find(key);
  if (it != ctx.memo.end()) return it->second.first;

  double best = -std::numeric_limits<double>::infinity();
  int best_choice = 0, best_grid = -1;
  auto at = ctx.arrival_at.find(t);
  if (at == ctx.arrival_at.end()) {
    best = brute_solve(ctx, t + 1, mask);
  } else {
    const int idx = at->second;
    const auto& loan = (*ctx.arrivals)[idx];
    // reject branch: any supply works, none earns here
    best = brute_solve(ctx, t + 1, mask);
    // accept branches, one per feasible grid supply
    const double d_before = demand_at(ctx, mask, t);
    const double d_after = d_before + loan.size;
    for (std::size_t g = 0; g < ctx.grid->size(); ++g) {
      const double s = (*ctx.grid)[g];
      if (!(s > 0.0) || d_after > s + 1e-12) continue;
      const double price = ctx.kappa * std::min(d_after / s, 1.0);
      const double value = price * static_cast<double>(loan.duration) * loan.size +
                           brute_solve(ctx, t + 1, mask | (1u << idx));
      if (value > best) {
        best = value;
        best_choice = 1;
        best_grid = static_cast<int>(g);
      }
    }
  }
  ctx.memo[key] = {best, {best_choice, best_grid}};
  return best;
}

}  // namespace

BruteforceResult hindsight_bruteforce(const EventStream<double>& stream, double kappa,
                                      const std::vector<double>& supply_grid, long long horizon) {
  validate_stream(stream);
  if (horizon > 8) throw std::invalid_argument("brute-force oracle budget: horizon must be <= 8");
  if (supply_grid.size() > 21)
    throw std::invalid_argument("brute-force oracle budget: at most 21 supply levels");
  if (supply_grid.empty()) throw std::invalid_argument("empty supply grid");

  BruteContext ctx;
  std::vector<LoanEvent<double>> arrivals;
  for (const auto& e : stream)
    if (e.is_arrival() && e.t <= horizon) arrivals.push_back(e);
  if (arrivals.size() > 20) throw std::invalid_argument("brute-force oracle budget: too many loans");
  ctx.arrivals = &arrivals;
  for (std::size_t i = 0; i < arrivals.size(); ++i)
    ctx.arrival_at[arrivals[i].t] = static_cast<int>(i);
  ctx.grid = &supply_grid;
  ctx.kappa = kappa;
  ctx.horizon = horizon;

  BruteforceResult res;
  res.revenue = brute_solve(ctx, 1, 0);

  // reconstruct one optimal supply path; idle steps post the largest level
  res.supply_path.assign(horizon, supply_grid.back());
  long long t = 1;
  std::uint32_t mask = 0;
  while (t <= horizon) {
    auto it = ctx.memo.find(BruteState{t, mask});
    if (it == ctx.memo.end()) break;
    const auto [choice, gidx] = it->second.second;
    auto at = ctx.arrival_at.find(t);
    if (at != ctx.arrival_at.end() && choice == 1 && gidx >= 0) {
      res.supply_path[t - 1] = supply_grid[gidx];
      mask |= 1u << at->second;
    }
    ++t;
  }
  return res;
}

RegretReport build_regret_report(const RunTrajectory<double>& run,
                                 const EventStream<double>& stream, double kappa, RateMode rate,
                                 long long horizon, std::optional<double> benchmark_cap,
                                 double s_lo, double s_hi, bool with_static) {
  RegretReport rep;
  rep.per_step_alg.assign(run.ledger.per_step.begin(), run.ledger.per_step.end());
  rep.r_alg = run.ledger.total();
  rep.open_loans_at_horizon = run.open_loans_at_horizon;
  for (const auto& a : run.arrivals)
    if (!a.accepted) ++rep.rejected_loans;

  // per-step maxima: each admitted arrival's full-price value, at its booking
  // step (arrival for fixed, close for variable)
  std::optional<double> cap = benchmark_cap;
  rep.per_step_max.assign(rep.per_step_alg.size(), 0.0);
  {
    std::map<long long, double> expiry;
    double demand = 0.0;
    std::vector<double> benchmark_supply;
    for (const auto& e : stream) {
      if (!e.is_arrival() || e.t > horizon) continue;
      for (auto it = expiry.begin(); it != expiry.end() && it->first <= e.t;) {
        demand -= it->second;
        it = expiry.erase(it);
      }
      if (cap && demand + e.size > *cap) continue;
      demand += e.size;
      if (e.duration > 0) expiry[e.t + e.duration] += e.size;
      benchmark_supply.push_back(demand);
      if (rate == RateMode::fixed_interest) {
        rep.per_step_max[e.t - 1] += kappa * static_cast<double>(e.duration) * e.size;
      } else {
        const long long close = std::min(e.t + e.duration, horizon);
        const long long ticks = close - e.t + 1;
        rep.per_step_max[close - 1] += kappa * static_cast<double>(ticks) * e.size;
      }
    }
    rep.path_length = benchmark_supply.size() >= 2 ? path_length(benchmark_supply) : 0.0;
  }
  Accumulator<double> star;
  for (double v : rep.per_step_max) star.add(v);
  rep.r_star = star.value();
  rep.regret = rep.r_star - rep.r_alg;
  rep.dynamic_regret = dynamic_regret(rep.per_step_max, rep.per_step_alg);
  rep.competitive_ratio = rep.r_star == 0.0 && rep.r_alg == 0.0
                              ? 1.0
                              : competitive_ratio(rep.r_alg, rep.r_star);

  if (with_static && rate == RateMode::fixed_interest) {
    const StaticBenchmark sb = hindsight_static_optimal(stream, kappa, s_lo, s_hi);
    rep.r_star_static = sb.revenue;
    rep.s_star_static = sb.supply;
    rep.static_regret = sb.revenue - rep.r_alg;
    rep.residual = rep.r_star - sb.revenue;
  }
  return rep;
}

namespace {

// Lawson-Hanson active-set NNLS for a handful of unknowns.
std::vector<double> nnls(const std::vector<std::vector<double>>& a, const std::vector<double>& y) {
  const std::size_t m = a.size();
  const std::size_t n = m ? a[0].size() : 0;
  std::vector<bool> passive(n, false);
  std::vector<double> x(n, 0.0);

  auto residual = [&]() {
    std::vector<double> r(m);
    for (std::size_t i = 0; i < m; ++i) {
      double v = y[i];
      for (std::size_t j = 0; j < n; ++j) v -= a[i][j] * x[j];
      r[i] = v;
    }
    return r;
  };
  auto solve_passive = [&](std::vector<double>& z) {
    std::vector<std::size_t> idx;
    for (std::size_t j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    const std::size_t k = idx.size();
    z.assign(n, 0.0);
    if (k == 0) return;
    std::vector<std::vector<double>> g(k, std::vector<double>(k + 1, 0.0));
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = 0; q < k; ++q)
        for (std::size_t i = 0; i < m; ++i) g[p][q] += a[i][idx[p]] * a[i][idx[q]];
      for (std::size_t i = 0; i < m; ++i) g[p][k] += a[i][idx[p]] * y[i];
    }
    for (std::size_t c = 0; c < k; ++c) {  // gaussian elimination, partial pivot
      std::size_t piv = c;
      for (std::size_t r2 = c + 1; r2 < k; ++r2)
        if (std::fabs(g[r2][c]) > std::fabs(g[piv][c])) piv = r2;
      std::swap(g[c], g[piv]);
      if (std::fabs(g[c][c]) < 1e-14) continue;
      for (std::size_t r2 = 0; r2 < k; ++r2) {
        if (r2 == c) continue;
        const double f = g[r2][c] / g[c][c];
        for (std::size_t cc = c; cc <= k; ++cc) g[r2][cc] -= f * g[c][cc];
      }
    }
    for (std::size_t c = 0; c < k; ++c)
      z[idx[c]] = std::fabs(g[c][c]) < 1e-14 ? 0.0 : g[c][k] / g[c][c];
  };

  for (int outer = 0; outer < 200; ++outer) {
    const std::vector<double> r = residual();
    double best_w = 0.0;
    std::size_t best_j = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (passive[j]) continue;
      double w = 0.0;
      for (std::size_t i = 0; i < m; ++i) w += a[i][j] * r[i];
      if (w > best_w + 1e-12) {
        best_w = w;
        best_j = j;
      }
    }
    if (best_j == n) break;
    passive[best_j] = true;

    for (int inner = 0; inner < 200; ++inner) {
      std::vector<double> z;
      solve_passive(z);
      bool all_positive = true;
      for (std::size_t j = 0; j < n; ++j)
        if (passive[j] && z[j] <= 0.0) all_positive = false;
      if (all_positive) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (!passive[j] || z[j] > 0.0) continue;
        const double denom = x[j] - z[j];
        if (denom > 1e-15) alpha = std::min(alpha, x[j] / denom);
      }
      for (std::size_t j = 0; j < n; ++j) {
        if (!passive[j]) continue;
        x[j] += alpha * (z[j] - x[j]);
        if (x[j] <= 1e-12) {
          x[j] = 0.0;
          passive[j] = false;
        }
      }
    }
  }
  return x;
}

}  // namespace

ScalingFit fit_scaling(const std::vector<double>& horizons, const std::vector<double>& values) {
  if (horizons.size() != values.size()) throw std::invalid_argument("length mismatch");
  if (horizons.size() < 5) throw std::invalid_argument("need at least 5 horizons");
  for (std::size_t i = 0; i + 1 < horizons.size(); ++i)
    if (!(horizons[i] < horizons[i + 1]))
      throw std::invalid_argument("horizons must be strictly increasing");
  if (!(horizons.front() > 0.0) || horizons.back() / horizons.front() < 100.0)
    throw std::invalid_argument("horizon grid must span at least two decades");

  ScalingFit fit;
  fit.horizons = horizons;
  fit.values = values;
  fit.basis_labels = {"1", "log T", "(log T)^2", "(log T)^3", "T"};

  const std::size_t m = horizons.size();
  std::vector<std::vector<double>> a(m, std::vector<double>(5));
  for (std::size_t i = 0; i < m; ++i) {
    const double lt = std::log(horizons[i]);
    a[i] = {1.0, lt, lt * lt, lt * lt * lt, horizons[i]};
  }
  fit.coeffs = nnls(a, values);

  double res = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double v = values[i];
    for (std::size_t j = 0; j < 5; ++j) v -= a[i][j] * fit.coeffs[j];
    res += v * v;
  }
  fit.residual_norm = std::sqrt(res);

  const double lt = std::log(horizons.back());
  const std::array<double, 5> basis_at_max = {1.0, lt, lt * lt, lt * lt * lt, horizons.back()};
  double best = -1.0;
  std::size_t best_j = 0;
  for (std::size_t j = 0; j < 5; ++j) {
    const double contrib = fit.coeffs[j] * basis_at_max[j];
    if (contrib > best) {
      best = contrib;
      best_j = j;
    }
  }
  fit.dominant = fit.basis_labels[best_j];
  return fit;
}

}  // namespace lendsim
