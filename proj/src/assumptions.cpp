#include "lendsim/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lendsim {

namespace {

std::vector<double> log_grid(double base) {
  std::vector<double> g(kTailGridPoints);
  for (int i = 0; i < kTailGridPoints; ++i)
    g[i] = base * std::pow(kTailGridSpan, static_cast<double>(i) / (kTailGridPoints - 1));
  return g;
}

// P[X >= count] for X ~ Poisson(lambda); one-sided evidence that the observed
// tail count is inconsistent with slack * bound.
double poisson_upper_tail(double count, double lambda) {
  if (count <= lambda || count < 0.5) return 1.0;
  if (lambda <= 0.0) return 0.0;
  if (lambda > 1e4 || count > 1e4) {
    const double z = (count - lambda) / std::sqrt(lambda);
    return 0.5 * std::erfc(z / std::sqrt(2.0));
  }
  const long long c = static_cast<long long>(std::llround(count));
  double log_term = -lambda + c * std::log(lambda) - std::lgamma(static_cast<double>(c) + 1.0);
  double term = std::exp(log_term);
  double sum = 0.0;
  for (long long k = c; k < c + 50000; ++k) {
    sum += term;
    term *= lambda / static_cast<double>(k + 1);
    if (term < sum * 1e-12) break;
  }
  return std::min(1.0, sum);
}

// Frequencies within sampling noise of slack * bound pass; a threshold fails
// only when its count is statistically incompatible with the allowed tail.
void finish(AssumptionReport& rep, long long samples) {
  bool ok = true;
  for (std::size_t i = 0; i < rep.thresholds.size(); ++i) {
    const double count = rep.empirical[i] * static_cast<double>(samples);
    const double allowed = rep.slack * rep.bound[i] * static_cast<double>(samples);
    if (poisson_upper_tail(count, allowed) < kTailPValue) ok = false;
  }
  rep.pass = ok;
  rep.status = ok ? "pass" : "fail";
}

}  // namespace

AssumptionReport check_bounded_increment(const EventStream<double>& stream, double delta,
                                         double tail_rate, double slack, long long min_events) {
  if (!(delta > 0.0) || !(tail_rate > 0.0)) throw std::invalid_argument("need delta > 0, K > 0");
  if (static_cast<long long>(stream.size()) < min_events)
    throw std::invalid_argument("stream too short for the increment check (need >= " +
                                std::to_string(min_events) + " events)");
  std::vector<double> sizes;
  for (const auto& e : stream)
    if (e.is_arrival()) sizes.push_back(e.size);

  AssumptionReport rep;
  rep.assumption = "bounded-increment";
  rep.slack = slack;
  rep.sample_size = static_cast<long long>(sizes.size()) - 1;
  rep.thresholds = log_grid(delta);
  rep.empirical.assign(rep.thresholds.size(), 0.0);
  rep.bound.resize(rep.thresholds.size());
  for (std::size_t i = 0; i < rep.thresholds.size(); ++i)
    rep.bound[i] = std::exp(-tail_rate * rep.thresholds[i]);
  if (rep.sample_size < 1) {
    rep.note = "fewer than two arrivals";
    rep.status = "not_applicable";
    return rep;
  }
  for (std::size_t s = 1; s < sizes.size(); ++s) {
    const double inc = std::fabs(sizes[s] - sizes[s - 1]);
    for (std::size_t i = 0; i < rep.thresholds.size(); ++i)
      if (inc > rep.thresholds[i]) rep.empirical[i] += 1.0;
  }
  for (double& e : rep.empirical) e /= static_cast<double>(rep.sample_size);
  finish(rep, rep.sample_size);
  return rep;
}

AssumptionReport check_reset_condition(const EventStream<double>& stream, double s_total,
                                       double epsilon, double slack, double rate_constant) {
  if (!(s_total > 0.0) || !(epsilon > 0.0) || !(rate_constant > 0.0))
    throw std::invalid_argument("need s_total > 0, epsilon > 0, rate constant > 0");
  AssumptionReport rep;
  rep.assumption = "reset-condition";
  rep.slack = slack;
  rep.thresholds = log_grid(epsilon);
  rep.empirical.assign(rep.thresholds.size(), 0.0);
  rep.bound.resize(rep.thresholds.size());
  for (std::size_t i = 0; i < rep.thresholds.size(); ++i)
    rep.bound[i] = std::exp(-rate_constant * rep.thresholds[i]);

  long long arrivals = 0;
  for (const auto& e : stream) {
    if (!e.is_arrival()) continue;
    ++arrivals;
    const double exposure = e.size * static_cast<double>(e.duration);
    for (std::size_t i = 0; i < rep.thresholds.size(); ++i)
      if (exposure > rep.thresholds[i] * s_total) rep.empirical[i] += 1.0;
  }
  rep.sample_size = arrivals;
  if (arrivals == 0) {
    rep.note = "no arrivals";
    rep.status = "not_applicable";
    return rep;
  }
  for (double& e : rep.empirical) e /= static_cast<double>(arrivals);
  finish(rep, arrivals);
  return rep;
}

AssumptionReport check_variable_rate_concentration(const std::vector<double>& prices,
                                                   const std::vector<PricedLoan>& loans,
                                                   std::optional<double> sigma_p,
                                                   double epsilon_base, double slack) {
  AssumptionReport rep;
  rep.assumption = "variable-rate-concentration";
  rep.slack = slack;
  rep.thresholds = log_grid(epsilon_base);

  const long long horizon = static_cast<long long>(prices.size());
  struct Stat {
    double normalized_dev;  // |integrated - (tau+1) p_t| / tau
    double root_tau;
  };
  std::vector<Stat> stats;
  for (const auto& loan : loans) {
    if (loan.duration < 1 || loan.t < 1 || loan.t > horizon) continue;
    const long long close = std::min(loan.t + loan.duration, horizon);
    double integrated = 0.0;
    for (long long s = loan.t; s <= close; ++s) integrated += prices[s - 1];
    const long long ticks = close - loan.t + 1;
    const double dev = std::fabs(integrated - static_cast<double>(ticks) * prices[loan.t - 1]);
    const double tau = static_cast<double>(ticks - 1);
    if (tau < 1.0) continue;
    stats.push_back({dev / tau, std::sqrt(tau)});
  }
  rep.sample_size = static_cast<long long>(stats.size());
  if (stats.empty()) {
    rep.note = "no loans with positive duration; trivially concentrated";
    rep.pass = true;
    rep.status = "pass";
    rep.empirical.assign(rep.thresholds.size(), 0.0);
    rep.bound.assign(rep.thresholds.size(), 1.0);
    return rep;
  }

  double sigma = 0.0;
  if (sigma_p) {
    sigma = *sigma_p;
  } else {
    // robust scale of the per-sqrt(tau) deviation; a median-based estimate
    // keeps rare huge excursions in the tail instead of inflating the scale
    std::vector<double> scaled;
    scaled.reserve(stats.size());
    for (const auto& s : stats) scaled.push_back(s.normalized_dev / s.root_tau);
    std::nth_element(scaled.begin(), scaled.begin() + scaled.size() / 2, scaled.end());
    const double med = scaled[scaled.size() / 2];
    // |N(0,s)| has median 0.6745 s
    sigma = med / 0.6745;
  }
  rep.note = "sigma_p = " + std::to_string(sigma);
  rep.empirical.assign(rep.thresholds.size(), 0.0);
  rep.bound.resize(rep.thresholds.size());
  if (sigma == 0.0) {
    // constant price path: every deviation is exactly zero
    bool all_zero = true;
    for (const auto& s : stats)
      if (s.normalized_dev != 0.0) all_zero = false;
    rep.pass = all_zero;
    rep.status = all_zero ? "pass" : "fail";
    rep.bound.assign(rep.thresholds.size(), 0.0);
    return rep;
  }
  for (std::size_t i = 0; i < rep.thresholds.size(); ++i)
    rep.bound[i] = std::exp(-rep.thresholds[i]);
  for (const auto& s : stats)
    for (std::size_t i = 0; i < rep.thresholds.size(); ++i)
      if (s.normalized_dev > (1.0 + rep.thresholds[i]) * sigma * s.root_tau)
        rep.empirical[i] += 1.0;
  for (double& e : rep.empirical) e /= static_cast<double>(stats.size());
  finish(rep, static_cast<long long>(stats.size()));
  return rep;
}

}  // namespace lendsim
