#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lendsim/events.hpp"

namespace lendsim {

// Diagnostic verdict for one distributional assumption: empirical tail
// frequencies against the theoretical bound on a grid of thresholds. These
// are asymptotic tail statements, so the checks report rather than prove;
// `pass` means the empirical frequency stayed under bound * slack everywhere.
struct AssumptionReport {
  std::string assumption;
  std::string status = "not_applicable";  // pass | fail | not_applicable
  bool pass = false;
  long long sample_size = 0;
  double slack = 0.0;
  std::vector<double> thresholds;
  std::vector<double> empirical;
  std::vector<double> bound;
  std::string note;
};

inline constexpr int kTailGridPoints = 8;
inline constexpr double kTailGridSpan = 16.0;  // thresholds run from base to 16x base
inline constexpr double kDefaultSlack = 2.0;
// a threshold fails when its tail count has one-sided Poisson p-value below
// this, taking slack * bound as the allowed rate
inline constexpr double kTailPValue = 1e-4;

// |l_s - l_{s-1}| over consecutive arrivals against e^{-K d} on a threshold
// grid d in [delta, 16 delta].
AssumptionReport check_bounded_increment(const EventStream<double>& stream, double delta,
                                         double tail_rate, double slack = kDefaultSlack,
                                         long long min_events = 100);

// Loan exposure size * duration against e^{-c e'} * slack for thresholds
// e' * s_total, e' in [epsilon, 16 epsilon]; c is the tail-rate convention
// constant (default 1).
AssumptionReport check_reset_condition(const EventStream<double>& stream, double s_total,
                                       double epsilon, double slack = kDefaultSlack,
                                       double rate_constant = 1.0);

struct PricedLoan {
  long long t = 0;       // arrival step (1-based)
  long long duration = 0;
};

// Concentration of the integrated posted price over each loan window against
// its fixed-rate equivalent: the per-step-averaged deviation
// |sum_{s=t}^{t+tau} p_s - (tau+1) p_t| / tau is compared with
// (1+e) sigma_p sqrt(tau) for e on a grid. sigma_p defaults to the scale of
// the deviation statistic estimated from the realized path; constant price
// paths pass with zero deviation.
AssumptionReport check_variable_rate_concentration(const std::vector<double>& prices,
                                                   const std::vector<PricedLoan>& loans,
                                                   std::optional<double> sigma_p = std::nullopt,
                                                   double epsilon_base = 0.5,
                                                   double slack = kDefaultSlack);

}  // namespace lendsim
