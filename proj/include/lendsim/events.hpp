#pragma once

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "lendsim/numeric.hpp"

namespace lendsim {

// One loan action. Positive size opens a loan that stays active for
// `duration` steps; the matching departure of -size lands at t + duration.
// Negative sizes are departures and must carry duration 0.
template <typename R>
struct LoanEvent {
  long long t = 0;
  R size{};
  long long duration = 0;

  bool is_arrival() const { return size > R(0); }
};

template <typename R>
using EventStream = std::vector<LoanEvent<R>>;

// Enforces: times >= 1 and strictly increasing (one action per step),
// size != 0, departures have duration 0, arrivals have duration >= 0.
// Explicit departures must mirror an arrival expiring at that exact step.
template <typename R>
void validate_stream(const EventStream<R>& events) {
  long long prev_t = 0;
  for (const auto& e : events) {
    if (e.t < 1) throw std::invalid_argument("event time index must be >= 1");
    if (e.t <= prev_t)
      throw std::invalid_argument("duplicate or out-of-order time index " + std::to_string(e.t));
    prev_t = e.t;
    if (e.size == R(0)) throw std::invalid_argument("loan size must be nonzero");
    if (e.duration < 0) throw std::invalid_argument("loan duration must be >= 0");
    if (!e.is_arrival() && e.duration != 0)
      throw std::invalid_argument("departures must have duration 0");
  }
  for (const auto& e : events) {
    if (e.is_arrival()) continue;
    bool matched = false;
    for (const auto& a : events) {
      if (a.is_arrival() && a.t + a.duration == e.t && a.size == -e.size) {
        matched = true;
        break;
      }
    }
    if (!matched)
      throw std::invalid_argument("departure at t=" + std::to_string(e.t) +
                                  " does not mirror any arrival expiry");
  }
}

// D(t) by direct evaluation of the indicator sum over arrivals:
// sum of l_s over arrivals with s <= t < s + duration(s). Departures carry no
// information beyond the arrival's duration, so they are skipped here. The
// incremental engine representation is cross-checked against this in tests.
template <typename R>
R active_demand(const EventStream<R>& events, long long t) {
  validate_stream(events);
  R demand{};
  for (const auto& e : events) {
    if (!e.is_arrival()) continue;
    if (e.t <= t && t < e.t + e.duration) demand += e.size;
  }
  return demand;
}

template <typename R>
long long stream_horizon(const EventStream<R>& events) {
  long long h = 0;
  for (const auto& e : events) h = std::max(h, e.t);
  return h;
}

}  // namespace lendsim
