#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lendsim {

enum class StepKind { inverse_t_strongly_convex, inverse_sqrt_t };

// eta_t = scale / t for curvature-driven schedules, scale / sqrt(t) otherwise.
struct StepSchedule {
  StepKind kind = StepKind::inverse_t_strongly_convex;
  double scale = 1.0;

  double eta(long long t) const {
    if (t < 1) throw std::invalid_argument("round index must be >= 1");
    if (scale <= 0.0) throw std::invalid_argument("step scale must be > 0");
    if (kind == StepKind::inverse_t_strongly_convex) return scale / static_cast<double>(t);
    return scale / std::sqrt(static_cast<double>(t));
  }
};

inline double clamp_interval(double x, double lo, double hi) {
  return x < lo ? lo : (x > hi ? hi : x);
}

// Projected gradient step on an interval; `grad` is the loss gradient.
inline double ogd_step(double x, double grad, long long t, const StepSchedule& schedule,
                       double lo, double hi) {
  if (!std::isfinite(grad)) throw std::domain_error("non-finite gradient");
  if (x < lo || x > hi) throw std::invalid_argument("iterate outside its domain");
  return clamp_interval(x - schedule.eta(t) * grad, lo, hi);
}

// Euclidean projection onto {w : sum w = 1, w_c >= floor}. Already-feasible
// points are returned unchanged, so applying the projection twice is the
// identity bit-for-bit.
std::vector<double> project_simplex_min_mass(const std::vector<double>& y, double floor_mass);

// Entropic mirror-descent (exponentiated-gradient) update with a hard
// minimum-mass projection standing in for a barrier term. An explicit
// log-barrier weight can be supplied instead of (or on top of) the floor.
std::vector<double> md_simplex_step(const std::vector<double>& x, const std::vector<double>& grad,
                                    double eta, double floor_mass, double barrier_weight = 0.0);

struct CurvatureEstimate {
  double mu = 0.0;          // min |f''| over the sampled domain
  double grad_bound = 0.0;  // max |f'|
  double lo = 0.0, hi = 0.0;
  int curvature_sign = 0;  // sign of f'' when uniform
  bool ok = false;
  std::string diagnostic;
};

// Central-difference scan of a 1-d loss over [lo, hi]. Rejects losses whose
// second derivative changes sign or vanishes on the grid.
CurvatureEstimate estimate_curvature(const std::function<double(double)>& loss, double lo,
                                     double hi, int samples);

// Leading-order regret expressions with constant 1; used for shape
// comparisons, never as absolute truth.
double hazan_bound(double grad_bound, double mu, double horizon);
double zinkevich_bound(double diameter, double grad_bound, double horizon);
double besbes_dynamic_bound(double grad_bound, double mu, double horizon, double path_length);

}  // namespace lendsim
