#include "lendsim/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lendsim {

std::vector<double> project_simplex_min_mass(const std::vector<double>& y, double floor_mass) {
  const std::size_t n = y.size();
  if (n == 0) throw std::invalid_argument("empty point");
  if (floor_mass < 0.0 || floor_mass * static_cast<double>(n) >= 1.0)
    throw std::invalid_argument("infeasible minimum mass: floor * dim must be < 1");

  double sum = 0.0;
  double min_c = y[0];
  for (double v : y) {
    sum += v;
    min_c = std::min(min_c, v);
  }
  if (std::fabs(sum - 1.0) <= 1e-12 && min_c >= floor_mass) return y;

  // shift by the floor and project onto the simplex of mass 1 - n*floor
  const double mass = 1.0 - floor_mass * static_cast<double>(n);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = y[i] - floor_mass;
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<double>());
  double cum = 0.0, theta = 0.0;
  std::size_t rho = 0;
  for (std::size_t j = 0; j < n; ++j) {
    cum += sorted[j];
    const double cand = (cum - mass) / static_cast<double>(j + 1);
    if (sorted[j] - cand > 0.0) {
      rho = j + 1;
      theta = cand;
    }
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::max(v[i] - theta, 0.0) + floor_mass;
  return out;
}

std::vector<double> md_simplex_step(const std::vector<double>& x, const std::vector<double>& grad,
                                    double eta, double floor_mass, double barrier_weight) {
  const std::size_t n = x.size();
  if (n == 0 || grad.size() != n) throw std::invalid_argument("dimension mismatch");
  if (floor_mass < 0.0 || floor_mass * static_cast<double>(n) >= 1.0)
    throw std::invalid_argument("infeasible minimum mass: floor * dim must be < 1");
  if (eta < 0.0) throw std::invalid_argument("step size must be >= 0");
  for (double g : grad)
    if (!std::isfinite(g)) throw std::domain_error("non-finite gradient");

  std::vector<double> score(n);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < n; ++c) {
    if (!(x[c] > 0.0)) throw std::invalid_argument("iterate must be strictly positive");
    double g = grad[c];
    if (barrier_weight > 0.0) g -= barrier_weight / x[c];
    score[c] = eta * g;
    best = std::min(best, score[c]);
  }
  std::vector<double> w(n);
  double z = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    w[c] = x[c] * std::exp(-(score[c] - best));
    z += w[c];
  }
  for (std::size_t c = 0; c < n; ++c) w[c] /= z;
  return project_simplex_min_mass(w, floor_mass);
}

CurvatureEstimate estimate_curvature(const std::function<double(double)>& loss, double lo,
                                     double hi, int samples) {
  CurvatureEstimate est;
  est.lo = lo;
  est.hi = hi;
  if (!(hi > lo)) throw std::invalid_argument("empty curvature domain");
  if (samples < 3) throw std::invalid_argument("need at least 3 samples");

  const double width = hi - lo;
  const double h2 = width * 1e-4;   // second-difference stencil
  const double h1 = width * 6e-6;   // first-difference stencil
  double min_abs_dd = std::numeric_limits<double>::infinity();
  double max_abs_dd = 0.0;
  double max_abs_d = 0.0;
  double scale = 0.0;
  int sign = 0;
  bool mixed = false;
  for (int i = 0; i < samples; ++i) {
    const double frac = (samples == 1) ? 0.5 : static_cast<double>(i) / (samples - 1);
    const double x = lo + frac * width;
    const double f0 = loss(x);
    double dd, d;
    if (x - h2 < lo) {  // one-sided stencils at the boundary, second order
      dd = (2 * f0 - 5 * loss(x + h2) + 4 * loss(x + 2 * h2) - loss(x + 3 * h2)) / (h2 * h2);
      d = (-3 * f0 + 4 * loss(x + h1) - loss(x + 2 * h1)) / (2 * h1);
    } else if (x + h2 > hi) {
      dd = (2 * f0 - 5 * loss(x - h2) + 4 * loss(x - 2 * h2) - loss(x - 3 * h2)) / (h2 * h2);
      d = (3 * f0 - 4 * loss(x - h1) + loss(x - 2 * h1)) / (2 * h1);
    } else {
      dd = (loss(x + h2) - 2 * f0 + loss(x - h2)) / (h2 * h2);
      d = (loss(x + h1) - loss(x - h1)) / (2 * h1);
    }
    scale = std::max(scale, std::fabs(f0));
    min_abs_dd = std::min(min_abs_dd, std::fabs(dd));
    max_abs_dd = std::max(max_abs_dd, std::fabs(dd));
    max_abs_d = std::max(max_abs_d, std::fabs(d));
    const int s = dd > 0 ? 1 : (dd < 0 ? -1 : 0);
    if (s != 0) {
      if (sign == 0)
        sign = s;
      else if (sign != s)
        mixed = true;
    }
  }
  est.grad_bound = max_abs_d;
  est.curvature_sign = mixed ? 0 : sign;
  // flat relative to the function scale counts as no curvature
  const double flat_tol = std::max(scale, 1.0) / (width * width) * 1e-7;
  if (mixed) {
    est.diagnostic = "second derivative changes sign over the domain";
    return est;
  }
  if (max_abs_dd <= flat_tol || min_abs_dd <= flat_tol) {
    est.diagnostic = "no usable curvature (mu ~ 0)";
    est.mu = 0.0;
    return est;
  }
  est.mu = min_abs_dd;
  est.ok = true;
  return est;
}

double hazan_bound(double grad_bound, double mu, double horizon) {
  if (grad_bound < 0.0) throw std::invalid_argument("gradient bound must be >= 0");
  if (!(mu > 0.0)) throw std::invalid_argument("curvature parameter must be > 0");
  if (horizon < 2.0) throw std::invalid_argument("horizon must be >= 2");
  return grad_bound * grad_bound / mu * std::log(horizon);
}

double zinkevich_bound(double diameter, double grad_bound, double horizon) {
  if (diameter < 0.0 || grad_bound < 0.0 || horizon < 0.0)
    throw std::invalid_argument("negative input");
  return 0.5 * (diameter * diameter + grad_bound * grad_bound) * std::sqrt(horizon);
}

double besbes_dynamic_bound(double grad_bound, double mu, double horizon, double path_length) {
  if (path_length < 0.0) throw std::invalid_argument("path length must be >= 0");
  return hazan_bound(grad_bound, mu, horizon) + grad_bound / mu * path_length;
}

}  // namespace lendsim
