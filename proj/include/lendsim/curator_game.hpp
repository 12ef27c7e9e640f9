#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lendsim/market.hpp"
#include "lendsim/numeric.hpp"

namespace lendsim {

// Which leg of the allocation the cost is charged on. The written profit uses
// idle inventory, C(1 - alpha); under that convention the profit gradient in
// alpha is strictly positive and every curator drifts to full allocation.
// Charging deployed inventory, C(alpha), is what makes the low-cost condition
// C'(0) <= c* S_n bite and produces the cost-perturbed interior equilibrium,
// so the game defaults to `deployed`. Both are supported.
enum class CostConvention { deployed, idle };

template <typename R>
void validate_allocations(const std::vector<R>& alphas) {
  for (const auto& a : alphas)
    if (!(a > R(0)) || a > R(1))
      throw std::domain_error("allocations must lie in (0, 1]");
}

template <typename R>
R pro_rata_supply(const std::vector<R>& alphas, const std::vector<CuratorProfile<R>>& profiles) {
  if (alphas.size() != profiles.size()) throw std::invalid_argument("size mismatch");
  R s{};
  for (std::size_t m = 0; m < alphas.size(); ++m) s += alphas[m] * profiles[m].capacity;
  if (!(s > R(0))) throw std::domain_error("all-zero allocation");
  return s;
}

// pi_n = (alpha_n S_n / sum_m alpha_m S_m) R - C_n(cost argument)
template <typename R>
R curator_profit(std::size_t n, const std::vector<R>& alphas, const R& revenue,
                 const std::vector<CuratorProfile<R>>& profiles,
                 CostConvention convention = CostConvention::idle) {
  if (n >= alphas.size()) throw std::invalid_argument("curator index out of range");
  if (revenue < R(0)) throw std::invalid_argument("revenue must be >= 0");
  validate_allocations(alphas);
  const R supply = pro_rata_supply(alphas, profiles);
  const R share = alphas[n] * profiles[n].capacity / supply;
  const R cost_arg = convention == CostConvention::idle ? R(1) - alphas[n] : alphas[n];
  return share * revenue - profiles[n].cost.value(cost_arg);
}

// d pi_n / d alpha_n holding the other allocations fixed
template <typename R>
R curator_profit_grad(std::size_t n, const std::vector<R>& alphas, const R& revenue,
                      const std::vector<CuratorProfile<R>>& profiles,
                      CostConvention convention = CostConvention::idle) {
  if (n >= alphas.size()) throw std::invalid_argument("curator index out of range");
  validate_allocations(alphas);
  const R supply = pro_rata_supply(alphas, profiles);
  const R s_n = profiles[n].capacity;
  const R s_rest = supply - alphas[n] * s_n;
  const R marginal_revenue = revenue * s_n * s_rest / (supply * supply);
  if (convention == CostConvention::idle)
    return marginal_revenue + profiles[n].cost.deriv(R(1) - alphas[n]);
  return marginal_revenue - profiles[n].cost.deriv(alphas[n]);
}

template <typename R>
struct GameOptions {
  R alpha_min = scalar_ops<R>::from_ratio(1, 1000);  // projection floor on (0, 1]
  R eta_cap = R(1);                                  // per-step movement cap
  R mu_floor = scalar_ops<R>::from_ratio(1, 20);     // curvature floor for the 1/(mu t) schedule
  CostConvention convention = CostConvention::deployed;
};

// One simultaneous projected gradient-ascent round: every curator evaluates
// its own profit gradient at the current joint allocation, then all move with
// step min(eta_cap, 1/(mu_n t)) and project back onto [alpha_min, 1].
template <typename R>
void pro_rata_game_step(std::vector<R>& alphas, const std::vector<CuratorProfile<R>>& profiles,
                        const R& revenue, long long t, const GameOptions<R>& opt) {
  if (t < 1) throw std::invalid_argument("round index must be >= 1");
  const std::size_t n_curators = alphas.size();
  std::vector<R> grads(n_curators);
  for (std::size_t n = 0; n < n_curators; ++n)
    grads[n] = curator_profit_grad(n, alphas, revenue, profiles, opt.convention);
  for (std::size_t n = 0; n < n_curators; ++n) {
    R mu = profiles[n].cost.curvature();
    if (mu < opt.mu_floor) mu = opt.mu_floor;
    R eta = R(1) / (mu * R(t));
    if (eta > opt.eta_cap) eta = opt.eta_cap;
    R next = alphas[n] + eta * grads[n];
    if (next < opt.alpha_min) next = opt.alpha_min;
    if (next > R(1)) next = R(1);
    alphas[n] = next;
  }
}

// Low-cost membership per the curator-cost conditions: C'_n(0) <= c_star S_n.
template <typename R>
std::size_t count_low_cost(const std::vector<CuratorProfile<R>>& profiles, const R& c_star) {
  std::size_t k = 0;
  for (const auto& p : profiles)
    if (p.cost.deriv(R(0)) <= c_star * p.capacity) ++k;
  return k;
}

}  // namespace lendsim
