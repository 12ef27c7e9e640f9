#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lendsim/assumptions.hpp"
#include "lendsim/demand_gen.hpp"
#include "lendsim/rng.hpp"

using namespace lendsim;

namespace {

EventStream<double> constant_stream(long long n, double size) {
  EventStream<double> s;
  for (long long t = 1; t <= n; ++t) s.push_back({t, size, 0});
  return s;
}

// increments drawn at stratified exponential quantiles, so the empirical tail
// sits exactly on e^{-K d}
EventStream<double> saturating_stream(long long pairs, double tail_rate) {
  EventStream<double> s;
  const double base = 0.5;
  long long t = 1;
  for (long long i = 0; i < pairs; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(pairs);
    const double mag = -std::log(1.0 - u) / tail_rate;
    s.push_back({t++, base, 0});
    s.push_back({t++, base + mag, 0});
  }
  return s;
}

}  // namespace

TEST_CASE("increment check: constant stream passes at any rate") {
  auto s = constant_stream(500, 0.25);
  for (double rate : {0.1, 10.0, 1000.0}) {
    const auto rep = check_bounded_increment(s, 0.01, rate);
    CHECK(rep.pass);
    for (double e : rep.empirical) CHECK(e == 0.0);
  }
}

TEST_CASE("increment check: one large jump fails a sharp tail") {
  auto s = gen_example3<double>(200, 0.05);  // jump of 0.9 between the first two sizes
  // at K = 40 a 0.9 increment has probability e^{-36}; observing one is
  // incompatible with the claimed tail at any sample size
  const auto strict = check_bounded_increment(s, 0.05, 40.0);
  CHECK_FALSE(strict.pass);
  const auto loose = check_bounded_increment(s, 0.05, 0.05);
  CHECK(loose.pass);
}

TEST_CASE("increment check: saturating fixture separates slack above and below 1") {
  auto s = saturating_stream(200000, 40.0);
  const auto above = check_bounded_increment(s, 0.02, 40.0, 1.3);
  CHECK(above.pass);
  const auto below = check_bounded_increment(s, 0.02, 40.0, 0.7);
  CHECK_FALSE(below.pass);
}

TEST_CASE("increment check rejects short streams") {
  auto s = constant_stream(10, 0.1);
  CHECK_THROWS_AS(static_cast<void>(check_bounded_increment(s, 0.1, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("reset check: whole-window exposures fail once the grid crosses log(slack)") {
  auto s = gen_example1<double>(1000);  // every exposure is exactly s_total
  // small epsilon puts a grid point just under 1, where the allowed tail is
  // well below the observed all-of-them frequency
  const auto rep = check_reset_condition(s, 1.0, 0.06);
  CHECK_FALSE(rep.pass);

  // large epsilon moves the whole grid past the exposures; nothing to flag
  const auto above = check_reset_condition(s, 1.0, 1.5);
  CHECK(above.pass);
}

TEST_CASE("reset check: zero-duration loans pass trivially") {
  auto s = constant_stream(200, 0.4);
  const auto rep = check_reset_condition(s, 1.0, 0.1);
  CHECK(rep.pass);
  for (double e : rep.empirical) CHECK(e == 0.0);
}

TEST_CASE("reset check: generated conforming stream passes") {
  StochasticDemandParams params;
  params.horizon = 20000;
  auto s = gen_stochastic(params, 19);
  const auto rep = check_reset_condition(s, params.s_total, params.reset_epsilon);
  CHECK(rep.pass);
}

TEST_CASE("concentration check: constant price path has zero deviation") {
  std::vector<double> prices(400, 0.7);
  std::vector<PricedLoan> loans;
  Rng rng(2);
  for (int i = 0; i < 200; ++i)
    loans.push_back({rng.uniform_int(1, 300), rng.uniform_int(1, 50)});
  const auto rep = check_variable_rate_concentration(prices, loans);
  CHECK(rep.pass);
}

TEST_CASE("concentration check: no positive-duration loans is a trivial pass") {
  std::vector<double> prices(50, 0.3);
  std::vector<PricedLoan> loans = {{5, 0}, {9, 0}};
  const auto rep = check_variable_rate_concentration(prices, loans);
  CHECK(rep.pass);
  CHECK(rep.sample_size == 0);
}

TEST_CASE("concentration check: independent-increment walk passes at slack 2") {
  // Monte-Carlo oracle: many independent price paths, each contributing loans
  Rng rng(31);
  const int paths = 100, per_path = 100, T = 512;
  int passes = 0;
  for (int p = 0; p < paths; ++p) {
    std::vector<double> prices(T);
    double level = 5.0;
    for (int t = 0; t < T; ++t) {
      level += rng.normal(0.0, 0.01);
      prices[t] = level;
    }
    std::vector<PricedLoan> loans;
    for (int i = 0; i < per_path; ++i)
      loans.push_back({rng.uniform_int(1, T - 64), rng.uniform_int(1, 48)});
    if (check_variable_rate_concentration(prices, loans).pass) ++passes;
  }
  CHECK(passes >= 95);  // 1e4 loans in total; light tails concentrate
}

TEST_CASE("concentration check: heavy-tailed increments fail") {
  Rng rng(77);
  const int T = 4096;
  std::vector<double> prices(T);
  double level = 50.0;
  for (int t = 0; t < T; ++t) {
    const double jump = rng.pareto(1.1, 0.005);
    level += (rng.uniform01() < 0.5 ? -jump : jump);
    prices[t] = level;
  }
  std::vector<PricedLoan> loans;
  for (int i = 0; i < 3000; ++i)
    loans.push_back({rng.uniform_int(1, T - 128), rng.uniform_int(1, 96)});
  const auto rep = check_variable_rate_concentration(prices, loans);
  CHECK_FALSE(rep.pass);
}
