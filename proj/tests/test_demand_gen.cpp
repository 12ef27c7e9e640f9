#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>

#include "lendsim/assumptions.hpp"
#include "lendsim/demand_gen.hpp"
#include "lendsim/events.hpp"
#include "lendsim/market.hpp"

using namespace lendsim;

TEST_CASE("ramp stream: sizes, durations, induced demand") {
  auto s4 = gen_example1<double>(4);
  REQUIRE(s4.size() == 4);
  for (const auto& e : s4) {
    CHECK(e.size == doctest::Approx(0.25));
    CHECK(e.duration == 4);
  }
  auto s1 = gen_example1<double>(1);
  REQUIRE(s1.size() == 1);
  CHECK(s1[0].size == doctest::Approx(1.0));
  CHECK(s1[0].duration == 1);

  for (long long T : {3LL, 10LL, 25LL}) {
    auto s = gen_example1<double>(T);
    CHECK(active_demand(s, T) == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(static_cast<void>(gen_example1<double>(0)), std::invalid_argument);
}

TEST_CASE("small-loan stream: demand t/T^2 and per-loan exposure 1/T") {
  const long long T = 10;
  auto s = gen_example2<double>(T);
  REQUIRE(s.size() == 10);
  CHECK(active_demand(s, T) == doctest::Approx(0.1));
  for (long long t = 1; t <= T; ++t)
    CHECK(active_demand(s, t) == doctest::Approx(static_cast<double>(t) / (T * T)));

  // direct-summation oracle over the emitted events
  double exposure_sum = 0.0;
  for (const auto& e : s) {
    CHECK(e.size == doctest::Approx(1.0 / (T * T)));
    CHECK(e.size * static_cast<double>(e.duration) == doctest::Approx(1.0 / T));
    exposure_sum += e.size * static_cast<double>(e.duration);
  }
  CHECK(exposure_sum == doctest::Approx(1.0));

  auto s1 = gen_example2<double>(1);
  REQUIRE(s1.size() == 1);
  CHECK(s1[0].size == doctest::Approx(1.0));
  CHECK_THROWS_AS(static_cast<void>(gen_example2<double>(0)), std::invalid_argument);
}

TEST_CASE("large-loan stream: one big arrival then constant small ones") {
  const long long T = 10;
  auto s = gen_example3<double>(T, 0.1);
  REQUIRE(s.size() == 10);
  CHECK(s[0].size == doctest::Approx(0.9));
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].size == doctest::Approx(0.1));
  for (long long t = 1; t <= T; ++t)
    CHECK(active_demand(s, t) == doctest::Approx(0.9 + (t - 1) * 0.1));

  CHECK_THROWS_AS(static_cast<void>(gen_example3<double>(10, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(gen_example3<double>(10, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(static_cast<void>(gen_example3<double>(1, 0.5)), std::invalid_argument);
}

TEST_CASE("large-loan stream near delta -> 1: capacity admits only the head") {
  // sizes approach 1; after the first two fill the unit supply exactly,
  // everything else is refused
  const long long T = 12;
  auto s = gen_example3<double>(T, 0.95);
  DemandEngine<double> engine(s, T);
  long long rejected = 0;
  for (long long t = 1; t <= T; ++t) {
    engine.advance(1.0);
    if (engine.state().rejected) ++rejected;
  }
  CHECK(rejected == T - 2);
  CHECK(engine.state().active_demand == doctest::Approx(1.0));
}

TEST_CASE("stochastic generator is deterministic in (params, seed)") {
  StochasticDemandParams params;
  params.horizon = 2000;
  auto a = gen_stochastic(params, 42);
  auto b = gen_stochastic(params, 42);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].t == b[i].t);
    CHECK(a[i].size == b[i].size);
    CHECK(a[i].duration == b[i].duration);
  }
  auto c = gen_stochastic(params, 43);
  bool differs = c.size() != a.size();
  for (std::size_t i = 0; !differs && i < std::min(a.size(), c.size()); ++i)
    if (a[i].size != c[i].size) differs = true;
  CHECK(differs);
}

TEST_CASE("stochastic generator: degenerate tail rate gives a flat size walk") {
  StochasticDemandParams params;
  params.horizon = 3000;
  params.tail_rate = 1e9;
  auto s = gen_stochastic(params, 5);
  double max_inc = 0.0;
  double prev = -1.0;
  for (const auto& e : s) {
    if (e.t <= params.warmup_steps()) continue;  // warm-up loans have their own size
    if (prev >= 0.0) max_inc = std::max(max_inc, std::fabs(e.size - prev));
    prev = e.size;
  }
  CHECK(max_inc <= 1e-6);
}

TEST_CASE("stochastic generator satisfies its own validators") {
  StochasticDemandParams params;
  params.horizon = 30000;  // >= 1e4 arrivals
  auto s = gen_stochastic(params, 11);
  long long arrivals = 0;
  for (const auto& e : s)
    if (e.is_arrival()) ++arrivals;
  REQUIRE(arrivals >= 10000);

  const auto inc = check_bounded_increment(s, params.increment_scale, params.tail_rate, 2.0);
  CHECK(inc.pass);
  const auto reset = check_reset_condition(s, params.s_total, params.reset_epsilon, 2.0);
  CHECK(reset.pass);
}

TEST_CASE("stochastic stream respects event invariants and the demand cap") {
  StochasticDemandParams params;
  params.horizon = 5000;
  auto s = gen_stochastic(params, 3);
  CHECK_NOTHROW(validate_stream(s));

  DemandEngine<double> engine(s, params.horizon);
  double max_demand = 0.0;
  for (long long t = 1; t <= params.horizon; ++t) {
    engine.advance(1e9);
    max_demand = std::max(max_demand, engine.state().active_demand);
  }
  CHECK(max_demand <= params.demand_cap + 1e-9);

  // demand floor holds after the warm-up prefix
  DemandEngine<double> engine2(s, params.horizon);
  double min_demand = 1e9;
  for (long long t = 1; t <= params.horizon; ++t) {
    engine2.advance(1e9);
    if (t > params.warmup_steps()) min_demand = std::min(min_demand, engine2.state().active_demand);
  }
  CHECK(min_demand >= params.min_demand - 1e-12);
}

TEST_CASE("stochastic generator rejects infeasible configurations") {
  StochasticDemandParams params;
  params.demand_cap = params.min_demand + params.size_hi / 2;  // no room for a full-size loan
  CHECK_THROWS_WITH_AS(static_cast<void>(gen_stochastic(params, 1)),
                       doctest::Contains("infeasible"), std::invalid_argument);

  StochasticDemandParams negative;
  negative.tail_rate = -1.0;
  CHECK_THROWS_AS(static_cast<void>(gen_stochastic(negative, 1)), std::invalid_argument);
}
