#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>

#include "lendsim/events.hpp"
#include "lendsim/market.hpp"
#include "lendsim/pricing.hpp"
#include "lendsim/rng.hpp"

using namespace lendsim;

TEST_CASE("active demand: direct indicator evaluation") {
  EventStream<double> one = {{1, 0.3, 2}};
  CHECK(active_demand(one, 1) == doctest::Approx(0.3));
  CHECK(active_demand(one, 2) == doctest::Approx(0.3));
  CHECK(active_demand(one, 3) == doctest::Approx(0.0));

  EventStream<double> empty;
  for (long long t = 1; t <= 5; ++t) CHECK(active_demand(empty, t) == 0.0);
}

TEST_CASE("active demand: ramp stream gives D(t) = t/T") {
  const long long T = 8;
  EventStream<double> stream;
  for (long long t = 1; t <= T; ++t) stream.push_back({t, 1.0 / T, T});
  for (long long t = 1; t <= T; ++t)
    CHECK(active_demand(stream, t) == doctest::Approx(static_cast<double>(t) / T));
}

TEST_CASE("stream validation rejects malformed ledgers") {
  EventStream<double> dup = {{1, 0.1, 1}, {1, 0.2, 1}};
  CHECK_THROWS_AS(validate_stream(dup), std::invalid_argument);

  EventStream<double> zero = {{1, 0.0, 1}};
  CHECK_THROWS_AS(validate_stream(zero), std::invalid_argument);

  EventStream<double> neg_dur = {{1, -0.1, 3}};
  CHECK_THROWS_AS(validate_stream(neg_dur), std::invalid_argument);

  // explicit departure must mirror an arrival expiry
  EventStream<double> orphan = {{1, 0.5, 5}, {2, -0.4, 0}};
  CHECK_THROWS_AS(validate_stream(orphan), std::invalid_argument);
  EventStream<double> mirrored = {{1, 0.5, 2}, {3, -0.5, 0}};
  CHECK_NOTHROW(validate_stream(mirrored));
}

TEST_CASE("total supply sums allocated capacities") {
  std::vector<CuratorProfile<double>> two = {{1.0, 1.0, {}}, {1.0, 0.5, {}}};
  CHECK(total_supply(two) == doctest::Approx(1.5));

  std::vector<CuratorProfile<double>> one = {{1.0, 1.0, {}}};
  CHECK(total_supply(one) == doctest::Approx(1.0));

  std::vector<CuratorProfile<double>> many;
  double expected = 0.0;
  for (int n = 1; n <= 5; ++n) {
    many.push_back({0.5 * n, 1.0, {}});
    expected += 0.5 * n;
  }
  CHECK(total_supply(many) == doctest::Approx(expected));

  std::vector<CuratorProfile<double>> none;
  CHECK_THROWS_AS(total_supply(none), std::invalid_argument);
}

TEST_CASE("step_market: capacity rule with accepted boundary") {
  MarketState<double> st;
  st.t = 0;
  st.active_demand = 0.9;
  st.supply = 1.0;
  st.utilization = 0.9;

  SUBCASE("oversized arrival is rejected, demand unchanged") {
    auto next = step_market(st, LoanEvent<double>{1, 0.2, 3}, 1.0);
    CHECK(next.rejected);
    CHECK(next.active_demand == doctest::Approx(0.9));
  }
  SUBCASE("boundary arrival is accepted and utilization reaches 1") {
    auto next = step_market(st, LoanEvent<double>{1, 0.1, 3}, 1.0);
    CHECK_FALSE(next.rejected);
    CHECK(next.active_demand == doctest::Approx(1.0));
    CHECK(next.utilization == doctest::Approx(1.0));
  }
  SUBCASE("departures always go through") {
    MarketState<double> full;
    full.t = 0;
    full.active_demand = 1.0;
    full.supply = 1.0;
    full.utilization = 1.0;
    auto next = step_market(full, LoanEvent<double>{1, -0.4, 0}, 1.0);
    CHECK(next.active_demand == doctest::Approx(0.6));
    CHECK(next.utilization == doctest::Approx(0.6));
  }
  SUBCASE("nonpositive supply is a hard error") {
    CHECK_THROWS_AS(step_market(st, LoanEvent<double>{1, 0.05, 1}, 0.0), std::domain_error);
  }
  SUBCASE("out-of-order events are rejected input") {
    CHECK_THROWS_AS(step_market(st, LoanEvent<double>{5, 0.05, 1}, 1.0), std::invalid_argument);
  }
}

TEST_CASE("engine demand matches the indicator sum when nothing is rejected") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    EventStream<double> stream;
    long long t = 1;
    std::map<long long, bool> busy;
    const long long T = 40;
    while (t <= T) {
      if (busy.count(t)) {
        busy.erase(t);
        ++t;
        continue;
      }
      const double size = rng.uniform(0.01, 0.05);
      long long tau = rng.uniform_int(1, 10);
      long long dep = t + tau;
      while (dep <= T && busy.count(dep)) ++dep;
      stream.push_back({t, size, dep - t});
      if (dep <= T) busy[dep] = true;
      ++t;
    }
    DemandEngine<double> engine(stream, T);
    for (long long s = 1; s <= T; ++s) {
      engine.advance(1e9);  // effectively no capacity constraint
      CHECK(engine.state().active_demand ==
            doctest::Approx(active_demand(stream, s)).epsilon(1e-12));
    }
  }
}

TEST_CASE("conservation: demand returns to zero after all expiries") {
  EventStream<double> stream = {{1, 0.4, 4}, {2, 0.2, 5}, {3, 0.1, 3}};
  const long long end = 12;
  DemandEngine<double> engine(stream, end);
  for (long long t = 1; t <= end; ++t) engine.advance(10.0);
  CHECK(engine.state().active_demand == doctest::Approx(0.0).epsilon(1e-12));

  // exact mode: cancellation is exact
  EventStream<Rational> rstream = {{1, Rational(2, 5), 3}, {2, Rational(1, 5), 5}};
  DemandEngine<Rational> rengine(rstream, 10);
  for (long long t = 1; t <= 10; ++t) rengine.advance(Rational(10));
  CHECK(rengine.state().active_demand == Rational(0));
}

TEST_CASE("utilization stays in [0,1] under random replay") {
  Rng rng(7);
  EventStream<double> stream;
  std::map<long long, bool> busy;
  const long long T = 200;
  long long t = 1;
  while (t <= T) {
    if (busy.count(t)) {
      busy.erase(t);
      ++t;
      continue;
    }
    if (rng.uniform01() < 0.7) {
      const double size = rng.uniform(0.005, 0.2);
      long long dep = t + rng.uniform_int(1, 15);
      while (dep <= T && busy.count(dep)) ++dep;
      stream.push_back({t, size, dep - t});
      if (dep <= T) busy[dep] = true;
    }
    ++t;
  }
  DemandEngine<double> engine(stream, T);
  for (long long s = 1; s <= T; ++s) {
    const double supply = 0.2 + 0.3 * rng.uniform01();
    engine.advance(supply);
    CHECK(engine.state().utilization >= 0.0);
    CHECK(engine.state().utilization <= 1.0);
  }
}

TEST_CASE("monotone capacity: larger supply accepts a superset") {
  // non-interacting rejections: no departures inside the window and the total
  // fits under the larger supply, so the larger replay rejects nothing
  Rng rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    EventStream<double> stream;
    const long long T = 20;
    for (long long t = 1; t <= T; ++t) stream.push_back({t, rng.uniform(0.01, 0.05), T + 5});
    const double s_small = 0.6, s_large = 1.05;

    DemandEngine<double> small(stream, T), large(stream, T);
    for (long long t = 1; t <= T; ++t) {
      small.advance(s_small);
      large.advance(s_large);
      if (!small.state().rejected) CHECK_FALSE(large.state().rejected);
    }
  }

  // targeted fixture: the small supply rejects only the oversized loan
  EventStream<double> fixture = {{1, 0.3, 9}, {2, 0.5, 9}, {3, 0.2, 9}};
  DemandEngine<double> small(fixture, 3), large(fixture, 3);
  std::vector<bool> acc_small, acc_large;
  for (long long t = 1; t <= 3; ++t) {
    small.advance(0.6);
    acc_small.push_back(!small.state().rejected);
    large.advance(1.0);
    acc_large.push_back(!large.state().rejected);
  }
  CHECK(acc_small == std::vector<bool>{true, false, true});
  CHECK(acc_large == std::vector<bool>{true, true, true});
}

TEST_CASE("ledger additivity is exact in rational mode") {
  RevenueLedger<Rational> ledger;
  Rational expect(0);
  for (int i = 1; i <= 50; ++i) {
    const Rational amount(i, 7);
    ledger.book(amount, {amount / 2, amount / 2});
    expect += amount;
  }
  Rational per_step_sum(0);
  for (const auto& v : ledger.per_step) per_step_sum += v;
  CHECK(ledger.total() == expect);
  CHECK(per_step_sum == expect);
  CHECK(ledger.per_supplier[0].value() + ledger.per_supplier[1].value() == expect);
}

TEST_CASE("curator profile validation") {
  CuratorProfile<double> ok{1.0, 0.5, {CostKind::quadratic, 0.2}};
  CHECK_NOTHROW(ok.validate());

  CuratorProfile<double> bad_alpha{1.0, 0.0, {}};
  CHECK_THROWS_AS(bad_alpha.validate(), std::invalid_argument);

  CuratorProfile<double> bad_cap{0.0, 0.5, {}};
  CHECK_THROWS_AS(bad_cap.validate(), std::invalid_argument);
}
