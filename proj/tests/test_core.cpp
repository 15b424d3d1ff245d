#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "specsched/core.hpp"

using namespace specsched;

TEST_CASE("SimTime arithmetic is exact") {
  SimTime t;
  for (int i = 0; i < 1000; ++i) t = t + SimTime::from_us(1);
  CHECK(t == 1_ms);
  CHECK((3 * 10_ms).us() == 30'000);
  CHECK(SimTime::from_ms(0.0015).us() == 2);
  CHECK(SimTime::infinity().is_infinite());
  CHECK(100_ms - 40_ms == 60_ms);
}

TEST_CASE("queue_thresholds examples") {
  auto q = queue_thresholds(4, 50_ms, 2.0);
  REQUIRE(q.size() == 4);
  CHECK(q[0] == QueueInterval{0_ms, 50_ms});
  CHECK(q[1] == QueueInterval{50_ms, 100_ms});
  CHECK(q[2] == QueueInterval{100_ms, 200_ms});
  CHECK(q[3].down == 200_ms);
  CHECK(q[3].up.is_infinite());

  auto one = queue_thresholds(1, 50_ms, 2.0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].down == 0_ms);
  CHECK(one[0].up.is_infinite());

  auto three = queue_thresholds(3, 10_ms, 3.0);
  REQUIRE(three.size() == 3);
  CHECK(three[0] == QueueInterval{0_ms, 10_ms});
  CHECK(three[1] == QueueInterval{10_ms, 30_ms});
  CHECK(three[2].down == 30_ms);
  CHECK(three[2].up.is_infinite());
}

TEST_CASE("queue_thresholds rejects bad parameters") {
  CHECK_THROWS_AS(queue_thresholds(0, 50_ms, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(queue_thresholds(3, 0_ms, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(queue_thresholds(3, 50_ms, 1.0), std::invalid_argument);
}

TEST_CASE("queue_thresholds partition [0, inf)") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> kd(1, 12);
  std::uniform_int_distribution<std::int64_t> sd(1, 200'000);
  std::uniform_real_distribution<double> md(1.1, 4.0);
  for (int trial = 0; trial < 200; ++trial) {
    auto q = queue_thresholds(kd(rng), SimTime::from_us(sd(rng)), md(rng));
    CHECK(q.front().down == SimTime::zero());
    CHECK(q.back().up.is_infinite());
    for (std::size_t j = 0; j + 1 < q.size(); ++j) {
      CHECK(q[j].down < q[j].up);
      CHECK(q[j].up == q[j + 1].down);
    }
  }
}

TEST_CASE("queue_index_for") {
  auto q = queue_thresholds(4, 50_ms, 2.0);
  CHECK(queue_index_for(q, 0_ms) == 1);
  CHECK(queue_index_for(q, 49_ms) == 1);
  CHECK(queue_index_for(q, 50_ms) == 2);
  CHECK(queue_index_for(q, 120_ms) == 3);
  CHECK(queue_index_for(q, 10'000_ms) == 4);
}

TEST_CASE("acceptance_rate_at examples") {
  CHECK(acceptance_rate_at(AcceptanceProcess::constant(0.7), 12) == doctest::Approx(0.7));
  auto flat = AcceptanceProcess::stabilizing(0.5, 0.0, 0.9, 8.0);
  for (int r = 0; r < 20; ++r) CHECK(acceptance_rate_at(flat, r) == doctest::Approx(0.5));
  auto wave = AcceptanceProcess::stabilizing(0.5, 0.4, 0.5, 4.0);
  CHECK(acceptance_rate_at(wave, 1) == doctest::Approx(0.7));

  auto tr = AcceptanceProcess::from_trace({0.2, 0.4, 0.6});
  CHECK(acceptance_rate_at(tr, 0) == doctest::Approx(0.2));
  CHECK(acceptance_rate_at(tr, 2) == doctest::Approx(0.6));
  CHECK(acceptance_rate_at(tr, 50) == doctest::Approx(0.6));
}

TEST_CASE("stabilizing envelope and clamping") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double stable = u(rng), amp = 0.5 * u(rng), decay = 0.99 * u(rng);
    const double period = 1.0 + 15.0 * u(rng);
    auto p = AcceptanceProcess::stabilizing(stable, amp, decay, period);
    for (int t = 0; t < 80; ++t) {
      const double r = acceptance_rate_at(p, t);
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
      CHECK(std::abs(r - stable) <= amp * std::pow(decay, t) + 1e-12);
      CHECK(r == acceptance_rate_at(p, t));
    }
  }
}

TEST_CASE("acceptance process validation") {
  CHECK_THROWS_AS(AcceptanceProcess::from_trace({}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(AcceptanceProcess::constant(1.5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(AcceptanceProcess::stabilizing(0.5, 0.2, 1.0, 4.0).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(AcceptanceProcess::stabilizing(0.5, 0.2, 0.8, 0.0).validate(),
                  std::invalid_argument);
  CHECK_NOTHROW(AcceptanceProcess::stabilizing(0.5, 0.2, 0.8, 4.0).validate());
  CHECK(parse_acceptance_kind(to_string(AcceptanceProcess::Kind::Trace)) ==
        AcceptanceProcess::Kind::Trace);
  CHECK_THROWS(parse_acceptance_kind("bogus"));
}

TEST_CASE("request spec validation") {
  RequestSpec s;
  s.id = 1;
  s.acceptance = AcceptanceProcess::constant(0.5);
  CHECK_NOTHROW(s.validate());
  s.true_output_len = 0;
  CHECK_THROWS(s.validate());
  s.true_output_len = 1;
  s.predicted_output_len = 0;
  CHECK_THROWS(s.validate());
  s.predicted_output_len = 1;
  s.prompt_len = -1;
  CHECK_THROWS(s.validate());
}

TEST_CASE("kv_tokens") {
  RequestSpec spec;
  RequestState st;
  spec.prompt_len = 100;
  CHECK(kv_tokens(st, spec) == 100);
  st.tokens_accepted = 400;
  CHECK(kv_tokens(st, spec) == 500);
  spec.prompt_len = 0;
  st.tokens_accepted = 0;
  CHECK(kv_tokens(st, spec) == 0);
}

TEST_CASE("cost model") {
  CostModel c;
  CHECK(c.round_duration() == 14_ms);
  c.spec_len = 0;
  CHECK_THROWS(c.validate());
  CHECK(parse_acceptance_mode(to_string(AcceptanceMode::Independent)) ==
        AcceptanceMode::Independent);
  CHECK_THROWS(parse_acceptance_mode("nope"));
}
