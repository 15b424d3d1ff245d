#include <doctest.h>

#include <algorithm>
#include <random>

#include "specsched/engine.hpp"
#include "specsched/estimator.hpp"

using namespace specsched;

namespace {

StabilityConfig window(int gamma, double delta) {
  StabilityConfig c;
  c.gamma = gamma;
  c.delta = delta;
  return c;
}

// Estimated execution time evaluated directly in double milliseconds.
double eq5_ms(double tokens, double a, double n, double t_ssm_ms, double t_llm_ms) {
  return n * tokens * t_ssm_ms / (n * a + 1.0) + tokens * t_llm_ms / (n * a + 1.0);
}

}  // namespace

TEST_CASE("cumulative rate history") {
  const std::vector<std::pair<std::int64_t, std::int64_t>> rounds{{4, 4}, {4, 2}};
  CHECK(cumulative_rate_history(rounds) == std::vector<double>{1.0, 0.75});
  CHECK(cumulative_rate_history(std::span<const std::pair<std::int64_t, std::int64_t>>{}).empty());
  const std::vector<std::pair<std::int64_t, std::int64_t>> rejected{{4, 0}, {4, 0}, {4, 0}};
  CHECK(cumulative_rate_history(rejected) == std::vector<double>{0.0, 0.0, 0.0});

  RequestState st;
  st.rate_history = {0.25, 0.5};
  CHECK(cumulative_rate_history(st) == st.rate_history);
}

TEST_CASE("is_stable examples") {
  const auto cfg = window(3, 0.05);
  CHECK(is_stable(std::vector<double>{0.50, 0.52, 0.51}, cfg));
  CHECK_FALSE(is_stable(std::vector<double>{0.30, 0.50, 0.45}, cfg));
  CHECK_FALSE(is_stable(std::vector<double>{0.50, 0.50}, cfg));
  CHECK(is_stable(std::vector<double>{0.1, 0.9, 0.50, 0.52, 0.51}, cfg));
}

TEST_CASE("delta zero never fires") {
  CHECK_FALSE(is_stable(std::vector<double>(10, 0.5), window(3, 0.0)));
}

TEST_CASE("adjacent rule") {
  auto cfg = window(3, 0.05);
  cfg.rule = StabilityConfig::Rule::Adjacent;
  CHECK(is_stable(std::vector<double>{0.50, 0.54, 0.58}, cfg));
  cfg.rule = StabilityConfig::Rule::Spread;
  CHECK_FALSE(is_stable(std::vector<double>{0.50, 0.54, 0.58}, cfg));
}

TEST_CASE("predict_acceptance examples") {
  const auto cfg = window(3, 0.05);
  CHECK(predict_acceptance(std::vector<double>{0.50, 0.52, 0.51}, cfg) == doctest::Approx(0.51));
  CHECK(predict_acceptance(std::vector<double>(3, 0.7), cfg) == doctest::Approx(0.7));
  CHECK(predict_acceptance(std::vector<double>(3, 0.0), cfg) == 0.0);
  CHECK_THROWS_AS(predict_acceptance(std::vector<double>{0.3, 0.5, 0.45}, cfg), ContractViolation);
}

TEST_CASE("prediction lies inside the window and stability survives repeats") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.4, 0.43);
  const auto cfg = window(5, 0.05);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> h;
    for (int i = 0; i < 8; ++i) h.push_back(u(rng));
    REQUIRE(is_stable(h, cfg));
    const double a = predict_acceptance(h, cfg);
    const auto [lo, hi] = std::minmax_element(h.end() - 5, h.end());
    CHECK(a >= *lo);
    CHECK(a <= *hi);
    for (int k = 0; k < 10; ++k) {
      h.push_back(h.back());
      CHECK(is_stable(h, cfg));
    }
  }
}

TEST_CASE("estimate_execution_time examples") {
  CHECK(estimate_execution_time(100, 0.5, 4, 1_ms, 10_ms).us() ==
        std::llround(eq5_ms(100, 0.5, 4, 1, 10) * 1000));
  CHECK(estimate_execution_time(100, 0.5, 4, 1_ms, 10_ms).ms() == doctest::Approx(466.67).epsilon(1e-4));
  CHECK(estimate_execution_time(5, 1.0, 4, 0_ms, 10_ms) == 10_ms);
  CHECK(estimate_execution_time(10, 0.0, 4, 1_ms, 10_ms) == 140_ms);
  CHECK(estimate_execution_time(0, 0.5, 4, 1_ms, 10_ms) == 0_ms);

  CostModel cost;
  CHECK(estimate_execution_time(100, 0.5, cost) == estimate_execution_time(100, 0.5, 4, 1_ms, 10_ms));
}

TEST_CASE("estimate is decreasing in A and linear in L") {
  for (double a = 0.0; a < 0.95; a += 0.1) {
    CHECK(estimate_execution_time(100, a + 0.1, 4, 1_ms, 10_ms) <
          estimate_execution_time(100, a, 4, 1_ms, 10_ms));
  }
  const auto one = estimate_execution_time(30, 0.5, 4, 3_ms, 12_ms);
  const auto two = estimate_execution_time(60, 0.5, 4, 3_ms, 12_ms);
  CHECK(std::abs(two.us() - 2 * one.us()) <= 1);
}

TEST_CASE("stability config validation") {
  CHECK_THROWS(window(1, 0.05).validate());
  CHECK_THROWS(window(3, -0.1).validate());
  CHECK_NOTHROW(window(2, 0.0).validate());
}
