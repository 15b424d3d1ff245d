#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "specsched/config.hpp"

using namespace specsched;
using nlohmann::json;

namespace {

std::string error_of(const json& doc) {
  try {
    config_from_json(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

double mid(const UniformRange& r) { return 0.5 * (r.lo + r.hi); }

}  // namespace

TEST_CASE("built-in profiles") {
  const auto names = profile_names();
  REQUIRE(names.size() == 3);
  for (const char* n : {"chat", "code", "reasoning"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
  for (const auto& n : names) {
    const auto cfg = profile_config(n);
    CHECK(cfg.profile == n);
    CHECK_NOTHROW(cfg.workload.validate());
    CHECK_NOTHROW(cfg.cost.validate());
    CHECK_NOTHROW(cfg.policy.laps.validate());
  }
  const double code = mid(profile_config("code").workload.acceptance.stable_rate);
  CHECK(code > mid(profile_config("chat").workload.acceptance.stable_rate));
  CHECK(code > mid(profile_config("reasoning").workload.acceptance.stable_rate));
  CHECK_THROWS_AS(profile_config("poetry"), ConfigError);
}

TEST_CASE("config overrides apply over the profile") {
  const auto cfg = config_from_json(json::parse(R"({
    "workload": {"profile": "code", "num_requests": 7, "seed": 42},
    "cost": {"spec_len": 3, "switch_base_ms": 0.5},
    "policy": {"K": 2, "oracle_estimates": true},
    "stability": {"gamma": 4, "delta": 0.1}
  })"));
  const auto base = profile_config("code");
  CHECK(cfg.profile == "code");
  CHECK(cfg.workload.num_requests == 7);
  CHECK(cfg.workload.seed == 42);
  CHECK(cfg.workload.arrival.rate_per_sec == base.workload.arrival.rate_per_sec);
  CHECK(cfg.cost.spec_len == 3);
  CHECK(cfg.cost.switch_base == SimTime::from_us(500));
  CHECK(cfg.cost.t_llm_verify == base.cost.t_llm_verify);
  CHECK(cfg.policy.laps.queues.k == 2);
  CHECK(cfg.policy.laps.oracle_estimates);
  CHECK(cfg.policy.laps.stability.gamma == 4);
  CHECK(cfg.policy.laps.stability.delta == 0.1);
}

TEST_CASE("config errors name the key path") {
  CHECK(error_of(json::parse(R"({"workload": {"acceptance_profile": {"stable_rate": [0.2, 1.5]}}})"))
            .starts_with("workload.acceptance_profile.stable_rate"));
  CHECK(error_of(json::parse(R"({"workload": {"bogus": 1}})")).starts_with("workload.bogus"));
  CHECK(error_of(json::parse(R"({"cost": {"spec_len": 0}})")).starts_with("cost"));
  CHECK(error_of(json::parse(R"({"cost": {"t_llm_ms": "fast"}})")).starts_with("cost.t_llm_ms"));
  CHECK(error_of(json::parse(R"({"policy": {"K": 0}})")) != "");
  CHECK(error_of(json::parse(R"({"workload": {"profile": "poetry"}})")).starts_with("workload.profile"));
  CHECK(error_of(json::array()) != "");
}

TEST_CASE("config json round trip and hash") {
  for (const auto& name : profile_names()) {
    const auto cfg = profile_config(name);
    const auto doc = config_to_json(cfg);
    const auto back = config_from_json(doc);
    CHECK(config_to_json(back) == doc);
    CHECK(config_hash(config_to_json(back)) == config_hash(doc));
    CHECK(config_hash(doc).size() == 16);
  }
  CHECK(config_hash(config_to_json(profile_config("chat"))) !=
        config_hash(config_to_json(profile_config("code"))));
}

TEST_CASE("cost files") {
  CostModel base;
  const auto bare = cost_from_json(json::parse(R"({"t_llm_ms": 30, "bonus_token": false})"), base);
  CHECK(bare.t_llm_verify == 30_ms);
  CHECK_FALSE(bare.bonus_token);
  CHECK(bare.spec_len == base.spec_len);
  const auto wrapped = cost_from_json(json::parse(R"({"cost": {"acceptance_mode": "expected"}})"), base);
  CHECK(wrapped.mode == AcceptanceMode::Expected);
  CHECK(cost_from_json(cost_to_json(bare), base) == bare);

  const auto path = std::filesystem::temp_directory_path() / "specsched_cost.json";
  std::ofstream(path) << cost_to_json(bare).dump();
  CHECK(load_cost(path, base) == bare);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_cost(path, base), ConfigError);
  CHECK_THROWS_AS(load_config(path), ConfigError);
}
