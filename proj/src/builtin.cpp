#include "specsched/builtin.hpp"

namespace specsched {

namespace {

RequestSpec make_request(RequestId id, SimTime arrival, std::int64_t len, std::int64_t predicted,
                         AcceptanceProcess acceptance, std::int64_t prompt = 0) {
  RequestSpec r;
  r.id = id;
  r.arrival_time = arrival;
  r.prompt_len = prompt;
  r.true_output_len = len;
  r.predicted_output_len = predicted;
  r.acceptance = std::move(acceptance);
  return r;
}

BuiltinTrace tiny_sjf_trace() {
  BuiltinTrace t;
  t.name = "tiny-sjf";
  const auto c = AcceptanceProcess::constant;
  t.requests = {
      make_request(1, SimTime::zero(), 120, 120, c(0.6), 32),
      make_request(2, SimTime::zero(), 20, 20, c(0.8), 16),
      make_request(3, SimTime::zero(), 60, 60, c(0.2), 24),
      make_request(4, SimTime::zero(), 40, 40, c(0.9), 8),
  };
  CostModel cost;
  cost.mode = AcceptanceMode::Expected;
  t.cost = cost;
  return t;
}

BuiltinTrace stabilizing_demo_trace() {
  BuiltinTrace t;
  t.name = "stabilizing-demo";
  const auto s = AcceptanceProcess::stabilizing;
  t.requests = {
      make_request(1, SimTime::zero(), 300, 280, s(0.7, 0.4, 0.8, 6), 64),
      make_request(2, SimTime::from_us(20'000), 80, 90, s(0.3, 0.4, 0.8, 8), 32),
      make_request(3, SimTime::from_us(40'000), 500, 450, s(0.9, 0.3, 0.85, 10), 128),
      make_request(4, SimTime::from_us(60'000), 40, 40, s(0.5, 0.4, 0.8, 4), 16),
      make_request(5, SimTime::from_us(150'000), 200, 240, s(0.2, 0.2, 0.8, 6), 48),
      make_request(6, SimTime::from_us(300'000), 120, 100, s(0.6, 0.4, 0.75, 12), 24),
  };
  CostModel cost;
  cost.switch_base = SimTime::from_us(500);
  cost.switch_per_token = SimTime::from_us(20);
  t.cost = cost;
  return t;
}

}  // namespace

BuiltinTrace fig1_trace() {
  BuiltinTrace t;
  t.name = "fig1";
  const auto c = AcceptanceProcess::constant;
  t.requests = {
      make_request(1, SimTime::zero(), 10, 10, c(0.5)),
      make_request(2, SimTime::zero(), 5, 5, c(0.1)),
      make_request(3, SimTime::zero(), 20, 20, c(1.0)),
  };
  CostModel cost;
  cost.t_ssm_per_token = SimTime::zero();
  cost.t_llm_verify = SimTime::from_us(10'000);
  cost.spec_len = 1;
  cost.bonus_token = false;
  cost.mode = AcceptanceMode::Expected;
  t.cost = cost;
  return t;
}

std::vector<std::string> builtin_trace_names() { return {"fig1", "tiny-sjf", "stabilizing-demo"}; }

std::optional<BuiltinTrace> builtin_trace(std::string_view name) {
  if (name.starts_with(kBuiltinScheme)) name.remove_prefix(kBuiltinScheme.size());
  if (name == "fig1") return fig1_trace();
  if (name == "tiny-sjf") return tiny_sjf_trace();
  if (name == "stabilizing-demo") return stabilizing_demo_trace();
  return std::nullopt;
}

}  // namespace specsched
