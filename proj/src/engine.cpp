#include "specsched/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace specsched {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Nearest-rank percentile over sorted values.
SimTime percentile(const std::vector<SimTime>& sorted, double q) {
  if (sorted.empty()) return SimTime::zero();
  const auto n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(q * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

}  // namespace

RoundRng::RoundRng(std::uint64_t seed, RequestId id, std::int64_t round)
    : state_(mix64(mix64(mix64(seed + kGolden) ^ static_cast<std::uint64_t>(id)) ^
                   static_cast<std::uint64_t>(round))) {}

double RoundRng::uniform() {
  state_ += kGolden;
  return static_cast<double>(mix64(state_) >> 11) * 0x1.0p-53;
}

RoundOutcome execute_round(RequestState& state, const RequestSpec& spec,
                           const CostModel& cost, std::uint64_t seed) {
  if (state.completed() || state.tokens_accepted >= spec.true_output_len)
    throw ContractViolation("execute_round on completed request " +
                            std::to_string(spec.id));

  const double rate = acceptance_rate_at(spec.acceptance, state.rounds_executed);
  const std::int64_t n = cost.spec_len;

  std::int64_t draft = 0;
  switch (cost.mode) {
    case AcceptanceMode::Truncated: {
      RoundRng rng(seed, spec.id, state.rounds_executed);
      while (draft < n && rng.uniform() < rate) ++draft;
      break;
    }
    case AcceptanceMode::Independent: {
      RoundRng rng(seed, spec.id, state.rounds_executed);
      for (std::int64_t k = 0; k < n; ++k)
        if (rng.uniform() < rate) ++draft;
      break;
    }
    case AcceptanceMode::Expected: {
      state.expected_draft += static_cast<double>(n) * rate;
      const auto total = static_cast<std::int64_t>(std::floor(state.expected_draft + 1e-9));
      draft = std::clamp<std::int64_t>(total - state.draft_accepted, 0, n);
      break;
    }
  }

  const std::int64_t produced = draft + (cost.bonus_token ? 1 : 0);
  if (produced == 0 && rate <= 0.0)
    throw ContractViolation("request " + std::to_string(spec.id) +
                            " cannot make progress: zero acceptance and no bonus token");

  const std::int64_t remaining = spec.true_output_len - state.tokens_accepted;

  RoundOutcome out;
  out.tokens_proposed = n;
  out.draft_accepted = draft;
  out.tokens_accepted_this_round = std::min(produced, remaining);
  out.round_duration = cost.round_duration();

  state.tokens_accepted += out.tokens_accepted_this_round;
  state.draft_accepted += draft;
  state.tokens_proposed += n;
  state.rounds_executed += 1;
  state.attained_service += out.round_duration;
  state.rate_history.push_back(static_cast<double>(state.draft_accepted) /
                               static_cast<double>(state.tokens_proposed));
  out.request_completed = state.tokens_accepted >= spec.true_output_len;
  return out;
}

SimTime isolated_service_time(const RequestSpec& spec, const CostModel& cost,
                              std::uint64_t seed) {
  RequestState state;
  state.id = spec.id;
  while (state.tokens_accepted < spec.true_output_len) execute_round(state, spec, cost, seed);
  return state.attained_service;
}

std::vector<RequestId> SimReport::start_order() const {
  std::vector<const RequestRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
    return std::tie(a->first_service, a->id) < std::tie(b->first_service, b->id);
  });
  std::vector<RequestId> ids;
  for (auto* r : sorted) ids.push_back(r->id);
  return ids;
}

std::vector<RequestId> SimReport::completion_order() const {
  std::vector<const RequestRecord*> sorted;
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
    return std::tie(a->completion, a->id) < std::tie(b->completion, b->id);
  });
  std::vector<RequestId> ids;
  for (auto* r : sorted) ids.push_back(r->id);
  return ids;
}

SimReport run_simulation(std::vector<RequestSpec> requests, SchedulerPolicy& policy,
                         const CostModel& cost, std::uint64_t seed) {
  cost.validate();
  std::stable_sort(requests.begin(), requests.end(), [](const auto& a, const auto& b) {
    return std::tie(a.arrival_time, a.id) < std::tie(b.arrival_time, b.id);
  });

  std::unordered_map<RequestId, std::size_t> index;
  std::vector<RequestState> states(requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    requests[i].validate();
    if (!index.emplace(requests[i].id, i).second)
      throw std::invalid_argument("duplicate request id " + std::to_string(requests[i].id));
    states[i].id = requests[i].id;
  }

  SimReport report;
  report.policy = policy.name();
  report.seed = seed;
  report.queue_count = policy.queue_count();

  SimTime now;
  std::size_t next_arrival = 0;
  std::size_t admitted_open = 0;
  std::size_t completed = 0;
  std::optional<std::size_t> context;  // request whose KV cache is resident
  std::optional<std::size_t> last_run;

  while (completed < requests.size()) {
    while (next_arrival < requests.size() && requests[next_arrival].arrival_time <= now) {
      policy.on_arrival(requests[next_arrival], states[next_arrival], now);
      ++next_arrival;
      ++admitted_open;
    }
    if (admitted_open == 0) {
      now = requests[next_arrival].arrival_time;
      context.reset();
      last_run.reset();
      continue;
    }

    const auto choice = policy.select_next(now);
    if (!choice) throw ContractViolation(policy.name() + " returned no request while work is pending");
    const auto it = index.find(*choice);
    if (it == index.end() || next_arrival <= it->second)
      throw ContractViolation(policy.name() + " selected unknown or unadmitted request " +
                              std::to_string(*choice));
    const std::size_t sel = it->second;
    RequestState& state = states[sel];
    if (state.completed())
      throw ContractViolation(policy.name() + " selected completed request " +
                              std::to_string(*choice));

    SimTime switch_cost;
    if (context != sel) {
      const bool swap_out = context.has_value();
      const bool swap_in = state.rounds_executed > 0;
      if (swap_out) states[*context].preemptions += 1;
      if (swap_out || swap_in) {
        switch_cost = cost.switch_base +
                      kv_tokens(state, requests[sel]) * cost.switch_per_token;
        now += switch_cost;
        report.total_switch_overhead += switch_cost;
        report.switch_count += 1;
      }
    }

    if (!state.first_service_time) state.first_service_time = now;
    if (last_run == sel && report.schedule.back().id == state.id) {
      report.schedule.back().rounds += 1;
    } else {
      report.schedule.push_back({state.id, now, 1, switch_cost});
    }

    const RoundOutcome outcome = execute_round(state, requests[sel], cost, seed);
    now += outcome.round_duration;
    report.total_busy += outcome.round_duration;
    last_run = sel;
    context = sel;
    if (outcome.request_completed) {
      state.completion_time = now;
      context.reset();
      ++completed;
      --admitted_open;
    }
    policy.on_round_end(state, outcome, now);
  }

  report.total_busy += report.total_switch_overhead;
  report.makespan = now;

  std::vector<SimTime> latencies;
  std::int64_t latency_sum = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto& spec = requests[i];
    const auto& st = states[i];
    RequestRecord rec;
    rec.id = spec.id;
    rec.arrival = spec.arrival_time;
    rec.first_service = *st.first_service_time;
    rec.completion = *st.completion_time;
    rec.latency = rec.completion - rec.arrival;
    rec.rounds = st.rounds_executed;
    rec.tokens_proposed = st.tokens_proposed;
    rec.tokens_accepted = st.tokens_accepted;
    rec.preemptions = st.preemptions;
    rec.estimate = st.estimated_total_time;
    rec.service = st.attained_service;
    latencies.push_back(rec.latency);
    latency_sum += rec.latency.us();
    report.records.push_back(rec);
  }
  std::sort(report.records.begin(), report.records.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(latencies.begin(), latencies.end());
  report.avg_latency_us = requests.empty() ? 0.0
                                           : static_cast<double>(latency_sum) /
                                                 static_cast<double>(requests.size());
  report.p50_latency = percentile(latencies, 0.50);
  report.p95_latency = percentile(latencies, 0.95);
  report.max_latency = latencies.empty() ? SimTime::zero() : latencies.back();
  return report;
}

}  // namespace specsched
