#include "specsched/policies.hpp"

#include <algorithm>
#include <tuple>

#include "specsched/engine.hpp"

namespace specsched {

void QueueConfig::validate() const { (void)queue_thresholds(k, s1_up, growth); }

void LapsSdConfig::validate() const {
  queues.validate();
  stability.validate();
}

SimTime estimated_remaining_time(const RequestState& state, std::int64_t predicted_output_len,
                                 const CostModel& cost) {
  if (!state.perceptible || !state.predicted_accept_rate)
    throw ContractViolation("estimated_remaining_time on non-perceptible request " +
                            std::to_string(state.id));
  const std::int64_t left = std::max<std::int64_t>(predicted_output_len - state.tokens_accepted, 0);
  return estimate_execution_time(left, *state.predicted_accept_rate, cost);
}

// ---- FCFS ----

void FcfsPolicy::on_arrival(const RequestSpec& spec, RequestState&, SimTime) {
  open_.emplace(std::pair{spec.arrival_time, spec.id}, spec.id);
  arrival_[spec.id] = spec.arrival_time;
}

void FcfsPolicy::on_round_end(RequestState& state, const RoundOutcome& outcome, SimTime) {
  if (!outcome.request_completed) return;
  open_.erase({arrival_.at(state.id), state.id});
  arrival_.erase(state.id);
  if (running_ == state.id) running_.reset();
}

std::optional<RequestId> FcfsPolicy::select_next(SimTime) {
  if (running_) return running_;
  if (open_.empty()) return std::nullopt;
  running_ = open_.begin()->second;
  return running_;
}

// ---- LP-SJF ----

void LpSjfPolicy::on_arrival(const RequestSpec& spec, RequestState&, SimTime) {
  const Key key{spec.predicted_output_len, spec.arrival_time, spec.id};
  open_.emplace(key, spec.id);
  keys_.emplace(spec.id, key);
}

void LpSjfPolicy::on_round_end(RequestState& state, const RoundOutcome& outcome, SimTime) {
  if (!outcome.request_completed) return;
  open_.erase(keys_.at(state.id));
  keys_.erase(state.id);
  if (running_ == state.id) running_.reset();
}

std::optional<RequestId> LpSjfPolicy::select_next(SimTime) {
  if (running_) return running_;
  if (open_.empty()) return std::nullopt;
  running_ = open_.begin()->second;
  return running_;
}

// ---- LAS ----

LasPolicy::LasPolicy(QueueConfig queues) : intervals_(queues.intervals()) {}

void LasPolicy::on_arrival(const RequestSpec& spec, RequestState& state, SimTime) {
  open_[spec.id] = Entry{spec.arrival_time, 1};
  state.queue_index = 1;
}

void LasPolicy::on_round_end(RequestState& state, const RoundOutcome& outcome, SimTime) {
  if (outcome.request_completed) {
    open_.erase(state.id);
    return;
  }
  auto& e = open_.at(state.id);
  e.queue = queue_index_for(intervals_, state.attained_service);
  state.queue_index = e.queue;
}

std::optional<RequestId> LasPolicy::select_next(SimTime) {
  std::optional<RequestId> best;
  std::tuple<int, SimTime, RequestId> best_key{};
  for (const auto& [id, e] : open_) {
    const auto key = std::tuple{e.queue, e.arrival, id};
    if (!best || key < best_key) {
      best = id;
      best_key = key;
    }
  }
  return best;
}

// ---- LAPS-SD ----

LapsSdPolicy::LapsSdPolicy(LapsSdConfig cfg, CostModel cost, ServiceOracle oracle)
    : cfg_(std::move(cfg)), cost_(cost), oracle_(std::move(oracle)) {
  cfg_.validate();
  if (cfg_.oracle_estimates && !oracle_)
    throw std::invalid_argument("oracle_estimates requires a service oracle");
  intervals_ = cfg_.queues.intervals();
}

SimTime LapsSdPolicy::remaining(const Entry& e) const {
  if (cfg_.oracle_estimates) {
    const SimTime left = e.estimate_total - e.attained;
    return std::max(left, SimTime::zero());
  }
  const std::int64_t left = std::max<std::int64_t>(e.predicted_len - e.tokens_accepted, 0);
  return estimate_execution_time(left, e.accept_rate, cost_);
}

void LapsSdPolicy::on_arrival(const RequestSpec& spec, RequestState& state, SimTime now) {
  Entry e;
  e.arrival = spec.arrival_time;
  e.predicted_len = spec.predicted_output_len;
  e.queue = 1;
  open_[spec.id] = e;
  state.queue_index = 1;
  if (cfg_.oracle_estimates) {
    state.predicted_accept_rate = spec.acceptance.stable_rate;
    on_stabilized(state, oracle_(spec), now);
  }
}

void LapsSdPolicy::on_round_end(RequestState& state, const RoundOutcome& outcome, SimTime now) {
  if (outcome.request_completed) {
    open_.erase(state.id);
    if (committed_ == state.id) committed_.reset();
    return;
  }
  Entry& e = open_.at(state.id);
  e.tokens_accepted = state.tokens_accepted;
  e.attained = state.attained_service;
  if (e.perceptible) return;

  e.queue = std::max(e.queue, queue_index_for(intervals_, state.attained_service));
  state.queue_index = e.queue;

  if (is_stable(state.rate_history, cfg_.stability)) {
    state.predicted_accept_rate = predict_acceptance(state.rate_history, cfg_.stability);
    const SimTime total =
        estimate_execution_time(e.predicted_len, *state.predicted_accept_rate, cost_);
    on_stabilized(state, total, now);
  }
}

void LapsSdPolicy::on_stabilized(RequestState& state, SimTime estimate, SimTime) {
  Entry& e = open_.at(state.id);
  e.perceptible = true;
  e.accept_rate = state.predicted_accept_rate.value_or(0.0);
  e.estimate_total = estimate;
  if (cfg_.placement == LapsSdConfig::Placement::Estimate)
    e.queue = queue_index_for(intervals_, estimate);
  state.perceptible = true;
  state.estimated_total_time = estimate;
  state.queue_index = e.queue;
}

std::optional<RequestId> LapsSdPolicy::select_next(SimTime) {
  if (committed_) return committed_;
  if (open_.empty()) return std::nullopt;

  int top = static_cast<int>(intervals_.size());
  for (const auto& [id, e] : open_) top = std::min(top, e.queue);

  std::optional<RequestId> fast;
  std::tuple<SimTime, SimTime, RequestId> fast_key{};
  std::optional<RequestId> fifo;
  std::pair<SimTime, RequestId> fifo_key{};
  for (const auto& [id, e] : open_) {
    if (e.queue != top) continue;
    if (e.perceptible) {
      const auto key = std::tuple{remaining(e), e.arrival, id};
      if (!fast || key < fast_key) {
        fast = id;
        fast_key = key;
      }
    } else {
      const auto key = std::pair{e.arrival, id};
      if (!fifo || key < fifo_key) {
        fifo = id;
        fifo_key = key;
      }
    }
  }
  if (fast) {
    committed_ = fast;
    return fast;
  }
  return fifo;
}

// ---- factory ----

bool is_policy_name(std::string_view name) {
  return std::find(std::begin(kPolicyNames), std::end(kPolicyNames), name) !=
         std::end(kPolicyNames);
}

std::unique_ptr<SchedulerPolicy> make_policy(std::string_view name,
                                             const PolicySettings& settings,
                                             const CostModel& cost, std::uint64_t seed) {
  if (name == "fcfs") return std::make_unique<FcfsPolicy>();
  if (name == "lp-sjf") return std::make_unique<LpSjfPolicy>();
  if (name == "las") return std::make_unique<LasPolicy>(settings.laps.queues);
  if (name == "laps-sd") {
    ServiceOracle oracle;
    if (settings.laps.oracle_estimates)
      oracle = [cost, seed](const RequestSpec& spec) {
        return isolated_service_time(spec, cost, seed);
      };
    return std::make_unique<LapsSdPolicy>(settings.laps, cost, std::move(oracle));
  }
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

}  // namespace specsched
