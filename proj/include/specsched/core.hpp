#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "specsched/sim_time.hpp"

namespace specsched {

using RequestId = std::int64_t;

// Raised when a caller breaks an operation's precondition (as opposed to bad
// user input, which raises std::invalid_argument).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Generative model of a request's per-round token acceptance probability.
struct AcceptanceProcess {
  enum class Kind { Constant, Stabilizing, Trace };

  Kind kind = Kind::Constant;
  double stable_rate = 0.0;
  double amplitude = 0.0;
  double decay = 0.0;
  double period = 1.0;
  std::vector<double> trace;

  static AcceptanceProcess constant(double rate);
  static AcceptanceProcess stabilizing(double stable_rate, double amplitude,
                                       double decay, double period);
  static AcceptanceProcess from_trace(std::vector<double> rates);

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool operator==(const AcceptanceProcess&) const = default;
};

std::string_view to_string(AcceptanceProcess::Kind kind);
AcceptanceProcess::Kind parse_acceptance_kind(std::string_view name);

struct RequestSpec {
  RequestId id = 0;
  SimTime arrival_time;
  std::int64_t prompt_len = 0;
  std::int64_t true_output_len = 1;
  std::int64_t predicted_output_len = 1;
  AcceptanceProcess acceptance;

  void validate() const;

  bool operator==(const RequestSpec&) const = default;
};

// How a round's draft tokens are accepted given the round's acceptance rate.
enum class AcceptanceMode {
  Truncated,    // leading successes up to the first rejection
  Independent,  // every draft token accepted independently
  Expected,     // deterministic: floor of the cumulative expected count
};

std::string_view to_string(AcceptanceMode mode);
AcceptanceMode parse_acceptance_mode(std::string_view name);

struct CostModel {
  SimTime t_ssm_per_token = SimTime::from_us(1000);
  SimTime t_llm_verify = SimTime::from_us(10000);
  std::int64_t spec_len = 4;
  SimTime switch_base;
  SimTime switch_per_token;
  bool bonus_token = true;
  AcceptanceMode mode = AcceptanceMode::Truncated;

  // Speculation plus verification time of one round.
  SimTime round_duration() const {
    return spec_len * t_ssm_per_token + t_llm_verify;
  }

  void validate() const;

  bool operator==(const CostModel&) const = default;
};

struct RequestState {
  RequestId id = 0;
  std::int64_t tokens_accepted = 0;
  // Accepted draft tokens, bonus tokens excluded, before completion clipping.
  std::int64_t draft_accepted = 0;
  std::int64_t rounds_executed = 0;
  std::int64_t tokens_proposed = 0;
  SimTime attained_service;
  // Running sum of n * rate(round); only used by AcceptanceMode::Expected.
  double expected_draft = 0.0;

  bool perceptible = false;
  std::optional<double> predicted_accept_rate;
  std::optional<SimTime> estimated_total_time;
  std::optional<int> queue_index;

  std::vector<double> rate_history;
  std::optional<SimTime> first_service_time;
  std::optional<SimTime> completion_time;
  std::int64_t preemptions = 0;

  bool completed() const { return completion_time.has_value(); }
};

struct QueueInterval {
  SimTime down;
  SimTime up;  // SimTime::infinity() for the last queue

  bool contains(SimTime t) const { return down <= t && t < up; }
  bool operator==(const QueueInterval&) const = default;
};

// K exponentially growing attained-service intervals partitioning [0, inf).
std::vector<QueueInterval> queue_thresholds(int k, SimTime s1_up, double growth);

// 1-based index of the interval containing t.
int queue_index_for(const std::vector<QueueInterval>& queues, SimTime t);

double acceptance_rate_at(const AcceptanceProcess& proc, std::int64_t round);

// Resident KV cache size proxy.
inline std::int64_t kv_tokens(const RequestState& state, const RequestSpec& spec) {
  return spec.prompt_len + state.tokens_accepted;
}

}  // namespace specsched
