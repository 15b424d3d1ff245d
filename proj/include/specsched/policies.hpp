#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specsched/core.hpp"
#include "specsched/estimator.hpp"
#include "specsched/policy.hpp"

namespace specsched {

// Exponential queue layout shared by LAS and LAPS-SD.
struct QueueConfig {
  int k = 4;
  SimTime s1_up = SimTime::from_us(50'000);
  double growth = 2.0;

  void validate() const;
  std::vector<QueueInterval> intervals() const { return queue_thresholds(k, s1_up, growth); }
};

struct LapsSdConfig {
  // Where a request goes once it turns perceptible.
  enum class Placement {
    Estimate,  // queue whose interval contains the estimated total time
    Attained,  // stay in the attained-service queue
  };

  QueueConfig queues;
  StabilityConfig stability;
  Placement placement = Placement::Estimate;
  // Skip stability detection: every request is perceptible on arrival with
  // its exact service time as the estimate.
  bool oracle_estimates = false;

  void validate() const;
};

// Exact service time of a request; used by oracle-estimate mode.
using ServiceOracle = std::function<SimTime(const RequestSpec&)>;

// Remaining-work estimate for a perceptible request: the total-time estimate
// evaluated on the predicted tokens still to be produced.
SimTime estimated_remaining_time(const RequestState& state, std::int64_t predicted_output_len,
                                 const CostModel& cost);

class FcfsPolicy final : public SchedulerPolicy {
 public:
  std::string name() const override { return "fcfs"; }
  void on_arrival(const RequestSpec& spec, RequestState& state, SimTime now) override;
  void on_round_end(RequestState& state, const RoundOutcome& outcome, SimTime now) override;
  std::optional<RequestId> select_next(SimTime now) override;

 private:
  std::map<std::pair<SimTime, RequestId>, RequestId> open_;
  std::map<RequestId, SimTime> arrival_;
  std::optional<RequestId> running_;
};

class LpSjfPolicy final : public SchedulerPolicy {
 public:
  std::string name() const override { return "lp-sjf"; }
  void on_arrival(const RequestSpec& spec, RequestState& state, SimTime now) override;
  void on_round_end(RequestState& state, const RoundOutcome& outcome, SimTime now) override;
  std::optional<RequestId> select_next(SimTime now) override;

 private:
  struct Key {
    std::int64_t predicted;
    SimTime arrival;
    RequestId id;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, RequestId> open_;
  std::map<RequestId, Key> keys_;
  std::optional<RequestId> running_;
};

// Least attained service over K exponential queues, FCFS inside a queue,
// preemption at round boundaries.
class LasPolicy final : public SchedulerPolicy {
 public:
  explicit LasPolicy(QueueConfig queues);

  std::string name() const override { return "las"; }
  void on_arrival(const RequestSpec& spec, RequestState& state, SimTime now) override;
  void on_round_end(RequestState& state, const RoundOutcome& outcome, SimTime now) override;
  std::optional<RequestId> select_next(SimTime now) override;
  int queue_count() const override { return static_cast<int>(intervals_.size()); }

 private:
  struct Entry {
    SimTime arrival;
    int queue = 1;
  };
  std::vector<QueueInterval> intervals_;
  std::map<RequestId, Entry> open_;
};

// Semi-clairvoyant multi-queue scheduler. Non-perceptible requests are served
// least-attained-service style with preemption; once a request's acceptance
// rate stabilizes it gets an execution-time estimate, is placed by that
// estimate, and is scheduled shortest-remaining-first without preemption.
class LapsSdPolicy final : public SchedulerPolicy {
 public:
  LapsSdPolicy(LapsSdConfig cfg, CostModel cost, ServiceOracle oracle = {});

  std::string name() const override { return "laps-sd"; }
  void on_arrival(const RequestSpec& spec, RequestState& state, SimTime now) override;
  void on_round_end(RequestState& state, const RoundOutcome& outcome, SimTime now) override;
  void on_stabilized(RequestState& state, SimTime estimate, SimTime now) override;
  std::optional<RequestId> select_next(SimTime now) override;
  int queue_count() const override { return static_cast<int>(intervals_.size()); }

  const std::vector<QueueInterval>& intervals() const { return intervals_; }

 private:
  struct Entry {
    SimTime arrival;
    std::int64_t predicted_len = 1;
    int queue = 1;
    bool perceptible = false;
    double accept_rate = 0.0;
    SimTime estimate_total;
    std::int64_t tokens_accepted = 0;
    SimTime attained;
  };

  SimTime remaining(const Entry& e) const;

  LapsSdConfig cfg_;
  CostModel cost_;
  ServiceOracle oracle_;
  std::vector<QueueInterval> intervals_;
  std::map<RequestId, Entry> open_;
  // Perceptible request that has been dispatched; runs to completion.
  std::optional<RequestId> committed_;
};

struct PolicySettings {
  LapsSdConfig laps;  // queue layout also used by LAS
};

inline constexpr std::string_view kPolicyNames[] = {"fcfs", "lp-sjf", "las", "laps-sd"};

bool is_policy_name(std::string_view name);

// Builds a fresh policy by CLI name. Oracle-estimate mode binds the exact
// isolated service time under (cost, seed).
std::unique_ptr<SchedulerPolicy> make_policy(std::string_view name,
                                             const PolicySettings& settings,
                                             const CostModel& cost, std::uint64_t seed);

}  // namespace specsched
