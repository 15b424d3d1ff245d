#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specsched/core.hpp"
#include "specsched/policy.hpp"

namespace specsched {

// Uniform draws for one (seed, request, round) triple. Streams are keyed so
// token outcomes do not depend on the order requests are scheduled in.
class RoundRng {
 public:
  RoundRng(std::uint64_t seed, RequestId id, std::int64_t round);
  double uniform();  // [0, 1)

 private:
  std::uint64_t state_;
};

// Runs one draft-then-verify round for `state` and updates its counters,
// attained service and cumulative rate history.
RoundOutcome execute_round(RequestState& state, const RequestSpec& spec,
                           const CostModel& cost, std::uint64_t seed);

// Total speculation + verification time of a request run alone. Equal to its
// service time under any schedule with the same seed.
SimTime isolated_service_time(const RequestSpec& spec, const CostModel& cost,
                              std::uint64_t seed);

struct RequestRecord {
  RequestId id = 0;
  SimTime arrival;
  SimTime first_service;
  SimTime completion;
  SimTime latency;
  std::int64_t rounds = 0;
  std::int64_t tokens_proposed = 0;
  std::int64_t tokens_accepted = 0;
  std::int64_t preemptions = 0;
  std::optional<SimTime> estimate;
  SimTime service;

  bool operator==(const RequestRecord&) const = default;
};

// Consecutive rounds of one request. `switch_cost` is the context switch paid
// right before the segment started.
struct ScheduleSegment {
  RequestId id = 0;
  SimTime start;
  std::int64_t rounds = 0;
  SimTime switch_cost;

  bool operator==(const ScheduleSegment&) const = default;
};

struct SimReport {
  std::string policy;
  std::uint64_t seed = 0;
  int queue_count = 0;
  std::string config_hash;

  std::vector<RequestRecord> records;  // sorted by id
  std::vector<ScheduleSegment> schedule;

  double avg_latency_us = 0.0;
  SimTime p50_latency;
  SimTime p95_latency;
  SimTime max_latency;
  SimTime total_switch_overhead;
  std::int64_t switch_count = 0;
  SimTime total_busy;
  SimTime makespan;

  // Requests in first-service order.
  std::vector<RequestId> start_order() const;
  // Requests in completion order.
  std::vector<RequestId> completion_order() const;

  bool operator==(const SimReport&) const = default;
};

SimReport run_simulation(std::vector<RequestSpec> requests, SchedulerPolicy& policy,
                         const CostModel& cost, std::uint64_t seed);

}  // namespace specsched
