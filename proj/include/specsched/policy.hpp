#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "specsched/core.hpp"

namespace specsched {

struct RoundOutcome {
  // Tokens committed this round, bonus token included, clipped at completion.
  std::int64_t tokens_accepted_this_round = 0;
  std::int64_t tokens_proposed = 0;
  // Draft tokens the verifier accepted, before clipping.
  std::int64_t draft_accepted = 0;
  SimTime round_duration;
  bool request_completed = false;
};

// Contract every scheduler implements. The engine owns the RequestState
// objects and invokes each callback exactly once per event; policies may only
// write the scheduling annotations of a state (perceptible, predicted rate,
// estimate, queue index).
class SchedulerPolicy {
 public:
  virtual ~SchedulerPolicy() = default;

  virtual std::string name() const = 0;

  virtual void on_arrival(const RequestSpec& spec, RequestState& state, SimTime now) = 0;

  // Fired after every round, including the one that completes the request.
  virtual void on_round_end(RequestState& state, const RoundOutcome& outcome,
                            SimTime now) = 0;

  // Fired when a request's acceptance rate is judged stable.
  virtual void on_stabilized(RequestState& /*state*/, SimTime /*estimate*/,
                             SimTime /*now*/) {}

  // Admitted, incomplete request to run next; nullopt only when none exist.
  virtual std::optional<RequestId> select_next(SimTime now) = 0;

  // Number of priority queues, or 0 for single-queue policies.
  virtual int queue_count() const { return 0; }
};

}  // namespace specsched
