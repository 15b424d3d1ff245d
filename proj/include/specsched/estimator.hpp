#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "specsched/core.hpp"

namespace specsched {

struct StabilityConfig {
  enum class Rule {
    Spread,    // max - min over the last gamma cumulative rates
    Adjacent,  // largest step between consecutive entries in the window
  };

  int gamma = 5;
  double delta = 0.05;
  Rule rule = Rule::Spread;

  void validate() const;
};

// Cumulative draft acceptance rate after each completed round, bonus tokens
// excluded from numerator and denominator.
std::vector<double> cumulative_rate_history(const RequestState& state);

// Same series rebuilt from per-round (proposed, accepted draft) counts.
std::vector<double> cumulative_rate_history(
    std::span<const std::pair<std::int64_t, std::int64_t>> rounds);

// True once the last gamma entries differ by strictly less than delta.
// delta == 0 never fires.
bool is_stable(std::span<const double> history, const StabilityConfig& cfg);

// Mean of the last gamma entries. Requires is_stable(history, cfg).
double predict_acceptance(std::span<const double> history, const StabilityConfig& cfg);

// Expected time to produce `tokens` tokens when each round yields n*A + 1:
// speculation n*L*T_ssm/(nA+1) plus verification L*T_llm/(nA+1).
SimTime estimate_execution_time(std::int64_t tokens, double accept_rate,
                                std::int64_t spec_len, SimTime t_ssm, SimTime t_llm);

inline SimTime estimate_execution_time(std::int64_t tokens, double accept_rate,
                                       const CostModel& cost) {
  return estimate_execution_time(tokens, accept_rate, cost.spec_len,
                                 cost.t_ssm_per_token, cost.t_llm_verify);
}

}  // namespace specsched
