#include "specsched/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace specsched {

void StabilityConfig::validate() const {
  if (gamma < 2) throw std::invalid_argument("stability.gamma must be >= 2");
  if (!(delta >= 0.0)) throw std::invalid_argument("stability.delta must be >= 0");
}

std::vector<double> cumulative_rate_history(const RequestState& state) {
  return state.rate_history;
}

std::vector<double> cumulative_rate_history(
    std::span<const std::pair<std::int64_t, std::int64_t>> rounds) {
  std::vector<double> history;
  history.reserve(rounds.size());
  std::int64_t proposed = 0;
  std::int64_t accepted = 0;
  for (const auto& [p, a] : rounds) {
    proposed += p;
    accepted += a;
    history.push_back(proposed == 0 ? 0.0
                                    : static_cast<double>(accepted) /
                                          static_cast<double>(proposed));
  }
  return history;
}

bool is_stable(std::span<const double> history, const StabilityConfig& cfg) {
  const auto window = static_cast<std::size_t>(cfg.gamma);
  if (cfg.gamma < 1 || history.size() < window) return false;
  const auto tail = history.last(window);
  double spread = 0.0;
  if (cfg.rule == StabilityConfig::Rule::Spread) {
    const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
    spread = *hi - *lo;
  } else {
    for (std::size_t i = 1; i < tail.size(); ++i)
      spread = std::max(spread, std::abs(tail[i] - tail[i - 1]));
  }
  return spread < cfg.delta;
}

double predict_acceptance(std::span<const double> history, const StabilityConfig& cfg) {
  if (!is_stable(history, cfg))
    throw ContractViolation("predict_acceptance called on an unstable history");
  const auto tail = history.last(static_cast<std::size_t>(cfg.gamma));
  return std::accumulate(tail.begin(), tail.end(), 0.0) /
         static_cast<double>(tail.size());
}

SimTime estimate_execution_time(std::int64_t tokens, double accept_rate,
                                std::int64_t spec_len, SimTime t_ssm, SimTime t_llm) {
  if (tokens <= 0) return SimTime::zero();
  const double n = static_cast<double>(spec_len);
  const double per_round = n * accept_rate + 1.0;
  const double length = static_cast<double>(tokens);
  const double speculation = n * length * static_cast<double>(t_ssm.us()) / per_round;
  const double verification = length * static_cast<double>(t_llm.us()) / per_round;
  return SimTime::from_us(std::llround(speculation + verification));
}

}  // namespace specsched
