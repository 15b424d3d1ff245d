#include "specsched/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace specsched {

SimTime SimTime::from_ms(double ms) {
  return SimTime(static_cast<std::int64_t>(std::llround(ms * 1000.0)));
}

std::ostream& operator<<(std::ostream& os, SimTime t) {
  if (t.is_infinite()) return os << "inf";
  return os << t.ms() << "ms";
}

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

AcceptanceProcess AcceptanceProcess::constant(double rate) {
  AcceptanceProcess p;
  p.kind = Kind::Constant;
  p.stable_rate = rate;
  p.validate();
  return p;
}

AcceptanceProcess AcceptanceProcess::stabilizing(double stable_rate, double amplitude,
                                                 double decay, double period) {
  AcceptanceProcess p;
  p.kind = Kind::Stabilizing;
  p.stable_rate = stable_rate;
  p.amplitude = amplitude;
  p.decay = decay;
  p.period = period;
  p.validate();
  return p;
}

AcceptanceProcess AcceptanceProcess::from_trace(std::vector<double> rates) {
  AcceptanceProcess p;
  p.kind = Kind::Trace;
  p.trace = std::move(rates);
  if (!p.trace.empty()) p.stable_rate = clamp01(p.trace.back());
  p.validate();
  return p;
}

void AcceptanceProcess::validate() const {
  if (!is_probability(stable_rate))
    throw std::invalid_argument("acceptance.stable_rate must be in [0, 1]");
  if (!(amplitude >= 0.0))
    throw std::invalid_argument("acceptance.amplitude must be >= 0");
  if (!(decay >= 0.0 && decay < 1.0))
    throw std::invalid_argument("acceptance.decay must be in [0, 1)");
  if (!(period > 0.0))
    throw std::invalid_argument("acceptance.period must be > 0");
  if (kind == Kind::Trace) {
    if (trace.empty()) throw std::invalid_argument("acceptance.trace must not be empty");
    for (double r : trace)
      if (!is_probability(r))
        throw std::invalid_argument("acceptance.trace entries must be in [0, 1]");
  }
}

std::string_view to_string(AcceptanceProcess::Kind kind) {
  switch (kind) {
    case AcceptanceProcess::Kind::Constant: return "constant";
    case AcceptanceProcess::Kind::Stabilizing: return "stabilizing";
    case AcceptanceProcess::Kind::Trace: return "trace";
  }
  return "?";
}

AcceptanceProcess::Kind parse_acceptance_kind(std::string_view name) {
  if (name == "constant") return AcceptanceProcess::Kind::Constant;
  if (name == "stabilizing") return AcceptanceProcess::Kind::Stabilizing;
  if (name == "trace") return AcceptanceProcess::Kind::Trace;
  throw std::invalid_argument("unknown acceptance kind '" + std::string(name) + "'");
}

void RequestSpec::validate() const {
  if (arrival_time < SimTime::zero())
    throw std::invalid_argument("arrival_time must be >= 0");
  if (prompt_len < 0) throw std::invalid_argument("prompt_len must be >= 0");
  if (true_output_len < 1) throw std::invalid_argument("true_output_len must be >= 1");
  if (predicted_output_len < 1)
    throw std::invalid_argument("predicted_output_len must be >= 1");
  acceptance.validate();
}

std::string_view to_string(AcceptanceMode mode) {
  switch (mode) {
    case AcceptanceMode::Truncated: return "truncated";
    case AcceptanceMode::Independent: return "independent";
    case AcceptanceMode::Expected: return "expected";
  }
  return "?";
}

AcceptanceMode parse_acceptance_mode(std::string_view name) {
  if (name == "truncated") return AcceptanceMode::Truncated;
  if (name == "independent") return AcceptanceMode::Independent;
  if (name == "expected") return AcceptanceMode::Expected;
  throw std::invalid_argument("unknown acceptance mode '" + std::string(name) +
                              "' (expected truncated|independent|expected)");
}

void CostModel::validate() const {
  if (t_ssm_per_token < SimTime::zero() || t_llm_verify < SimTime::zero() ||
      switch_base < SimTime::zero() || switch_per_token < SimTime::zero())
    throw std::invalid_argument("cost model times must be >= 0");
  if (spec_len < 1) throw std::invalid_argument("cost.spec_len must be >= 1");
  if (round_duration() == SimTime::zero())
    throw std::invalid_argument("cost model round duration must be > 0");
}

std::vector<QueueInterval> queue_thresholds(int k, SimTime s1_up, double growth) {
  if (k < 1) throw std::invalid_argument("queue count K must be >= 1");
  if (s1_up <= SimTime::zero()) throw std::invalid_argument("s1_up must be > 0");
  if (!(growth > 1.0)) throw std::invalid_argument("growth factor M must be > 1");

  std::vector<QueueInterval> queues;
  queues.reserve(static_cast<std::size_t>(k));
  SimTime down = SimTime::zero();
  for (int j = 1; j <= k; ++j) {
    SimTime up = SimTime::infinity();
    if (j < k) {
      const double us = std::pow(growth, j - 1) * static_cast<double>(s1_up.us());
      if (us < 9.0e18) up = SimTime::from_us(std::llround(us));
    }
    queues.push_back({down, up});
    down = up;
  }
  return queues;
}

int queue_index_for(const std::vector<QueueInterval>& queues, SimTime t) {
  for (std::size_t j = 0; j < queues.size(); ++j)
    if (queues[j].contains(t)) return static_cast<int>(j) + 1;
  return static_cast<int>(queues.size());
}

double acceptance_rate_at(const AcceptanceProcess& proc, std::int64_t round) {
  if (round < 0) throw ContractViolation("acceptance_rate_at: negative round");
  switch (proc.kind) {
    case AcceptanceProcess::Kind::Constant:
      return proc.stable_rate;
    case AcceptanceProcess::Kind::Stabilizing: {
      const double t = static_cast<double>(round);
      const double envelope = proc.amplitude * std::pow(proc.decay, t);
      return clamp01(proc.stable_rate +
                     envelope * std::sin(2.0 * std::numbers::pi * t / proc.period));
    }
    case AcceptanceProcess::Kind::Trace: {
      if (proc.trace.empty()) throw ContractViolation("trace process without entries");
      const auto last = static_cast<std::int64_t>(proc.trace.size()) - 1;
      return proc.trace[static_cast<std::size_t>(std::min(round, last))];
    }
  }
  return proc.stable_rate;
}

}  // namespace specsched
