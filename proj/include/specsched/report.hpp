#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "specsched/engine.hpp"
#include "specsched/estimator.hpp"
#include "specsched/policies.hpp"

namespace specsched {

struct Metrics {
  std::string policy;
  std::uint64_t seed = 0;
  int queue_count = 0;
  std::int64_t num_requests = 0;
  double avg_latency_us = 0.0;
  SimTime p50;
  SimTime p95;
  SimTime max;
  std::int64_t preemptions = 0;
  SimTime switch_overhead;
  SimTime busy;
  std::vector<RequestRecord> rows;

  bool operator==(const Metrics&) const = default;
};

Metrics summarize(const SimReport& report);

// Fixed CSV schema shared with the plotting scripts.
inline constexpr std::string_view kCsvHeader =
    "policy,seed,K,num_requests,avg_latency_us,p50_us,p95_us,max_us,preemptions,"
    "switch_overhead_us,busy_us";

std::string csv_row(const Metrics& m);
std::string to_csv(std::span<const Metrics> rows);

nlohmann::json report_to_json(const SimReport& report);
nlohmann::json metrics_to_json(const Metrics& m);

// Shortest round-trip decimal form of a double ("600000", "466.5").
std::string format_number(double x);

struct OptimalOrder {
  std::vector<std::size_t> order;  // 0-based request positions
  double avg_latency_us = 0.0;
};

inline constexpr std::size_t kBruteForceLimit = 8;

// Exhaustive search over run orders of simultaneously arriving jobs with known
// service times; returns the lexicographically smallest optimal order.
OptimalOrder brute_force_optimal(std::span<const SimTime> service_times);

struct EstimateRow {
  std::uint64_t seed = 0;
  RequestId id = 0;
  std::optional<std::int64_t> stabilized_round;
  std::optional<double> accept_rate;
  std::optional<SimTime> estimate;
  SimTime actual;
  std::optional<double> signed_error;  // (estimate - actual) / actual
};

struct EstimatorAccuracy {
  std::vector<EstimateRow> rows;
  std::size_t stabilized = 0;
  double mape = 0.0;             // mean |signed_error| over stabilized rows
  double mean_signed_error = 0.0;
};

// Replays each request alone (service is schedule-independent), detects
// stabilization, forms the total-time estimate from the predicted length and
// compares it against the realized total service time.
EstimatorAccuracy estimator_accuracy(std::span<const RequestSpec> workload,
                                     const CostModel& cost, const StabilityConfig& stability,
                                     std::span<const std::uint64_t> seeds);

inline constexpr std::string_view kEstimatorCsvHeader =
    "seed,id,stabilized_round,accept_rate,estimated_us,actual_us,signed_error";
std::string estimator_csv(const EstimatorAccuracy& acc);

struct PolicySummary {
  std::string policy;
  double mean_avg_latency_us = 0.0;
  double stdev_avg_latency_us = 0.0;
  std::vector<double> per_seed;
};

struct Comparison {
  std::vector<Metrics> runs;  // sorted by policy name, then seed
  std::vector<PolicySummary> summary;  // sorted by policy name
  // (baseline - laps-sd) / baseline for each other policy, when laps-sd ran.
  std::vector<std::pair<std::string, double>> improvement;
};

// Runs every (policy, seed) pair on the same workload. `threads` caps the
// number of concurrent simulations; results do not depend on it.
Comparison compare_policies(std::span<const RequestSpec> workload, const CostModel& cost,
                            const PolicySettings& settings,
                            std::span<const std::string> policies,
                            std::span<const std::uint64_t> seeds, unsigned threads = 1);

struct KSweepPoint {
  int k = 0;
  double mean_avg_latency_us = 0.0;
  double stdev_avg_latency_us = 0.0;
  double mean_switch_overhead_us = 0.0;
  double mean_preemptions = 0.0;
};

struct KSweep {
  std::vector<Metrics> runs;  // sorted by K, then seed
  std::vector<KSweepPoint> points;
};

KSweep sweep_k(std::span<const RequestSpec> workload, const CostModel& cost,
               const PolicySettings& settings, int k_min, int k_max,
               std::span<const std::uint64_t> seeds, unsigned threads = 1);

inline constexpr std::string_view kKSweepCsvHeader =
    "K,mean_avg_latency_us,stdev_avg_latency_us,mean_switch_overhead_us,mean_preemptions";
std::string ksweep_summary_csv(const KSweep& sweep);

std::string comparison_summary_csv(const Comparison& cmp);

}  // namespace specsched
