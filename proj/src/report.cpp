#include "specsched/report.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <map>
#include <numeric>
#include <thread>

namespace specsched {

using nlohmann::json;

namespace {

template <typename F>
void parallel_for(std::size_t count, unsigned threads, F&& body) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(std::max(threads, 1u), count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::pair<double, double> mean_stdev(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0))};
}

Metrics run_one(std::span<const RequestSpec> workload, const CostModel& cost,
                const PolicySettings& settings, const std::string& name, std::uint64_t seed) {
  auto policy = make_policy(name, settings, cost, seed);
  const SimReport rep =
      run_simulation(std::vector<RequestSpec>(workload.begin(), workload.end()), *policy, cost, seed);
  return summarize(rep);
}

}  // namespace

std::string format_number(double x) {
  char buf[400];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed);
  return std::string(buf, res.ptr);
}

Metrics summarize(const SimReport& report) {
  Metrics m;
  m.policy = report.policy;
  m.seed = report.seed;
  m.queue_count = report.queue_count;
  m.num_requests = static_cast<std::int64_t>(report.records.size());
  m.avg_latency_us = report.avg_latency_us;
  m.p50 = report.p50_latency;
  m.p95 = report.p95_latency;
  m.max = report.max_latency;
  for (const auto& r : report.records) m.preemptions += r.preemptions;
  m.switch_overhead = report.total_switch_overhead;
  m.busy = report.total_busy;
  m.rows = report.records;
  return m;
}

std::string csv_row(const Metrics& m) {
  std::string row = m.policy;
  const auto add = [&row](const std::string& v) {
    row += ',';
    row += v;
  };
  add(std::to_string(m.seed));
  add(std::to_string(m.queue_count));
  add(std::to_string(m.num_requests));
  add(format_number(m.avg_latency_us));
  add(std::to_string(m.p50.us()));
  add(std::to_string(m.p95.us()));
  add(std::to_string(m.max.us()));
  add(std::to_string(m.preemptions));
  add(std::to_string(m.switch_overhead.us()));
  add(std::to_string(m.busy.us()));
  return row;
}

std::string to_csv(std::span<const Metrics> rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& m : rows) {
    out += csv_row(m);
    out += '\n';
  }
  return out;
}

json metrics_to_json(const Metrics& m) {
  return json{{"policy", m.policy},
              {"seed", m.seed},
              {"K", m.queue_count},
              {"num_requests", m.num_requests},
              {"avg_latency_us", m.avg_latency_us},
              {"p50_us", m.p50.us()},
              {"p95_us", m.p95.us()},
              {"max_us", m.max.us()},
              {"preemptions", m.preemptions},
              {"switch_overhead_us", m.switch_overhead.us()},
              {"busy_us", m.busy.us()}};
}

json report_to_json(const SimReport& report) {
  json doc = metrics_to_json(summarize(report));
  doc["config_hash"] = report.config_hash;
  doc["switch_count"] = report.switch_count;
  doc["makespan_us"] = report.makespan.us();
  json rows = json::array();
  for (const auto& r : report.records) {
    json row{{"id", r.id},
             {"arrival_us", r.arrival.us()},
             {"first_service_us", r.first_service.us()},
             {"completion_us", r.completion.us()},
             {"latency_us", r.latency.us()},
             {"rounds", r.rounds},
             {"tokens_proposed", r.tokens_proposed},
             {"tokens_accepted", r.tokens_accepted},
             {"preemptions", r.preemptions},
             {"service_us", r.service.us()}};
    row["estimate_us"] = r.estimate ? json(r.estimate->us()) : json(nullptr);
    rows.push_back(std::move(row));
  }
  doc["requests"] = std::move(rows);
  json schedule = json::array();
  for (const auto& s : report.schedule)
    schedule.push_back(json::array({s.id, s.start.us(), s.rounds, s.switch_cost.us()}));
  doc["schedule"] = std::move(schedule);
  return doc;
}

OptimalOrder brute_force_optimal(std::span<const SimTime> service_times) {
  if (service_times.size() > kBruteForceLimit)
    throw std::invalid_argument("brute_force_optimal: at most " +
                                std::to_string(kBruteForceLimit) + " requests");
  OptimalOrder best;
  if (service_times.empty()) return best;
  std::vector<std::size_t> order(service_times.size());
  std::iota(order.begin(), order.end(), 0);
  std::int64_t best_sum = -1;
  do {
    std::int64_t clock = 0;
    std::int64_t sum = 0;
    for (std::size_t i : order) {
      clock += service_times[i].us();
      sum += clock;
    }
    if (best_sum < 0 || sum < best_sum) {
      best_sum = sum;
      best.order = order;
    }
  } while (std::next_permutation(order.begin(), order.end()));
  best.avg_latency_us =
      static_cast<double>(best_sum) / static_cast<double>(service_times.size());
  return best;
}

EstimatorAccuracy estimator_accuracy(std::span<const RequestSpec> workload,
                                     const CostModel& cost, const StabilityConfig& stability,
                                     std::span<const std::uint64_t> seeds) {
  EstimatorAccuracy acc;
  double abs_sum = 0.0;
  double signed_sum = 0.0;
  for (const std::uint64_t seed : seeds) {
    for (const auto& spec : workload) {
      EstimateRow row;
      row.seed = seed;
      row.id = spec.id;
      RequestState state;
      state.id = spec.id;
      while (true) {
        const auto outcome = execute_round(state, spec, cost, seed);
        if (outcome.request_completed) break;
        if (!row.estimate && is_stable(state.rate_history, stability)) {
          row.stabilized_round = state.rounds_executed;
          row.accept_rate = predict_acceptance(state.rate_history, stability);
          row.estimate = estimate_execution_time(spec.predicted_output_len, *row.accept_rate, cost);
        }
      }
      row.actual = state.attained_service;
      if (row.estimate) {
        const double actual = static_cast<double>(row.actual.us());
        row.signed_error = (static_cast<double>(row.estimate->us()) - actual) / actual;
        abs_sum += std::abs(*row.signed_error);
        signed_sum += *row.signed_error;
        ++acc.stabilized;
      }
      acc.rows.push_back(row);
    }
  }
  if (acc.stabilized > 0) {
    acc.mape = abs_sum / static_cast<double>(acc.stabilized);
    acc.mean_signed_error = signed_sum / static_cast<double>(acc.stabilized);
  }
  return acc;
}

std::string estimator_csv(const EstimatorAccuracy& acc) {
  std::string out(kEstimatorCsvHeader);
  out += '\n';
  for (const auto& r : acc.rows) {
    out += std::to_string(r.seed) + ',' + std::to_string(r.id) + ',';
    out += r.stabilized_round ? std::to_string(*r.stabilized_round) : "n/a";
    out += ',';
    out += r.accept_rate ? format_number(*r.accept_rate) : "n/a";
    out += ',';
    out += r.estimate ? std::to_string(r.estimate->us()) : "n/a";
    out += ',' + std::to_string(r.actual.us()) + ',';
    out += r.signed_error ? format_number(*r.signed_error) : "n/a";
    out += '\n';
  }
  return out;
}

Comparison compare_policies(std::span<const RequestSpec> workload, const CostModel& cost,
                            const PolicySettings& settings,
                            std::span<const std::string> policies,
                            std::span<const std::uint64_t> seeds, unsigned threads) {
  if (policies.empty()) throw std::invalid_argument("compare: empty policy list");
  if (seeds.empty()) throw std::invalid_argument("compare: empty seed list");
  for (const auto& p : policies)
    if (!is_policy_name(p)) throw std::invalid_argument("compare: unknown policy '" + p + "'");

  std::vector<std::string> names(policies.begin(), policies.end());
  std::stable_sort(names.begin(), names.end());

  Comparison cmp;
  cmp.runs.resize(names.size() * seeds.size());
  parallel_for(cmp.runs.size(), threads, [&](std::size_t i) {
    cmp.runs[i] = run_one(workload, cost, settings, names[i / seeds.size()],
                          seeds[i % seeds.size()]);
  });
  std::stable_sort(cmp.runs.begin(), cmp.runs.end(), [](const Metrics& a, const Metrics& b) {
    return std::tie(a.policy, a.seed) < std::tie(b.policy, b.seed);
  });

  for (const auto& name : names) {
    PolicySummary s;
    s.policy = name;
    for (const auto& m : cmp.runs)
      if (m.policy == name) s.per_seed.push_back(m.avg_latency_us);
    std::tie(s.mean_avg_latency_us, s.stdev_avg_latency_us) = mean_stdev(s.per_seed);
    cmp.summary.push_back(std::move(s));
  }
  const auto laps = std::find_if(cmp.summary.begin(), cmp.summary.end(),
                                 [](const auto& s) { return s.policy == "laps-sd"; });
  if (laps != cmp.summary.end()) {
    for (const auto& s : cmp.summary) {
      if (s.policy == "laps-sd" || s.mean_avg_latency_us <= 0.0) continue;
      cmp.improvement.emplace_back(
          s.policy, (s.mean_avg_latency_us - laps->mean_avg_latency_us) / s.mean_avg_latency_us);
    }
  }
  return cmp;
}

std::string comparison_summary_csv(const Comparison& cmp) {
  std::string out = "policy,mean_avg_latency_us,stdev_avg_latency_us,seeds,laps_sd_improvement\n";
  for (const auto& s : cmp.summary) {
    out += s.policy + ',' + format_number(s.mean_avg_latency_us) + ',' +
           format_number(s.stdev_avg_latency_us) + ',' + std::to_string(s.per_seed.size()) + ',';
    const auto it = std::find_if(cmp.improvement.begin(), cmp.improvement.end(),
                                 [&](const auto& p) { return p.first == s.policy; });
    out += it == cmp.improvement.end() ? "" : format_number(it->second);
    out += '\n';
  }
  return out;
}

KSweep sweep_k(std::span<const RequestSpec> workload, const CostModel& cost,
               const PolicySettings& settings, int k_min, int k_max,
               std::span<const std::uint64_t> seeds, unsigned threads) {
  if (k_min < 1) throw std::invalid_argument("sweep-k: k-min must be >= 1");
  if (k_min > k_max) throw std::invalid_argument("sweep-k: k-min must not exceed k-max");
  if (seeds.empty()) throw std::invalid_argument("sweep-k: empty seed list");

  const auto ks = static_cast<std::size_t>(k_max - k_min + 1);
  KSweep sweep;
  sweep.runs.resize(ks * seeds.size());
  parallel_for(sweep.runs.size(), threads, [&](std::size_t i) {
    PolicySettings s = settings;
    s.laps.queues.k = k_min + static_cast<int>(i / seeds.size());
    sweep.runs[i] = run_one(workload, cost, s, "laps-sd", seeds[i % seeds.size()]);
  });

  for (std::size_t j = 0; j < ks; ++j) {
    KSweepPoint p;
    p.k = k_min + static_cast<int>(j);
    std::vector<double> lat;
    double sw = 0.0;
    double pre = 0.0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const auto& m = sweep.runs[j * seeds.size() + s];
      lat.push_back(m.avg_latency_us);
      sw += static_cast<double>(m.switch_overhead.us());
      pre += static_cast<double>(m.preemptions);
    }
    std::tie(p.mean_avg_latency_us, p.stdev_avg_latency_us) = mean_stdev(lat);
    p.mean_switch_overhead_us = sw / static_cast<double>(seeds.size());
    p.mean_preemptions = pre / static_cast<double>(seeds.size());
    sweep.points.push_back(p);
  }
  return sweep;
}

std::string ksweep_summary_csv(const KSweep& sweep) {
  std::string out(kKSweepCsvHeader);
  out += '\n';
  for (const auto& p : sweep.points) {
    out += std::to_string(p.k) + ',' + format_number(p.mean_avg_latency_us) + ',' +
           format_number(p.stdev_avg_latency_us) + ',' + format_number(p.mean_switch_overhead_us) +
           ',' + format_number(p.mean_preemptions) + '\n';
  }
  return out;
}

}  // namespace specsched
