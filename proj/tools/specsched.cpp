// specsched: workload generation, simulation, policy comparison and K sweeps.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specsched/builtin.hpp"
#include "specsched/config.hpp"
#include "specsched/engine.hpp"
#include "specsched/policies.hpp"
#include "specsched/report.hpp"
#include "specsched/workload.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace specsched;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config_path;
  std::string cost_path;
  std::vector<std::string> overrides;
};

std::string policy_list() {
  std::string out;
  for (auto name : kPolicyNames) out += (out.empty() ? "" : ", ") + std::string(name);
  return out;
}

// "a.b.c=value": value is parsed as JSON when possible, else taken as a string.
void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError("--set expects key.path=value, got '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::stringstream parts(path);
  std::string part;
  std::vector<std::string> keys;
  while (std::getline(parts, part, '.')) keys.push_back(part);
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    if (!node->contains(keys[i])) (*node)[keys[i]] = json::object();
    node = &(*node)[keys[i]];
  }
  (*node)[keys.back()] = value;
}

ExperimentConfig resolve_config(const CommonOptions& opts) {
  json doc = json::object();
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw ConfigError("config: cannot open " + opts.config_path);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config: " + opts.config_path + ": " + e.what());
    }
  }
  for (const auto& o : opts.overrides) apply_override(doc, o);
  return config_from_json(doc);
}

struct Inputs {
  ExperimentConfig config;
  std::vector<RequestSpec> requests;
  std::string hash;
};

Inputs resolve_inputs(const CommonOptions& opts, const std::string& trace) {
  Inputs in;
  in.config = resolve_config(opts);
  if (trace.starts_with(kBuiltinScheme)) {
    auto builtin = builtin_trace(trace);
    if (!builtin) {
      std::string names;
      for (const auto& n : builtin_trace_names()) names += (names.empty() ? "" : ", ") + n;
      throw UsageError("unknown builtin trace '" + trace + "' (known: " + names + ")");
    }
    in.requests = std::move(builtin->requests);
    if (builtin->cost) in.config.cost = *builtin->cost;
  } else {
    in.requests = load_trace(trace);
  }
  if (!opts.cost_path.empty()) in.config.cost = load_cost(opts.cost_path, in.config.cost);
  in.hash = config_hash(json{{"config", config_to_json(in.config)},
                             {"trace", trace_to_string(in.requests)}});
  return in;
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SPECSCHED_THREADS")) {
    try {
      const long cap = std::stol(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      throw UsageError("SPECSCHED_THREADS must be a positive integer");
    }
  }
  return n;
}

std::vector<std::uint64_t> seed_list(int count, std::uint64_t base) {
  if (count < 1) throw UsageError("--seeds must be >= 1");
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  return seeds;
}

std::string provenance(const std::string& hash) {
  return "# specsched " + std::string(kToolVersion) + " config_hash=" + hash + "\n";
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json provenance_json(const Inputs& in) {
  return json{{"tool", "specsched"},
              {"version", kToolVersion},
              {"config_hash", in.hash},
              {"config", config_to_json(in.config)}};
}

int cmd_generate(const CommonOptions& opts, const std::string& out_path,
                 std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = resolve_config(opts);
  if (seed) cfg.workload.seed = *seed;
  const auto requests = generate_workload(cfg.workload);
  save_trace(out_path, requests);
  std::cout << "wrote " << requests.size() << " requests to " << out_path << " (config_hash "
            << config_hash(config_to_json(cfg)) << ")\n";
  return kExitOk;
}

int cmd_run(const CommonOptions& opts, const std::string& trace, const std::string& policy_name,
            std::uint64_t seed, const fs::path& out_dir) {
  if (!is_policy_name(policy_name))
    throw UsageError("unknown policy '" + policy_name + "' (valid: " + policy_list() + ")");
  Inputs in = resolve_inputs(opts, trace);
  auto policy = make_policy(policy_name, in.config.policy, in.config.cost, seed);
  SimReport report = run_simulation(in.requests, *policy, in.config.cost, seed);
  report.config_hash = in.hash;

  fs::create_directories(out_dir);
  const Metrics m = summarize(report);
  write_file(out_dir / "report.csv", provenance(in.hash) + to_csv(std::span(&m, 1)));
  json doc = report_to_json(report);
  doc["provenance"] = provenance_json(in);
  write_file(out_dir / "report.json", doc.dump(2) + "\n");

  std::cout << policy_name << ": avg_latency_us=" << format_number(report.avg_latency_us)
            << " p95_us=" << report.p95_latency.us() << " preemptions=" << m.preemptions
            << " switch_overhead_us=" << report.total_switch_overhead.us() << "\n";
  return kExitOk;
}

int cmd_compare(const CommonOptions& opts, const std::string& trace,
                const std::vector<std::string>& policies, int seeds, std::uint64_t seed_base,
                const fs::path& out_dir) {
  if (policies.empty()) throw UsageError("--policies must name at least one policy");
  for (const auto& p : policies)
    if (!is_policy_name(p))
      throw UsageError("unknown policy '" + p + "' (valid: " + policy_list() + ")");
  Inputs in = resolve_inputs(opts, trace);
  const auto seed_vec = seed_list(seeds, seed_base);
  const Comparison cmp = compare_policies(in.requests, in.config.cost, in.config.policy, policies,
                                          seed_vec, worker_count());

  fs::create_directories(out_dir);
  write_file(out_dir / "compare.csv", provenance(in.hash) + to_csv(cmp.runs));
  write_file(out_dir / "compare_summary.csv", provenance(in.hash) + comparison_summary_csv(cmp));
  json doc;
  doc["provenance"] = provenance_json(in);
  doc["runs"] = json::array();
  for (const auto& m : cmp.runs) doc["runs"].push_back(metrics_to_json(m));
  doc["summary"] = json::array();
  for (const auto& s : cmp.summary) {
    doc["summary"].push_back({{"policy", s.policy},
                              {"mean_avg_latency_us", s.mean_avg_latency_us},
                              {"stdev_avg_latency_us", s.stdev_avg_latency_us}});
  }
  doc["laps_sd_improvement"] = json::object();
  for (const auto& [name, v] : cmp.improvement) doc["laps_sd_improvement"][name] = v;
  write_file(out_dir / "compare.json", doc.dump(2) + "\n");

  for (const auto& s : cmp.summary)
    std::cout << s.policy << ": mean avg_latency_us=" << format_number(s.mean_avg_latency_us)
              << " stdev=" << format_number(s.stdev_avg_latency_us) << "\n";
  for (const auto& [name, v] : cmp.improvement)
    std::cout << "laps-sd vs " << name << ": " << format_number(v * 100.0) << "% lower\n";
  return kExitOk;
}

int cmd_sweep(const CommonOptions& opts, const std::string& trace, int k_min, int k_max,
              int seeds, std::uint64_t seed_base, const fs::path& out_dir) {
  if (k_min < 1) throw UsageError("--k-min must be >= 1");
  if (k_min > k_max) throw UsageError("--k-min must not exceed --k-max");
  Inputs in = resolve_inputs(opts, trace);
  const auto seed_vec = seed_list(seeds, seed_base);
  const KSweep sweep = sweep_k(in.requests, in.config.cost, in.config.policy, k_min, k_max,
                               seed_vec, worker_count());

  fs::create_directories(out_dir);
  write_file(out_dir / "ksweep.csv", provenance(in.hash) + to_csv(sweep.runs));
  write_file(out_dir / "ksweep_summary.csv", provenance(in.hash) + ksweep_summary_csv(sweep));
  json doc;
  doc["provenance"] = provenance_json(in);
  doc["points"] = json::array();
  for (const auto& p : sweep.points)
    doc["points"].push_back({{"K", p.k},
                             {"mean_avg_latency_us", p.mean_avg_latency_us},
                             {"stdev_avg_latency_us", p.stdev_avg_latency_us},
                             {"mean_switch_overhead_us", p.mean_switch_overhead_us},
                             {"mean_preemptions", p.mean_preemptions}});
  write_file(out_dir / "ksweep.json", doc.dump(2) + "\n");

  for (const auto& p : sweep.points)
    std::cout << "K=" << p.k << ": mean avg_latency_us=" << format_number(p.mean_avg_latency_us)
              << " switch_overhead_us=" << format_number(p.mean_switch_overhead_us) << "\n";
  return kExitOk;
}

int cmd_estimator(const CommonOptions& opts, const std::string& trace, int seeds,
                  std::uint64_t seed_base, const fs::path& out_dir) {
  Inputs in = resolve_inputs(opts, trace);
  const auto seed_vec = seed_list(seeds, seed_base);
  const auto acc =
      estimator_accuracy(in.requests, in.config.cost, in.config.policy.laps.stability, seed_vec);
  fs::create_directories(out_dir);
  write_file(out_dir / "estimator.csv", provenance(in.hash) + estimator_csv(acc));
  json doc;
  doc["provenance"] = provenance_json(in);
  doc["stabilized"] = acc.stabilized;
  doc["requests"] = acc.rows.size();
  doc["mape"] = acc.mape;
  doc["mean_signed_error"] = acc.mean_signed_error;
  write_file(out_dir / "estimator.json", doc.dump(2) + "\n");
  std::cout << "stabilized " << acc.stabilized << "/" << acc.rows.size()
            << " MAPE=" << format_number(acc.mape * 100.0)
            << "% mean signed error=" << format_number(acc.mean_signed_error * 100.0) << "%\n";
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_cost) {
  cmd->add_option("--config", opts.config_path, "Experiment config (JSON)");
  if (with_cost) cmd->add_option("--cost", opts.cost_path, "Cost model (JSON), overrides config");
  cmd->add_option("--set", opts.overrides, "Override a config key: key.path=value")
      ->take_all();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speculative-decoding request scheduling simulator"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommonOptions opts;
  std::string trace;
  std::string out;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> gen_seed;
  std::string policy;
  std::vector<std::string> policies;
  int seeds = 1;
  std::uint64_t seed_base = 1;
  int k_min = 2;
  int k_max = 10;

  auto* gen = app.add_subcommand("generate", "Generate a synthetic workload trace");
  add_common(gen, opts, false);
  gen->add_option("--out", out, "Trace file to write")->required();
  gen->add_option("--seed", gen_seed, "Workload seed (overrides config)");

  auto* run = app.add_subcommand("run", "Simulate one policy on a trace");
  add_common(run, opts, true);
  run->add_option("--trace", trace, "Trace file or builtin:NAME")->required();
  run->add_option("--policy", policy, "fcfs | lp-sjf | las | laps-sd")->required();
  run->add_option("--seed", seed, "Token-outcome seed");
  run->add_option("--out", out, "Output directory")->required();

  auto* cmp = app.add_subcommand("compare", "Compare policies across seeds");
  add_common(cmp, opts, true);
  cmp->add_option("--trace", trace, "Trace file or builtin:NAME")->required();
  cmp->add_option("--policies", policies, "Comma-separated policy names")
      ->delimiter(',')
      ->required();
  cmp->add_option("--seeds", seeds, "Number of seeds");
  cmp->add_option("--seed-base", seed_base, "First seed");
  cmp->add_option("--out", out, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep-k", "Sweep the LAPS-SD queue count");
  add_common(sweep, opts, true);
  sweep->add_option("--trace", trace, "Trace file or builtin:NAME")->required();
  sweep->add_option("--k-min", k_min, "Smallest K");
  sweep->add_option("--k-max", k_max, "Largest K");
  sweep->add_option("--seeds", seeds, "Number of seeds");
  sweep->add_option("--seed-base", seed_base, "First seed");
  sweep->add_option("--out", out, "Output directory")->required();

  auto* est = app.add_subcommand("estimator", "Execution-time estimate accuracy per request");
  add_common(est, opts, true);
  est->add_option("--trace", trace, "Trace file or builtin:NAME")->required();
  est->add_option("--seeds", seeds, "Number of seeds");
  est->add_option("--seed-base", seed_base, "First seed");
  est->add_option("--out", out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(opts, out, gen_seed);
    if (run->parsed()) return cmd_run(opts, trace, policy, seed, out);
    if (cmp->parsed()) return cmd_compare(opts, trace, policies, seeds, seed_base, out);
    if (sweep->parsed()) return cmd_sweep(opts, trace, k_min, k_max, seeds, seed_base, out);
    if (est->parsed()) return cmd_estimator(opts, trace, seeds, seed_base, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
