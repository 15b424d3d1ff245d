#include "specsched/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace specsched {

using nlohmann::json;

namespace {

void check_range(const UniformRange& r, double lo, double hi, bool hi_open,
                 const std::string& key) {
  const bool hi_ok = hi_open ? r.hi < hi : r.hi <= hi;
  if (!(r.lo >= lo && hi_ok && r.lo <= r.hi))
    throw std::invalid_argument(key + ": range [" + std::to_string(r.lo) + ", " +
                                std::to_string(r.hi) + "] outside allowed bounds");
}

void check_length(const LengthDistribution& d, std::int64_t floor_len, const std::string& key) {
  if (!std::isfinite(d.mu)) throw std::invalid_argument(key + ".mu must be finite");
  if (!(d.sigma >= 0.0)) throw std::invalid_argument(key + ".sigma must be >= 0");
  if (d.min_len < floor_len)
    throw std::invalid_argument(key + ".min must be >= " + std::to_string(floor_len));
  if (d.max_len < d.min_len) throw std::invalid_argument(key + ".max must be >= min");
}

std::int64_t sample_length(std::mt19937_64& rng, const LengthDistribution& d) {
  std::lognormal_distribution<double> dist(d.mu, d.sigma);
  const double x = dist(rng);
  return std::clamp<std::int64_t>(std::llround(x), d.min_len, d.max_len);
}

double sample_uniform(std::mt19937_64& rng, const UniformRange& r) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  return r.lo + (r.hi - r.lo) * dist(rng);
}

json acceptance_to_json(const AcceptanceProcess& p) {
  return json{{"kind", to_string(p.kind)},       {"stable_rate", p.stable_rate},
              {"amplitude", p.amplitude},        {"decay", p.decay},
              {"period", p.period},              {"trace", p.trace}};
}

json request_to_json(const RequestSpec& r) {
  json j;
  j["id"] = r.id;
  j["arrival_time_us"] = r.arrival_time.us();
  j["prompt_len"] = r.prompt_len;
  j["true_output_len"] = r.true_output_len;
  j["predicted_output_len"] = r.predicted_output_len;
  j["acceptance"] = acceptance_to_json(r.acceptance);
  return j;
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw TraceError(where + ": missing field '" + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw TraceError(where + ": field '" + key + "' has the wrong type");
  }
}

RequestSpec request_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw TraceError(where + ": record is not a JSON object");
  RequestSpec r;
  r.id = field<std::int64_t>(j, "id", where);
  r.arrival_time = SimTime::from_us(field<std::int64_t>(j, "arrival_time_us", where));
  r.prompt_len = field<std::int64_t>(j, "prompt_len", where);
  r.true_output_len = field<std::int64_t>(j, "true_output_len", where);
  r.predicted_output_len = field<std::int64_t>(j, "predicted_output_len", where);
  const auto acc = field<json>(j, "acceptance", where);
  if (!acc.is_object()) throw TraceError(where + ": field 'acceptance' must be an object");
  const std::string sub = where + " acceptance";
  try {
    r.acceptance.kind = parse_acceptance_kind(field<std::string>(acc, "kind", sub));
  } catch (const std::invalid_argument& e) {
    throw TraceError(sub + ": " + e.what());
  }
  r.acceptance.stable_rate = field<double>(acc, "stable_rate", sub);
  r.acceptance.amplitude = field<double>(acc, "amplitude", sub);
  r.acceptance.decay = field<double>(acc, "decay", sub);
  r.acceptance.period = field<double>(acc, "period", sub);
  r.acceptance.trace = field<std::vector<double>>(acc, "trace", sub);
  try {
    r.validate();
  } catch (const std::invalid_argument& e) {
    throw TraceError(where + ": " + e.what());
  }
  return r;
}

}  // namespace

void WorkloadConfig::validate() const {
  if (num_requests < 1) throw std::invalid_argument("workload.num_requests must be >= 1");
  if (arrival.kind == ArrivalProcess::Kind::Poisson && !(arrival.rate_per_sec > 0.0))
    throw std::invalid_argument("workload.arrival.rate must be > 0");
  check_length(output_len, 1, "workload.output_len");
  check_length(prompt_len, 0, "workload.prompt_len");
  check_range(acceptance.stable_rate, 0.0, 1.0, false, "workload.acceptance_profile.stable_rate");
  check_range(acceptance.amplitude, 0.0, 1.0, false, "workload.acceptance_profile.amplitude");
  check_range(acceptance.decay, 0.0, 1.0, true, "workload.acceptance_profile.decay");
  if (!(acceptance.period.lo > 0.0))
    throw std::invalid_argument("workload.acceptance_profile.period: must be > 0");
  check_range(acceptance.period, 0.0, 1e9, false, "workload.acceptance_profile.period");
  if (acceptance.kind == AcceptanceProcess::Kind::Trace)
    throw std::invalid_argument("workload.acceptance_profile.kind: trace processes cannot be sampled");
  if (!(predictor_noise >= 0.0))
    throw std::invalid_argument("workload.predictor_noise must be >= 0");
}

std::vector<RequestSpec> generate_workload(const WorkloadConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  std::vector<RequestSpec> out;
  out.reserve(static_cast<std::size_t>(cfg.num_requests));
  double clock_sec = 0.0;
  for (std::int64_t i = 0; i < cfg.num_requests; ++i) {
    RequestSpec r;
    r.id = i + 1;
    if (cfg.arrival.kind == ArrivalProcess::Kind::Poisson) {
      std::exponential_distribution<double> gap(cfg.arrival.rate_per_sec);
      clock_sec += gap(rng);
      r.arrival_time = SimTime::from_us(std::llround(clock_sec * 1e6));
    }
    r.true_output_len = sample_length(rng, cfg.output_len);
    r.prompt_len = sample_length(rng, cfg.prompt_len);

    const auto& ap = cfg.acceptance;
    const double stable = sample_uniform(rng, ap.stable_rate);
    const double amplitude = sample_uniform(rng, ap.amplitude);
    const double decay = sample_uniform(rng, ap.decay);
    const double period = sample_uniform(rng, ap.period);
    r.acceptance = ap.kind == AcceptanceProcess::Kind::Constant
                       ? AcceptanceProcess::constant(stable)
                       : AcceptanceProcess::stabilizing(stable, amplitude, decay, period);

    const double z = noise(rng);
    const double predicted =
        static_cast<double>(r.true_output_len) * std::exp(cfg.predictor_noise * z);
    r.predicted_output_len = std::max<std::int64_t>(1, std::llround(predicted));
    out.push_back(std::move(r));
  }
  return out;
}

std::string trace_to_string(const std::vector<RequestSpec>& requests) {
  std::string text;
  for (const auto& r : requests) {
    text += request_to_json(r).dump();
    text += '\n';
  }
  return text;
}

std::vector<RequestSpec> trace_from_string(const std::string& text) {
  std::vector<RequestSpec> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<RequestId> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw TraceError(where + ": malformed JSON: " + e.what());
    }
    out.push_back(request_from_json(j, where));
    if (!seen.insert(out.back().id).second)
      throw TraceError(where + ": duplicate id " + std::to_string(out.back().id));
  }
  if (out.empty()) throw TraceError("empty trace");
  return out;
}

void save_trace(const std::filesystem::path& path, const std::vector<RequestSpec>& requests) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceError("cannot open " + path.string() + " for writing");
  out << trace_to_string(requests);
  if (!out) throw TraceError("write failed for " + path.string());
}

std::vector<RequestSpec> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceError("cannot open trace " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return trace_from_string(buf.str());
}

}  // namespace specsched
