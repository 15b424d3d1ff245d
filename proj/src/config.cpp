#include "specsched/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "specsched/profiles_data.hpp"

namespace specsched {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Cursor over one JSON object that remembers its dotted path and rejects
// keys it was not asked about.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  double number(const std::string& key, double fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(join(path_, key) + ": expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(path_, key) + ": expected an integer");
    return v.get<std::int64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError(join(path_, key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(join(path_, key) + ": expected a string");
    return v.get<std::string>();
  }

  SimTime millis(const std::string& key, SimTime fallback) {
    if (!has(key)) {
      seen_.insert(key);
      return fallback;
    }
    const double ms = number(key, 0.0);
    if (!(ms >= 0.0)) throw ConfigError(join(path_, key) + ": must be >= 0");
    return SimTime::from_ms(ms);
  }

  // A [lo, hi] pair or a single number meaning lo == hi.
  UniformRange range(const std::string& key, UniformRange fallback) {
    seen_.insert(key);
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (v.is_number()) return {v.get<double>(), v.get<double>()};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
      return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(join(path_, key) + ": expected a number or [lo, hi]");
  }

  std::optional<Section> child(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return std::nullopt;
    return Section(obj_.at(key), join(path_, key));
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items())
      if (!seen_.count(key)) throw ConfigError(join(path_, key) + ": unknown key");
  }

  const std::string& path() const { return path_; }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
void rethrow_as_config_error(F&& f) {
  try {
    f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

LengthDistribution parse_length(Section s, LengthDistribution d) {
  d.mu = s.number("mu", d.mu);
  d.sigma = s.number("sigma", d.sigma);
  d.min_len = s.integer("min", d.min_len);
  d.max_len = s.integer("max", d.max_len);
  s.finish();
  return d;
}

void parse_workload(Section s, WorkloadConfig& w) {
  s.text("profile", "");
  w.num_requests = s.integer("num_requests", w.num_requests);
  const auto seed = s.integer("seed", static_cast<std::int64_t>(w.seed));
  if (seed < 0) throw ConfigError(join(s.path(), "seed") + ": must be >= 0");
  w.seed = static_cast<std::uint64_t>(seed);
  w.predictor_noise = s.number("predictor_noise", w.predictor_noise);

  if (auto a = s.child("arrival")) {
    const auto kind = a->text("kind", w.arrival.kind == ArrivalProcess::Kind::Poisson
                                          ? "poisson"
                                          : "all_at_zero");
    if (kind == "poisson")
      w.arrival.kind = ArrivalProcess::Kind::Poisson;
    else if (kind == "all_at_zero")
      w.arrival.kind = ArrivalProcess::Kind::AllAtZero;
    else
      throw ConfigError(join(a->path(), "kind") + ": expected poisson|all_at_zero");
    w.arrival.rate_per_sec = a->number("rate", w.arrival.rate_per_sec);
    a->finish();
  }
  if (auto o = s.child("output_len")) w.output_len = parse_length(*o, w.output_len);
  if (auto p = s.child("prompt_len")) w.prompt_len = parse_length(*p, w.prompt_len);
  if (auto ap = s.child("acceptance_profile")) {
    auto& prof = w.acceptance;
    const auto kind = ap->text("kind", std::string(to_string(prof.kind)));
    rethrow_as_config_error([&] { prof.kind = parse_acceptance_kind(kind); });
    prof.stable_rate = ap->range("stable_rate", prof.stable_rate);
    prof.amplitude = ap->range("amplitude", prof.amplitude);
    prof.decay = ap->range("decay", prof.decay);
    prof.period = ap->range("period", prof.period);
    ap->finish();
  }
  s.finish();
}

void parse_policy(Section s, LapsSdConfig& laps) {
  laps.queues.k = static_cast<int>(s.integer("K", laps.queues.k));
  laps.queues.s1_up = s.millis("s1_up_ms", laps.queues.s1_up);
  laps.queues.growth = s.number("M", laps.queues.growth);
  const auto placement = s.text(
      "placement", laps.placement == LapsSdConfig::Placement::Estimate ? "estimate" : "attained");
  if (placement == "estimate")
    laps.placement = LapsSdConfig::Placement::Estimate;
  else if (placement == "attained")
    laps.placement = LapsSdConfig::Placement::Attained;
  else
    throw ConfigError(join(s.path(), "placement") + ": expected estimate|attained");
  laps.oracle_estimates = s.boolean("oracle_estimates", laps.oracle_estimates);
  s.finish();
}

void parse_stability(Section s, StabilityConfig& st) {
  st.gamma = static_cast<int>(s.integer("gamma", st.gamma));
  st.delta = s.number("delta", st.delta);
  const auto rule = s.text("rule", st.rule == StabilityConfig::Rule::Spread ? "spread" : "adjacent");
  if (rule == "spread")
    st.rule = StabilityConfig::Rule::Spread;
  else if (rule == "adjacent")
    st.rule = StabilityConfig::Rule::Adjacent;
  else
    throw ConfigError(join(s.path(), "rule") + ": expected spread|adjacent");
  s.finish();
}

void parse_cost(Section s, CostModel& c) {
  c.t_ssm_per_token = s.millis("t_ssm_ms", c.t_ssm_per_token);
  c.t_llm_verify = s.millis("t_llm_ms", c.t_llm_verify);
  c.spec_len = s.integer("spec_len", c.spec_len);
  c.switch_base = s.millis("switch_base_ms", c.switch_base);
  c.switch_per_token = s.millis("switch_per_token_ms", c.switch_per_token);
  c.bonus_token = s.boolean("bonus_token", c.bonus_token);
  const auto mode = s.text("acceptance_mode", std::string(to_string(c.mode)));
  try {
    c.mode = parse_acceptance_mode(mode);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(join(s.path(), "acceptance_mode") + ": " + e.what());
  }
  s.finish();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(s.path() + ": " + e.what());
  }
}

void apply(const json& doc, ExperimentConfig& cfg, bool allow_version) {
  Section root(doc, "");
  if (allow_version) root.integer("version", 1);
  if (auto w = root.child("workload")) parse_workload(*w, cfg.workload);
  if (auto c = root.child("cost")) parse_cost(*c, cfg.cost);
  if (auto p = root.child("policy")) parse_policy(*p, cfg.policy.laps);
  if (auto st = root.child("stability")) parse_stability(*st, cfg.policy.laps.stability);
  root.finish();
}

const json& profiles_doc() {
  static const json doc = json::parse(kProfilesJson);
  return doc;
}

}  // namespace

std::vector<std::string> profile_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : profiles_doc().at("profiles").items()) names.push_back(name);
  return names;
}

ExperimentConfig profile_config(std::string_view name) {
  const auto& profiles = profiles_doc().at("profiles");
  const auto it = profiles.find(std::string(name));
  if (it == profiles.end()) {
    std::string known;
    for (const auto& n : profile_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("workload.profile: unknown profile '" + std::string(name) +
                      "' (known: " + known + ")");
  }
  ExperimentConfig cfg;
  cfg.profile = std::string(name);
  apply(*it, cfg, false);
  return cfg;
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
  std::string profile = "chat";
  if (doc.contains("workload") && doc["workload"].is_object() &&
      doc["workload"].contains("profile")) {
    const auto& p = doc["workload"]["profile"];
    if (!p.is_string()) throw ConfigError("workload.profile: expected a string");
    profile = p.get<std::string>();
  }
  ExperimentConfig cfg = profile_config(profile);
  apply(doc, cfg, true);
  rethrow_as_config_error([&] {
    cfg.workload.validate();
    cfg.policy.laps.validate();
  });
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

json cost_to_json(const CostModel& c) {
  return json{{"t_ssm_ms", c.t_ssm_per_token.ms()},
              {"t_llm_ms", c.t_llm_verify.ms()},
              {"spec_len", c.spec_len},
              {"switch_base_ms", c.switch_base.ms()},
              {"switch_per_token_ms", c.switch_per_token.ms()},
              {"bonus_token", c.bonus_token},
              {"acceptance_mode", to_string(c.mode)}};
}

json config_to_json(const ExperimentConfig& cfg) {
  const auto& w = cfg.workload;
  const auto range = [](const UniformRange& r) { return json::array({r.lo, r.hi}); };
  const auto length = [](const LengthDistribution& d) {
    return json{{"mu", d.mu}, {"sigma", d.sigma}, {"min", d.min_len}, {"max", d.max_len}};
  };
  const auto& laps = cfg.policy.laps;
  json doc;
  doc["version"] = 1;
  doc["workload"] = {
      {"profile", cfg.profile},
      {"num_requests", w.num_requests},
      {"seed", w.seed},
      {"predictor_noise", w.predictor_noise},
      {"arrival",
       {{"kind", w.arrival.kind == ArrivalProcess::Kind::Poisson ? "poisson" : "all_at_zero"},
        {"rate", w.arrival.rate_per_sec}}},
      {"output_len", length(w.output_len)},
      {"prompt_len", length(w.prompt_len)},
      {"acceptance_profile",
       {{"kind", to_string(w.acceptance.kind)},
        {"stable_rate", range(w.acceptance.stable_rate)},
        {"amplitude", range(w.acceptance.amplitude)},
        {"decay", range(w.acceptance.decay)},
        {"period", range(w.acceptance.period)}}}};
  doc["cost"] = cost_to_json(cfg.cost);
  doc["policy"] = {
      {"K", laps.queues.k},
      {"s1_up_ms", laps.queues.s1_up.ms()},
      {"M", laps.queues.growth},
      {"placement", laps.placement == LapsSdConfig::Placement::Estimate ? "estimate" : "attained"},
      {"oracle_estimates", laps.oracle_estimates}};
  doc["stability"] = {
      {"gamma", laps.stability.gamma},
      {"delta", laps.stability.delta},
      {"rule", laps.stability.rule == StabilityConfig::Rule::Spread ? "spread" : "adjacent"}};
  return doc;
}

CostModel cost_from_json(const json& doc, const CostModel& base) {
  CostModel cost = base;
  // Either a bare cost object or a full experiment config.
  if (doc.is_object() && doc.contains("cost"))
    parse_cost(Section(doc.at("cost"), "cost"), cost);
  else
    parse_cost(Section(doc, "cost"), cost);
  return cost;
}

CostModel load_cost(const std::filesystem::path& path, const CostModel& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cost: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("cost: " + path.string() + ": " + e.what());
  }
  return cost_from_json(doc, base);
}

std::string config_hash(const json& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : canonical.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace specsched
