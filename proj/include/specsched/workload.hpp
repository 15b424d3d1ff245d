#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "specsched/core.hpp"

namespace specsched {

// Lognormal(mu, sigma) rounded and truncated to [min_len, max_len].
struct LengthDistribution {
  double mu = 5.0;
  double sigma = 0.5;
  std::int64_t min_len = 1;
  std::int64_t max_len = 1024;
};

struct UniformRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct AcceptanceProfile {
  AcceptanceProcess::Kind kind = AcceptanceProcess::Kind::Stabilizing;
  UniformRange stable_rate{0.1, 0.9};
  UniformRange amplitude{0.2, 0.4};
  UniformRange decay{0.7, 0.9};
  UniformRange period{4.0, 12.0};
};

struct ArrivalProcess {
  enum class Kind { AllAtZero, Poisson };
  Kind kind = Kind::AllAtZero;
  double rate_per_sec = 1.0;
};

struct WorkloadConfig {
  std::int64_t num_requests = 50;
  ArrivalProcess arrival;
  LengthDistribution output_len;
  LengthDistribution prompt_len{4.0, 0.5, 0, 512};
  AcceptanceProfile acceptance;
  double predictor_noise = 0.0;  // sigma of the multiplicative lognormal error
  std::uint64_t seed = 1;

  // Throws std::invalid_argument whose message starts with the key path.
  void validate() const;
};

// Pure function of cfg: same cfg (seed included) gives the same list.
std::vector<RequestSpec> generate_workload(const WorkloadConfig& cfg);

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON Lines, one request per line.
void save_trace(const std::filesystem::path& path, const std::vector<RequestSpec>& requests);
std::vector<RequestSpec> load_trace(const std::filesystem::path& path);

std::string trace_to_string(const std::vector<RequestSpec>& requests);
std::vector<RequestSpec> trace_from_string(const std::string& text);

}  // namespace specsched
