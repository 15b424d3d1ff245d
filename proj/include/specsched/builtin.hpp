#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "specsched/core.hpp"

namespace specsched {

inline constexpr std::string_view kBuiltinScheme = "builtin:";

// A ready-made trace, optionally with the cost model it was designed for.
struct BuiltinTrace {
  std::string name;
  std::vector<RequestSpec> requests;
  std::optional<CostModel> cost;
};

std::vector<std::string> builtin_trace_names();

// Accepts "fig1" or "builtin:fig1"; nullopt for unknown names.
std::optional<BuiltinTrace> builtin_trace(std::string_view name);

// Three simultaneous requests: (length 10, rate 0.5), (5, 0.1), (20, 1.0),
// verified one token per 10ms round with no bonus token. Service times are
// 200ms, 500ms and 200ms.
BuiltinTrace fig1_trace();

}  // namespace specsched
