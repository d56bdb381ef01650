#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace tunnel {

enum class Method {
  exact_diagonalization,
  mathieu,
  trace_ground,
  trace_excited,
  power_trick,
  instanton_ground,
  excited_semiclassical,
  pendulum_asymptotic,
  resonant_sum,
  resonant_limit,
  escape_rate,
  orbit_rebuild
};

inline const char* to_string(Method m) {
  switch (m) {
    case Method::exact_diagonalization: return "exact";
    case Method::mathieu: return "mathieu";
    case Method::trace_ground: return "delta0_trace";
    case Method::trace_excited: return "deltan_trace";
    case Method::power_trick: return "power_trick";
    case Method::instanton_ground: return "instanton";
    case Method::excited_semiclassical: return "excited";
    case Method::pendulum_asymptotic: return "pendulum_asymptotic";
    case Method::resonant_sum: return "resonant_sum";
    case Method::resonant_limit: return "resonant_limit";
    case Method::escape_rate: return "escape_rate";
    case Method::orbit_rebuild: return "orbit_rebuild";
  }
  return "unknown";
}

struct SplittingEstimate {
  double value = 0;
  Method method = Method::exact_diagonalization;
  double hbar = 0;
  int level = 0;
  std::map<std::string, double> diagnostics;
  std::vector<std::string> warnings;

  bool has_warning(std::string_view w) const {
    return std::find(warnings.begin(), warnings.end(), w) != warnings.end();
  }
  double diag(const std::string& key) const { return diagnostics.at(key); }
  void warn(std::string w) {
    if (!has_warning(w)) warnings.push_back(std::move(w));
  }
};

}  // namespace tunnel
