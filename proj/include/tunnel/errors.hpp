#pragma once

#include <stdexcept>
#include <string>

namespace tunnel {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ContractViolation : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct NotAWell : Error { using Error::Error; };
struct DegenerateTurningPoint : Error { using Error::Error; };
struct AboveBarrier : Error { using Error::Error; };
struct IncompatibleTopology : Error { using Error::Error; };
struct UnresolvedBasis : Error { using Error::Error; };
struct SolverFailure : Error { using Error::Error; };
struct EmptyLatticeSum : Error { using Error::Error; };
struct ResonanceSingularity : Error { using Error::Error; };
struct NongenericTime : Error { using Error::Error; };
struct IntegrationAccuracy : Error { using Error::Error; };
struct TopologyError : Error { using Error::Error; };
struct CausticError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

}  // namespace tunnel
