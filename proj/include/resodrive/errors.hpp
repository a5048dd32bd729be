#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace resodrive {

// Config or netlist text that cannot be interpreted (maps to CLI exit 2).
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// A value outside the physical domain of a formula or field evaluation
// (maps to CLI exit 3).
struct DomainViolation : std::domain_error {
  explicit DomainViolation(const std::string& msg) : std::domain_error(msg) {}
};

// Linear system singular or numerically unusable (maps to CLI exit 4).
struct SingularSystemError : std::runtime_error {
  SingularSystemError(const std::string& msg, double frequency_hz,
                      std::vector<std::string> suspect_unknowns)
      : std::runtime_error(msg),
        frequency(frequency_hz),
        suspects(std::move(suspect_unknowns)) {}
  double frequency;
  std::vector<std::string> suspects;
};

// Monte-Carlo run exceeded the allowed per-sample failure rate
// (maps to CLI exit 5).
struct MonteCarloError : std::runtime_error {
  explicit MonteCarloError(const std::string& msg) : std::runtime_error(msg) {}
};

// Boundary-element solve failed its own consistency checks
// (maps to CLI exit 6).
struct BemError : std::runtime_error {
  explicit BemError(const std::string& msg) : std::runtime_error(msg) {}
};

// A frequency band too coarsely sampled for the requested estimate.
struct UnderResolvedError : std::runtime_error {
  explicit UnderResolvedError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace resodrive
