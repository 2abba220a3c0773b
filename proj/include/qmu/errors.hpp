#pragma once

#include <stdexcept>
#include <string>

namespace qmu {

/// Malformed arguments: dimension mismatch, out-of-ball points, bad lengths.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation outside the domain of a function (e.g. a kernel pole).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameters outside the range where a criterion is meaningful (t <= t_p).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A constructed object failed one of its certificates.
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal numerical consistency check failed.
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qmu
