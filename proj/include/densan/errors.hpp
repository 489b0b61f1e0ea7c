#pragma once

#include <stdexcept>
#include <string>

namespace densan {

/// Two multiindices (or a multiindex and a direction set) disagree in length.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Evaluation hit a point where the potential or wavefunction is not smooth.
class SingularityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Argument outside the region where an operation is defined (e.g. |x| <= eps).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Request beyond what the implementation provides (derivative order, N, ...).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structural invariant of an object was violated.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid configuration; `field()` holds the JSON path of the offending entry.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace densan
