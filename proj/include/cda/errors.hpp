#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cda {

/// Point outside the closed domain.
class OutOfDomain : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Coefficient evaluated outside its admissible range (e.g. mobility <= 0).
class CoefficientViolation : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Singular element-local system in the flux postprocessing.
class ElementSingular : public std::runtime_error {
public:
  ElementSingular(std::size_t element, const std::string& what)
      : std::runtime_error(what), element_(element) {}
  std::size_t element() const noexcept { return element_; }

private:
  std::size_t element_;
};

/// No measurement record covers a requested time.
class ObservationGap : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent run or scenario configuration.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Missing or malformed input file.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace cda
