#pragma once

#include <stdexcept>
#include <string>

namespace dce {

/// Error carrying a short machine-readable code ("unknown_level",
/// "multiple_chosen", ...) alongside a human-readable message.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

/// Raised by estimators and the optimizer when the numerical state is
/// unrecoverable (non-finite objective at the start point, persistent
/// underflow of simulated probabilities).
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace dce
