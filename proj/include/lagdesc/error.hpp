#pragma once

#include <stdexcept>
#include <string>

namespace lagdesc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: unknown ids, inconsistent parameters, malformed grids or files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A requested closed form, exact solution or vorticity is not registered.
class NotAvailableError : public Error {
 public:
  using Error::Error;
};

/// The state became non-finite during integration.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double last_finite_time)
      : Error(what), last_finite_time_(last_finite_time) {}
  [[nodiscard]] double last_finite_time() const noexcept { return last_finite_time_; }

 private:
  double last_finite_time_;
};

}  // namespace lagdesc
