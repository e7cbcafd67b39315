#pragma once

#include <stdexcept>
#include <string>

namespace mgcool {

// Base class for every failure the library reports. `kind()` is the
// stable name printed by the CLI ("TruncationError", ...).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define MGCOOL_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  };

MGCOOL_DEFINE_ERROR(ConfigError)
MGCOOL_DEFINE_ERROR(DimensionError)
MGCOOL_DEFINE_ERROR(TruncationError)
MGCOOL_DEFINE_ERROR(ConvergenceError)
MGCOOL_DEFINE_ERROR(IntegratorError)
MGCOOL_DEFINE_ERROR(DegenerateSteadyStateError)
MGCOOL_DEFINE_ERROR(SingularResolventError)
MGCOOL_DEFINE_ERROR(FitError)
MGCOOL_DEFINE_ERROR(BracketError)

#undef MGCOOL_DEFINE_ERROR

}  // namespace mgcool
