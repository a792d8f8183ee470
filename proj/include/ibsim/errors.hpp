#ifndef IBSIM_ERRORS_HPP
#define IBSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ibsim {

// Base of all library errors; every throw site uses a named subclass so
// callers can catch by failure kind.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NonSimpleConfiguration : Error {
  using Error::Error;
};
struct IndexOutOfRange : Error {
  using Error::Error;
};
struct CollisionTooClose : Error {
  using Error::Error;
};
struct NonConvergentSum : Error {
  using Error::Error;
};
struct DomainViolation : Error {
  using Error::Error;
};
struct MCMCNotMixed : Error {
  using Error::Error;
};
struct CollisionAbort : Error {
  using Error::Error;
};
struct IndivisibleFactor : Error {
  using Error::Error;
};
struct InsufficientEnsemble : Error {
  using Error::Error;
};
struct DegenerateRegression : Error {
  using Error::Error;
};
struct GridMismatch : Error {
  using Error::Error;
};
struct DegeneratePair : Error {
  using Error::Error;
};
struct SchemaMismatch : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

}  // namespace ibsim

#endif  // IBSIM_ERRORS_HPP
