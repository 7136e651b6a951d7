#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace quartic {

// Every failure the library reports derives from Error so callers can catch
// one type at the boundary (the CLI turns it into a structured diagnostic).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

struct DomainError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& what, std::complex<double> best_estimate,
                   double achieved_error)
      : Error(what), best(best_estimate), achieved(achieved_error) {}
  const char* kind() const noexcept override { return "convergence"; }
  std::complex<double> best;
  double achieved;
};

struct TruncationError : Error {
  TruncationError(const std::string& what, double bound) : Error(what), bound(bound) {}
  const char* kind() const noexcept override { return "truncation"; }
  double bound;
};

// Raised when a block that must be inverted is numerically singular.
// `factor` names the offending piece ("M+S", "M1", "T1", sector "l=0", ...).
struct SingularityError : Error {
  SingularityError(const std::string& what, std::string factor, double condition)
      : Error(what), factor(std::move(factor)), condition(condition) {}
  const char* kind() const noexcept override { return "singularity"; }
  std::string factor;
  double condition;
};

struct BracketError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "bracket"; }
};

struct PreconditionError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "precondition"; }
};

struct ExpansionMismatchError : Error {
  ExpansionMismatchError(const std::string& what, double residual, double envelope)
      : Error(what), residual(residual), envelope(envelope) {}
  const char* kind() const noexcept override { return "expansion-mismatch"; }
  double residual;
  double envelope;
};

struct FitError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "fit"; }
};

struct FormatError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "format"; }
};

struct ConfigError : Error {
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

}  // namespace quartic
