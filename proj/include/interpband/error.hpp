#pragma once

#include <stdexcept>
#include <string>

namespace interpband {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation
/// (probability outside (0,1), point outside the grid region, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A requested level lies outside the range of a monotone field.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Caller violated a documented precondition (bad sizes, non-monotone input).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Root bracketing failed: no sign change on the bracket.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// An estimator cannot be evaluated on the given data (e.g. empty group).
class EstimationError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (CSV ingestion).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid design or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace detail {

template <class E>
inline void require(bool cond, const std::string& what) {
  if (!cond) throw E(what);
}

// Call from a catch block: rethrows the active library error with `prefix`
// prepended, keeping its category.
[[noreturn]] inline void rethrow_with_context(const std::string& prefix) {
  try {
    throw;
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const RangeError& e) {
    throw RangeError(prefix + e.what());
  } catch (const PreconditionError& e) {
    throw PreconditionError(prefix + e.what());
  } catch (const BracketError& e) {
    throw BracketError(prefix + e.what());
  } catch (const EstimationError& e) {
    throw EstimationError(prefix + e.what());
  } catch (const DataError& e) {
    throw DataError(prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

}  // namespace detail
}  // namespace interpband
