#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace coca {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (tables, coding lists, result files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input data that cannot be scored: constant columns, too few rows, ...
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Non-finite objective during variational optimization.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Cholesky breakdown; carries the failing pivot.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, std::size_t pivot)
      : Error(what), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// Shape or dimension mismatch.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain (e.g. non-positive scale).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// File system failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Rethrows the in-flight exception with `prefix` prepended to its message,
/// preserving its type. Call only from inside a catch block.
[[noreturn]] inline void rethrow_with_context(const std::string& prefix) {
  try {
    throw;
  } catch (const DivergenceError& e) {
    throw DivergenceError(prefix + e.what(), e.step());
  } catch (const FactorizationError& e) {
    throw FactorizationError(prefix + e.what(), e.pivot());
  } catch (const DegenerateInputError& e) {
    throw DegenerateInputError(prefix + e.what());
  } catch (const ParseError& e) {
    throw ParseError(prefix + e.what());
  } catch (const DimensionError& e) {
    throw DimensionError(prefix + e.what());
  } catch (const DomainError& e) {
    throw DomainError(prefix + e.what());
  } catch (const IoError& e) {
    throw IoError(prefix + e.what());
  } catch (const Error& e) {
    throw Error(prefix + e.what());
  }
}

}  // namespace coca
