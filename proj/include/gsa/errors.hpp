#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsa {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

class DimensionTooLarge : public Error {
 public:
  explicit DimensionTooLarge(const std::string& msg) : Error(msg) {}
};

/// Cholesky factorization hit a non-positive pivot; `pivot()` is its index.
class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& msg, std::size_t pivot)
      : Error(msg + " (pivot " + std::to_string(pivot) + ")"), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

class WrongSpace : public Error {
 public:
  explicit WrongSpace(const std::string& msg) : Error(msg) {}
};

class InvalidPermutation : public Error {
 public:
  explicit InvalidPermutation(const std::string& msg) : Error(msg) {}
};

class IndexOutOfRange : public Error {
 public:
  explicit IndexOutOfRange(const std::string& msg) : Error(msg) {}
};

class Underdetermined : public Error {
 public:
  explicit Underdetermined(const std::string& msg) : Error(msg) {}
};

class NonFiniteOutput : public Error {
 public:
  explicit NonFiniteOutput(const std::string& msg) : Error(msg) {}
};

class ZeroVariance : public Error {
 public:
  explicit ZeroVariance(const std::string& msg) : Error(msg) {}
};

/// External model process exited nonzero; message carries captured stderr.
class ProcessFailed : public Error {
 public:
  explicit ProcessFailed(const std::string& msg) : Error(msg) {}
};

class MalformedOutput : public Error {
 public:
  explicit MalformedOutput(const std::string& msg) : Error(msg) {}
};

class EvaluationTimeout : public Error {
 public:
  explicit EvaluationTimeout(const std::string& msg) : Error(msg) {}
};

/// Configuration rejected; `field()` is the offending JSON path.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& msg)
      : Error(field + ": " + msg), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace gsa
