#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace grasskern {

// Base of every error thrown by the library. Callers that only care about
// "something went wrong in grasskern" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, std::size_t iterations)
      : Error(what + " (after " + std::to_string(iterations) + " iterations)"),
        iterations_(iterations) {}
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::size_t iterations_;
};

class NonFiniteEntry : public Error {
 public:
  using Error::Error;
};

class InvalidSubspace : public Error {
 public:
  using Error::Error;
};

class EmbeddingTooLarge : public Error {
 public:
  using Error::Error;
};

class DegenerateRatio : public Error {
 public:
  using Error::Error;
};

class InvalidKernelParameter : public Error {
 public:
  using Error::Error;
};

class NotPositiveSemidefinite : public Error {
 public:
  using Error::Error;
};

class DegenerateLabels : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class EmptyDatabase : public Error {
 public:
  using Error::Error;
};

class ZeroCode : public Error {
 public:
  using Error::Error;
};

class InvalidDimensions : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace grasskern
