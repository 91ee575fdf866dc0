#pragma once

#include <stdexcept>
#include <string>

namespace robustglm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed user input (CSV, flags, dataset invariants).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Weighted normal system could not be solved even with the ridge fallback.
class RankDeficientError : public Error {
 public:
  using Error::Error;
};

/// Iterates left the finite range or an estimate does not exist.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Every robustness weight vanished; the start is too far from the data.
class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

class TableBuildError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace robustglm
