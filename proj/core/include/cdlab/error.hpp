#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdlab {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A scalar argument outside its mathematical domain (λ ≤ 0, |w| ≥ 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A structurally invalid argument (wrong shape, non-unit diagonal, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// A nonzero coupling coefficient sits on an entry that must vanish for the
// assembled operator to be bounded.
class UnboundedEntry : public Error {
 public:
  UnboundedEntry(std::size_t i, std::size_t j)
      : Error("unbounded entry (" + std::to_string(i) + "," + std::to_string(j) +
              "): nonzero coefficient on a forced-zero position"),
        i_(i),
        j_(j) {}
  std::size_t row() const noexcept { return i_; }
  std::size_t col() const noexcept { return j_; }

 private:
  std::size_t i_;
  std::size_t j_;
};

// The similarity reduction needs valency at least 2.
class ValencyTooSmall : public Error {
 public:
  explicit ValencyTooSmall(double valency)
      : Error("valency " + std::to_string(valency) + " is below 2; no bounded reduction exists"),
        valency_(valency) {}
  double valency() const noexcept { return valency_; }

 private:
  double valency_;
};

// Ill-conditioning or a sign violation detected during evaluation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Two independent evaluation routes disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace cdlab
