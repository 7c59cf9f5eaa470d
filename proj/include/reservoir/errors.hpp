#pragma once

#include <stdexcept>
#include <string>

namespace reservoir {

// Invalid parameters or an argument outside an operation's domain.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that cannot be carried out reliably in double precision,
// e.g. a singular or badly conditioned linear system.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The supplied search interval does not bracket a root.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reservoir
