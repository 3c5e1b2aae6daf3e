#pragma once

#include <stdexcept>
#include <string>

namespace semibounds {

/// A parameter lies outside the open/closed range an operation accepts.
class OutOfRange : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// The moment specification admits no random variable under the requested
/// constraints (e.g. X >= 0 with mean <= 0).
class InvalidSpec : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// No grid-supported distribution satisfies the oracle's constraints.
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every candidate vertex system was too badly conditioned to solve.
class IllConditioned : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace semibounds
