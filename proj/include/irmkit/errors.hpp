#ifndef IRMKIT_ERRORS_HPP
#define IRMKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace irmkit {

// Bad arguments or flags supplied by the caller.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data that violates a graph or model invariant (malformed files,
// self-loops, dimension mismatches, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A quantity that is mathematically undefined for the given inputs.
class NumericError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace irmkit

#endif  // IRMKIT_ERRORS_HPP
