#pragma once

#include <stdexcept>
#include <string>

namespace rmbf {

// Input outside an operation's mathematical domain (negative F, prior
// outside (0,1), nonpositive log arguments, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Matrix or design too small (n < 2 or k < 2) or malformed.
class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// SSR = 0 with a nonzero treatment effect: F would be infinite.
class DegenerateResidualError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace rmbf
