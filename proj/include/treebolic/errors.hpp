#pragma once

#include <stdexcept>
#include <string>

namespace treebolic {

// Bad argument or value outside an operation's domain.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical scheme could not honour its contract (step too large, runaway loop, ...).
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace treebolic
