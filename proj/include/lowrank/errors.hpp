#pragma once

#include <stdexcept>
#include <string>

namespace lowrank {

class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Argument outside the domain of a scalar function (log of a negative eigenvalue, ...).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

class NotCommuting : public std::runtime_error {
 public:
  explicit NotCommuting(const std::string& what) : std::runtime_error(what) {}
};

class IOError : public std::runtime_error {
 public:
  explicit IOError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lowrank
