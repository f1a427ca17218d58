#pragma once

#include <stdexcept>
#include <string>

namespace conelab {

// Invalid input: violated preconditions, bad parameters, malformed catalogs.
class DomainError : public std::invalid_argument {
public:
    explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical procedure failed to deliver its contract (no convergence,
// lost positivity, blow-up, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace conelab
