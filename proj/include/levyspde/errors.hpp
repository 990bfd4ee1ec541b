#pragma once

#include <stdexcept>
#include <string>

namespace levyspde {

/// Invalid parameterization or unsupported combination of options.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a mathematical function (e.g. G at t <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace levyspde
