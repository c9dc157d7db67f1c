#pragma once

#include <stdexcept>
#include <string>

namespace therapycert {

/// Invalid configuration, parameter file, or argument combination.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A required input file is absent.
class MissingInputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input produced under a different feature schema or file format version.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or unrecoverably negative value during a simulation.
class NumericalDomainError : public std::runtime_error {
public:
    NumericalDomainError(std::string component, const std::string& what)
        : std::runtime_error(what), component_(std::move(component)) {}

    const std::string& component() const noexcept { return component_; }

private:
    std::string component_;
};

} // namespace therapycert
