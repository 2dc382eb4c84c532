#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rcwave {

/// A value lies outside the mathematical domain of an operation
/// (negative density, radius beyond the vacuum edge, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The R/C characters are not defined at this point: r = 0, or one of the
/// wave speeds vanishes (sonic point).
class CharacterUndefined : public DomainError {
public:
    using DomainError::DomainError;
};

/// Adaptive integration could not meet the requested tolerance.
class IntegrationFailure : public std::runtime_error {
public:
    IntegrationFailure(const std::string& what, double t, double step)
        : std::runtime_error(what), t_(t), step_(step) {}

    double time() const noexcept { return t_; }
    double last_step() const noexcept { return step_; }

private:
    double t_;
    double step_;
};

/// Fatal failure of one finite-volume step.
class StepError : public std::runtime_error {
public:
    StepError(const std::string& what, std::size_t cell)
        : std::runtime_error(what), cell_(cell) {}

    std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t cell_;
};

/// Invalid or missing configuration value; `key()` is the dotted key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(key) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace rcwave
