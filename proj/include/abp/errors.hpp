#pragma once

#include <stdexcept>
#include <string>

namespace abp {

/// Rejected input. `field()` names the offending parameter.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A numerical procedure failed (singular system, horizon exceeded, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The PDE run hit t_max before the survival probability fell below s_tail.
class HorizonError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace abp
