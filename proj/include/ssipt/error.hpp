#pragma once

#include <stdexcept>
#include <string>

namespace ssipt {

/// Physical or numerical argument outside the domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Zero-coupling primary with vanishing series impedance: the driven LC
/// branch shorts the inverter.
class ResonantShortError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Time-domain state grew without bound.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Coupler geometry is not physically realizable (overlapping conductors,
/// non-positive dimensions).
class GeometryError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Two filaments are too close for the contour integral to be evaluated.
class SingularityError : public DomainError {
public:
    using DomainError::DomainError;
};

class CalibrationError : public std::runtime_error {
public:
    CalibrationError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Design constraints cannot be met (e.g. the current cap would need a
/// non-positive capacitor).
class InfeasibleError : public DomainError {
public:
    using DomainError::DomainError;
};

/// An operation was called on an input that does not satisfy its
/// precondition (e.g. zvs_check on a non-steady run).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An output file could not be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration text failed to parse or validate. Carries the offending
/// key and line (line 0 when the problem is not tied to a line).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, std::string key = {}, int line = 0)
        : std::runtime_error(format(message, key, line)), key_(std::move(key)), line_(line) {}

    const std::string& key() const noexcept { return key_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& message, const std::string& key, int line) {
        std::string out;
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!key.empty()) out += "'" + key + "': ";
        return out + message;
    }

    std::string key_;
    int line_;
};

}  // namespace ssipt
