#pragma once

#include <stdexcept>
#include <string>

namespace qhd {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Physical or numerical parameter out of its admissible range.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

// Malformed or inconsistent run configuration.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// A trajectory ran into a node of the density where the velocity field
// is undefined. Carries the offending location.
class SingularPointError : public Error {
public:
    SingularPointError(double x, double z, const std::string& what)
        : Error(what), x_(x), z_(z) {}
    double x() const noexcept { return x_; }
    double z() const noexcept { return z_; }

private:
    double x_;
    double z_;
};

// Grid too small for the requested stencil or reduction.
class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& what) : Error(what) {}
};

// Field is identically zero (or below threshold everywhere); no
// hydrodynamic decomposition exists.
class DegenerateFieldError : public Error {
public:
    explicit DegenerateFieldError(const std::string& what) : Error(what) {}
};

// Periodic spectral domain too small: wavepacket mass has reached the
// boundary and would wrap around.
class DomainTooSmallError : public Error {
public:
    explicit DomainTooSmallError(const std::string& what) : Error(what) {}
};

// Every trajectory of an ensemble hit a singular point; nothing to return.
class EnsembleError : public Error {
public:
    explicit EnsembleError(const std::string& what) : Error(what) {}
};

// An adaptive routine failed to reach its requested tolerance. Carries the
// error estimate it did achieve.
class ToleranceError : public Error {
public:
    ToleranceError(double achieved, const std::string& what)
        : Error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

}  // namespace qhd
