#pragma once

#include <stdexcept>
#include <string>

namespace mstor {

// Base class for everything the library throws on bad input or an impossible request.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// Demand and generation series do not line up.
class AlignmentError : public Error {
public:
    using Error::Error;
};

// Timestamps are not uniformly spaced at the step size.
class GridError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class LookupError : public Error {
public:
    using Error::Error;
};

// No PPC level in the table can carry the requested peak.
class NoContractError : public Error {
public:
    using Error::Error;
};

class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

class InfeasibleActionError : public Error {
public:
    InfeasibleActionError(std::string constraint, const std::string& what)
        : Error(what), constraint_(std::move(constraint)) {}

    // "ramp", "capacity_min" or "capacity_max".
    const std::string& constraint() const noexcept { return constraint_; }

private:
    std::string constraint_;
};

}  // namespace mstor
