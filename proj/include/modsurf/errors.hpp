#pragma once

#include <stdexcept>
#include <string>

namespace modsurf {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input outside the documented domain (validation failure).
class DomainError : public Error {
public:
    using Error::Error;
};

class PoleError : public DomainError {
public:
    using DomainError::DomainError;
};

class ToleranceNotMet : public Error {
public:
    using Error::Error;
};

// Budget exhausted: iteration caps, enumeration overflow, search limits.
class ResourceError : public Error {
public:
    using Error::Error;
};

class QuadratureError : public ToleranceNotMet {
public:
    QuadratureError(const std::string& what, double best, double err)
        : ToleranceNotMet(what), best_estimate(best), error_estimate(err) {}
    double best_estimate;
    double error_estimate;
};

class TransformError : public ToleranceNotMet {
public:
    TransformError(const std::string& stage, const std::string& what)
        : ToleranceNotMet(stage + ": " + what), stage(stage) {}
    std::string stage;
};

}  // namespace modsurf
