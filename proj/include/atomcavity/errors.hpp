#pragma once

#include <stdexcept>
#include <string>

namespace atomcavity {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

// An expectation value was requested on a state with zero norm.
class DegenerateState : public Error {
public:
    using Error::Error;
};

// Malformed or insufficient input to an analysis routine.
class InputError : public Error {
public:
    using Error::Error;
};

class ClassificationMismatch : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Non-finite values appeared while integrating. Carries the simulation time
// of the failed step.
class DivergenceError : public Error {
public:
    DivergenceError(double time, const std::string& what)
        : Error(what), time_(time) {}

    double time() const { return time_; }

private:
    double time_;
};

}  // namespace atomcavity
