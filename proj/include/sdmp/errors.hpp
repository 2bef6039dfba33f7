#pragma once

#include <stdexcept>
#include <string>

namespace sdmp {

// Invalid user input: grid divisibility, out-of-domain values, malformed
// configuration. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Base for failures that arise while computing. Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Non-finite coefficient value at an evaluation point.
class EvaluationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Non-finite state during a forward sweep.
class SimulationError : public NumericalError {
public:
    SimulationError(std::size_t path, int step, const std::string& what)
        : NumericalError("simulation error on path " + std::to_string(path) + " at step " +
                         std::to_string(step) + ": " + what),
          path_(path), step_(step) {}

    std::size_t path() const { return path_; }
    int step() const { return step_; }

private:
    std::size_t path_;
    int step_;
};

// Singular regression system in a backward sweep.
class SolverError : public NumericalError {
public:
    SolverError(int time_index, const std::string& what)
        : NumericalError("solver error at time index " + std::to_string(time_index) + ": " + what),
          time_index_(time_index) {}

    int time_index() const { return time_index_; }

private:
    int time_index_;
};

// |sigma_{x_delta}| fell below the non-degeneracy threshold.
class GuardError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Control value outside the admissible set.
class DomainError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// A problem declared delay-free in the state has a nonzero x_delta derivative.
class StructuralError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

// Reference oracle cannot produce a value for this parameter set.
class OracleError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// An output file or directory could not be written. Maps to CLI exit code 2.
class IOError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sdmp
