#pragma once

#include <stdexcept>
#include <string>

namespace besovflow {

/// Evaluation outside the admissible state domain of the pressure law.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid grid, decomposition, solver, or run configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parameters violating one of the admissibility constraints on (d, p, σ, σ₁).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Time integration failure; carries the last time at which the state was valid.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double last_good_time)
        : std::runtime_error(what), last_good_time_(last_good_time) {}

    double last_good_time() const noexcept { return last_good_time_; }

private:
    double last_good_time_;
};

} // namespace besovflow
