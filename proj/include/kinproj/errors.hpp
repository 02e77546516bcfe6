#pragma once

#include <stdexcept>
#include <string>

namespace kinproj {

// Invalid or inconsistent run configuration. `line` is the 1-based line of a
// config file when the problem was found while parsing, -1 otherwise.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what, int line = -1)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                      : what),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

// A time stepper produced non-finite values, or a solution grew past the
// blow-up guard. Carries the step index at which the run was abandoned.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long long step, double t)
        : std::runtime_error(what + " (step " + std::to_string(step) +
                             ", t = " + std::to_string(t) + ")"),
          step_(step),
          t_(t) {}

    long long step() const noexcept { return step_; }
    double time() const noexcept { return t_; }

private:
    long long step_;
    double t_;
};

// Refusal to start a run whose estimated step count exceeds the cost ceiling.
class CostCeilingError : public ConfigError {
public:
    CostCeilingError(const std::string& what, long long estimated_steps)
        : ConfigError(what), estimated_steps_(estimated_steps) {}

    long long estimated_steps() const noexcept { return estimated_steps_; }

private:
    long long estimated_steps_;
};

} // namespace kinproj
