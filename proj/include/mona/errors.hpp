#pragma once

#include <stdexcept>
#include <string>

namespace mona {

/// Netlist syntax or validation problem (CLI exit code 1).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message
                                      : std::move(message)),
          line_(line) {}

    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

/// Circuit topology rejected by the index-analysis conditions (CLI exit code 2).
class TopologyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Device model violates its validity assumptions (non-SPD matrix, bad parameter).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Newton or time-stepping failure (CLI exit code 3).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& message, int step = -1)
        : std::runtime_error(message), step_(step) {}

    /// Step index at which the run failed, or -1 outside a run.
    [[nodiscard]] int step() const { return step_; }

private:
    int step_;
};

}  // namespace mona
