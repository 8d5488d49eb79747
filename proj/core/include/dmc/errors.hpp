#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dmc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input text (model files, formulas, queries). Carries a 1-based
// line or column position when one is known.
struct ParseError : Error {
    ParseError(const std::string& msg, long position = -1)
        : Error(position >= 0 ? msg + " (at " + std::to_string(position) + ")" : msg),
          position(position) {}
    long position;
};

// A structurally well-formed model that violates a model invariant.
struct ValidationError : Error {
    explicit ValidationError(std::vector<std::string> violations_)
        : Error(join(violations_)), violations(std::move(violations_)) {}
    std::vector<std::string> violations;

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "model validation failed:";
        for (const auto& s : v) out += "\n  " + s;
        return out;
    }
};

struct NotCosafeError : Error {
    using Error::Error;
};

struct AtomMismatchError : Error {
    using Error::Error;
};

struct StateBlowupError : Error {
    using Error::Error;
};

struct ParamMismatchError : Error {
    using Error::Error;
};

struct InfiniteMassError : Error {
    using Error::Error;
};

struct UndefinedChoiceError : Error {
    using Error::Error;
};

struct UnsupportedError : Error {
    using Error::Error;
};

// Violated operation precondition (e.g. a state cannot reach the target
// almost surely). Mapped to exit code 3 by the CLI.
struct PreconditionError : Error {
    using Error::Error;
};

// Iteration cap exhausted before reaching the requested accuracy. Exit code 4.
struct ConvergenceError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

} // namespace dmc
