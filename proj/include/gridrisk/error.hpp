#pragma once

#include <stdexcept>
#include <string>

namespace gridrisk {

// Base class for all engine errors. The pipeline driver rethrows these with
// the failing stage attached so callers can report where a run broke down.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
};

// Raised by the pipeline with the name of the stage that failed.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("stage '" + stage + "': " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

}  // namespace gridrisk
