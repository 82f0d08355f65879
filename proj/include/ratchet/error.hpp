#pragma once

#include <stdexcept>
#include <string>

namespace ratchet {

/// Base for every error raised by the library. `category()` is a short tag
/// used by the command line front end when reporting a failure.
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& what)
        : std::runtime_error(what), category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config", what) {}
};

/// Classical trajectory produced a non-finite state.
class IntegrationError : public Error {
public:
    IntegrationError(const std::string& what, std::size_t trajectory, std::size_t step)
        : Error("classical", what), trajectory_(trajectory), step_(step) {}

    std::size_t trajectory() const noexcept { return trajectory_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t trajectory_;
    std::size_t step_;
};

/// Kraus ladder outside its first-order validity range.
class StepSizeError : public Error {
public:
    explicit StepSizeError(const std::string& what) : Error("propagator", what) {}
};

/// Population leaked onto the edge of the truncated momentum basis.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, std::size_t period)
        : Error("hilbert", what), period_(period) {}

    std::size_t period() const noexcept { return period_; }

private:
    std::size_t period_;
};

/// A periodic density-matrix audit failed.
class EvolutionIntegrityError : public Error {
public:
    EvolutionIntegrityError(const std::string& what, std::size_t period)
        : Error("propagator", what), period_(period) {}

    std::size_t period() const noexcept { return period_; }

private:
    std::size_t period_;
};

/// Operation received a density matrix in the wrong representation or basis.
class RepresentationError : public Error {
public:
    explicit RepresentationError(const std::string& what) : Error("hilbert", what) {}
};

}  // namespace ratchet
