#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spectra {

// Configuration / input validation problems. CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Base for everything that can go wrong while solving the secular problem
// (exit code 3 in the CLI).
class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Requested evaluation energy is closer to an unperturbed level than the
// exclusion tolerance allows; carries the offending level index.
class PoleProximityError : public SolverError {
public:
    PoleProximityError(double omega, std::size_t level_index, double distance,
                       const std::string& what)
        : SolverError(what), omega(omega), level_index(level_index), distance(distance) {}
    double omega;
    std::size_t level_index;
    double distance;
};

// Evaluation energy violates the truncation-safety rule omega <= f * E_cut.
class TruncationUnsafeError : public SolverError {
public:
    explicit TruncationUnsafeError(const std::string& what) : SolverError(what) {}
};

// Two basis levels closer than the tie tolerance.
class DegenerateBasisError : public SolverError {
public:
    explicit DegenerateBasisError(const std::string& what) : SolverError(what) {}
};

// Root bracketing failed where monotonicity guarantees a root; indicates a
// defect in the Green-matrix evaluation rather than bad input.
class BracketingError : public SolverError {
public:
    explicit BracketingError(const std::string& what) : SolverError(what) {}
};

// Null space of the secular matrix at a root is not one-dimensional.
class DegeneracyError : public SolverError {
public:
    explicit DegeneracyError(const std::string& what) : SolverError(what) {}
};

// Statistics-stage failures (exit code 4 in the CLI).
class StatsError : public std::runtime_error {
public:
    explicit StatsError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace spectra
