#pragma once

#include <stdexcept>
#include <string>

namespace fraclab {

// Numerical failure (quadrature non-convergence, step underflow, ...).
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Bad run configuration (schema violation, hypothesis violation named by the message).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Geometry oracle failure; usually indicates a distance-oracle bug.
struct geometry_error : std::runtime_error {
    explicit geometry_error(const std::string& what) : std::runtime_error(what) {}
};

// Least-squares failure (rank deficiency etc.).
struct fit_error : std::runtime_error {
    explicit fit_error(const std::string& what) : std::runtime_error(what) {}
};

// Table modulus queried outside its sample range.
struct extrapolation_error : std::domain_error {
    explicit extrapolation_error(const std::string& what) : std::domain_error(what) {}
};

}  // namespace fraclab
