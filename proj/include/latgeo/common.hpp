#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace latgeo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Raised when a computation produces or detects non-finite or otherwise
/// invalid numeric state (broken metric, diverged training, ...).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised on malformed, truncated or unwritable files.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

inline void check_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw NumericError(what + ": non-finite value");
}

template <typename Derived>
void check_finite(const Eigen::MatrixBase<Derived>& m, const std::string& what) {
    if (!m.allFinite()) throw NumericError(what + ": non-finite entries");
}

} // namespace latgeo
