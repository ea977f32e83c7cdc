#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace labeltrick {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexList = std::vector<Index>;

// Raised when a run is misconfigured (bad paths, bad flags, bad method
// names). Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a numerical guard trips (negative radicand beyond clamp,
// operator residual too large, singular normal equations). Maps to CLI
// exit code 3.
class NumericalIntegrityError : public std::runtime_error {
 public:
  explicit NumericalIntegrityError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace labeltrick
