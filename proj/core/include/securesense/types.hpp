#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace securesense {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// One m x m gain per stage; index 0 is stage k = 1.
using GainSequence = std::vector<Matrix>;

/// Thrown when a numerical precondition (symmetry, semi-definiteness, shape)
/// does not hold.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when an input violates a documented range (index, horizon, label).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterative numerical method cannot reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace securesense
