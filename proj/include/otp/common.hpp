#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace otp {

// Point sets are stored one point per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Raised when operand dimensions do not agree.
class ShapeError : public std::invalid_argument {
 public:
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace otp
