#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace pcat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Malformed input: bad dimensions, broken invariants, unreadable files.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A computation that cannot proceed: singular operator, degenerate spectrum
// where a gap is required, all-degenerate data.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pcat
