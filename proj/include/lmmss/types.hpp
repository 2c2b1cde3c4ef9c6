#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace lmmss {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Thrown when argument shapes are inconsistent with an operation's contract.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when a matrix pair (or the assembled damped system) is numerically
/// singular, i.e. the null spaces of the two operators overlap.
class SingularPairError : public std::runtime_error {
public:
    explicit SingularPairError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lmmss
