#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace papa {

using Index = Eigen::Index;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A mathematical invariant failed (inconsistent oracle data, violated
// diagnostic inequality).
struct InvariantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_length(Index expected, Index actual, const char* what) {
  if (expected != actual)
    throw DimensionError(std::string(what) + ": expected length " +
                         std::to_string(expected) + ", got " +
                         std::to_string(actual));
}

template <typename Scalar>
constexpr Scalar infinity() {
  return std::numeric_limits<Scalar>::infinity();
}

}  // namespace papa
