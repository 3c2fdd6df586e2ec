#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace dualbli {

// Row-major so that one row is one word vector and mapping is rows * W.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

using Rng = std::mt19937_64;

// Bad input data: unreadable or malformed files, shape mismatches.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// NaN or infinity appeared in a trained parameter.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, std::int64_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  std::int64_t iteration() const { return iteration_; }

 private:
  std::int64_t iteration_;
};

// Independent engine for a named sub-stream of one master seed.
Rng derive_rng(std::uint64_t seed, std::uint64_t stream);

bool all_finite(const Matrix& m);

}  // namespace dualbli
